#include "lob/exact.hpp"

#include "lob/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lob::exact {

Rational to_rational(double x, long long max_den) {
    if (!std::isfinite(x)) throw RangeError("cannot convert a non-finite value to a rational");
    const bool neg = x < 0.0;
    double r = std::abs(x);
    // Convergents p/q of the continued fraction of |x|.
    long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double a = std::floor(r);
        if (a > 9e15) break;
        const auto ai = static_cast<long long>(a);
        const long long p2 = ai * p1 + p0;
        const long long q2 = ai * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = r - a;
        if (frac < 1e-15) break;
        r = 1.0 / frac;
    }
    Rational out(p1, q1);
    return neg ? Rational(-out) : out;
}

// ---------------------------------------------------------------------------

double SteadyProfile::depth(double price) const {
    if (side == Side::Ask) {
        if (price < touch || price > s_b) return 0.0;
        return a * std::sqrt(s_b - price);
    }
    if (price > touch || price < s_b) return 0.0;
    return a * std::sqrt(price - s_b);
}

double SteadyProfile::mass() const { return 2.0 / 3.0 * a * std::pow(std::abs(s_b - touch), 1.5); }

namespace {

BookProfile steady_profile_ask(double a, double s_b, const PriceGrid& grid, Sampling sampling) {
    BookProfile p = BookProfile::zeros(grid, Side::Ask);
    const double dx = grid.dx();
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        if (sampling == Sampling::CellCenter) {
            const double x = grid.center(i);
            p.h[i] = x < s_b ? a * std::sqrt(s_b - x) : 0.0;
        } else {
            const double lo = grid.edge(i);
            const double hi = std::min(grid.edge(i + 1), s_b);
            if (lo < s_b) {
                p.h[i] = 2.0 / 3.0 * a * (std::pow(s_b - lo, 1.5) - std::pow(s_b - hi, 1.5)) / dx;
            }
        }
    }
    return p;
}

}  // namespace

BookProfile steady_profile(double a, double s_b, const PriceGrid& grid, Sampling sampling, Side side) {
    if (!(a >= 0.0)) throw RangeError("steady profile needs a >= 0");
    if (side == Side::Ask) return steady_profile_ask(a, s_b, grid, sampling);
    PriceGrid mg(-grid.s_max(), -grid.s_min(), grid.n_cells());
    return mirror(steady_profile_ask(a, -s_b, mg, sampling));
}

BookProfile steady_profile(const SteadyProfile& steady, const PriceGrid& grid, Sampling sampling) {
    return steady_profile(steady.a, steady.s_b, grid, sampling, steady.side);
}

SteadyProfile fix_mass(double mass, double touch, double s_b) {
    if (!(mass >= 0.0)) throw RangeError("fix_mass needs a nonnegative mass");
    const double w = std::abs(s_b - touch);
    if (!(w > 0.0)) throw RangeError("fix_mass needs s_b away from the touch");
    const double a = mass == 0.0 ? 0.0 : 1.5 * mass / std::pow(w, 1.5);
    return SteadyProfile{a, s_b, touch, s_b >= touch ? Side::Ask : Side::Bid};
}

// ---------------------------------------------------------------------------

std::vector<double> SeriesCoefficients::as_double() const {
    std::vector<double> out;
    out.reserve(coeffs.size());
    for (const auto& c : coeffs) out.push_back(static_cast<double>(c));
    return out;
}

double SeriesCoefficients::evaluate(double s) const {
    double sum = 0.0;
    if (location == SeriesLocation::Touch) {
        double p = s;
        for (const auto& c : coeffs) {
            sum += static_cast<double>(c) * p;
            p *= s;
        }
        return sum;
    }
    double p = 1.0 / s;
    for (const auto& c : coeffs) {
        sum += static_cast<double>(c) * p;
        p /= s;
    }
    return static_cast<double>(v_inf) * sum;
}

namespace {

// sum_{i+j=n, i,j>=1} a_i a_j with a indexed from 1 (a[0] unused).
Rational convolution(const std::vector<Rational>& a, int n) {
    Rational c{0};
    for (int i = 1; i < n; ++i) {
        const int j = n - i;
        if (i < static_cast<int>(a.size()) && j < static_cast<int>(a.size())) c += a[i] * a[j];
    }
    return c;
}

}  // namespace

SeriesCoefficients touch_series(const Rational& gamma, int order) {
    if (order < 1) throw RangeError("touch_series needs order >= 1");
    std::vector<Rational> a(static_cast<std::size_t>(order) + 2, Rational{0});
    if (gamma != 0) {
        a[1] = gamma / 6;
        // Order-m balance: 3 (m+2)(m+1) c_{m+2} + (m+1) a_m - gamma (m+1) a_{m+1} = 0.
        for (int m = 1; m < order; ++m) {
            a[m + 1] = 0;
            const Rational rest = 3 * (m + 2) * (m + 1) * convolution(a, m + 2) + (m + 1) * a[m];
            const Rational pivot = Rational((m + 1) * (m + 1)) * gamma;
            if (pivot == 0) {
                if (rest != 0) throw SeriesInconsistentError(m, static_cast<double>(rest));
                continue;
            }
            a[m + 1] = -rest / pivot;
        }
    } else if (order >= 2) {
        // a_1 = 0 leaves the order-1 balance empty; a_2 is the nontrivial root of 36 a_2^2 + 3 a_2 = 0.
        a[2] = Rational(-1, 12);
        for (int m = 3; m <= order; ++m) {
            a[m] = 0;
            const Rational rest = 3 * (m + 2) * (m + 1) * convolution(a, m + 2) + (m + 1) * a[m];
            const Rational pivot = 6 * (m + 2) * (m + 1) * a[2] + (m + 1);
            if (pivot == 0) {
                if (rest != 0) throw SeriesInconsistentError(m, static_cast<double>(rest));
                continue;
            }
            a[m] = -rest / pivot;
        }
    }
    SeriesCoefficients out{SeriesLocation::Touch, gamma, Rational{1}, {}, order};
    out.coeffs.assign(a.begin() + 1, a.begin() + 1 + order);
    return out;
}

SeriesCoefficients farfield_series(const Rational& gamma, int order, const Rational& v_inf) {
    if (order < 1) throw RangeError("farfield_series needs order >= 1");
    if (v_inf == 0) throw RangeError("farfield_series needs a nonzero v_inf");
    std::vector<Rational> b(static_cast<std::size_t>(order) + 1, Rational{0});
    b[1] = v_inf;
    for (int m = 2; m <= order; ++m) b[m] = gamma * b[m - 1] + 3 * (m - 2) * convolution(b, m - 2);
    SeriesCoefficients out{SeriesLocation::FarField, gamma, v_inf, {}, order};
    for (int k = 1; k <= order; ++k) out.coeffs.push_back(b[k] / v_inf);
    return out;
}

std::vector<TouchCoefficientRow> touch_discrepancy_report(const Rational& gamma) {
    const auto series = touch_series(gamma, 3);
    const auto c = series.as_double();
    const double g = static_cast<double>(gamma);
    std::vector<TouchCoefficientRow> rows;
    const double printed[3] = {g / 6.0, -0.25, g / 118.0};
    for (int k = 0; k < 3; ++k) {
        const bool match = std::abs(c[k] - printed[k]) <= 1e-14 * std::max(1.0, std::abs(printed[k]));
        rows.push_back({k + 1, c[k], printed[k], match});
    }
    return rows;
}

std::string format_discrepancy_report(const std::vector<TouchCoefficientRow>& rows, double gamma) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "near-touch coefficients at gamma=%g\n", gamma);
    os << buf;
    os << "  power   recurrence        printed           match\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "  s^%d     %-16.10g  %-16.10g  %s\n", r.power, r.recurrence, r.printed,
                      r.matches ? "yes" : "no");
        os << buf;
    }
    return os.str();
}

// ---------------------------------------------------------------------------

double parabolic_cap_depth(double c_mass, double t, double center, double price) {
    if (!(t > 0.0)) throw RangeError("parabolic cap needs t > 0");
    const double x = price - center;
    const double g = c_mass - x * x / (12.0 * std::cbrt(t * t));
    return g > 0.0 ? g / std::cbrt(t) : 0.0;
}

double parabolic_cap_half_width(double c_mass, double t) { return std::sqrt(12.0 * c_mass) * std::cbrt(t); }

double parabolic_cap_mass(double c_mass) { return 4.0 / 3.0 * std::sqrt(12.0) * std::pow(c_mass, 1.5); }

BookProfile parabolic_cap(double c_mass, double t, double center, const PriceGrid& grid, Sampling sampling) {
    if (!(t > 0.0)) throw RangeError("parabolic cap needs t > 0");
    if (!(c_mass > 0.0)) throw RangeError("parabolic cap needs a positive constant");
    BookProfile p = BookProfile::zeros(grid, Side::Ask, t);
    const double b = 12.0 * std::cbrt(t * t);
    const double w = parabolic_cap_half_width(c_mass, t);
    const double scale = 1.0 / std::cbrt(t);
    auto antiderivative = [&](double x) { return c_mass * x - x * x * x / (3.0 * b); };
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        if (sampling == Sampling::CellCenter) {
            p.h[i] = parabolic_cap_depth(c_mass, t, center, grid.center(i));
            continue;
        }
        const double lo = std::max(grid.edge(i) - center, -w);
        const double hi = std::min(grid.edge(i + 1) - center, w);
        if (hi > lo) p.h[i] = scale * (antiderivative(hi) - antiderivative(lo)) / grid.dx();
    }
    return p;
}

// ---------------------------------------------------------------------------

DimensionalAsymptotics dimensional_asymptotics(double gamma, double s0, double t, double v_inf, int order) {
    if (!(t > 0.0)) throw RangeError("dimensional asymptotics need t > 0");
    const auto touch = touch_series(to_rational(gamma), order);
    const auto far = farfield_series(to_rational(gamma), order, to_rational(v_inf));
    const double h_scale = 1.0 / std::cbrt(t);
    const double l_scale = std::cbrt(t);
    DimensionalAsymptotics out;
    out.near_touch = [touch, s0, h_scale, l_scale](double price) {
        if (price < s0) return 0.0;
        return h_scale * touch.evaluate((price - s0) / l_scale);
    };
    out.deep_book = [far, s0, h_scale, l_scale](double price) {
        if (price <= s0) return 0.0;
        return h_scale * far.evaluate((price - s0) / l_scale);
    };
    return out;
}

}  // namespace lob::exact
