#include "lob/similarity.hpp"

#include "lob/errors.hpp"
#include "lob/exact.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace lob::similarity {

namespace {

using State = std::array<double, 2>;  // u = v^2 and g = du/ds, both as functions of xi = sqrt(s)

struct Rhs {
    double gamma;

    void operator()(const State& x, State& dxdt, double xi) const {
        const double s = xi * xi;
        const double v = std::sqrt(std::max(x[0], 1e-300));
        dxdt[0] = 2.0 * xi * x[1];
        dxdt[1] = (2.0 / 3.0) * xi * (-(s - gamma) * x[1] / (2.0 * v) - v);
    }
};

double hermite(double y0, double y1, double d0, double d1, double h, double tau) {
    const double t2 = tau * tau;
    const double t3 = t2 * tau;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + tau) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * h * d1;
}

}  // namespace

void ShootingConfig::validate() const {
    if (!(s_max >= 10.0)) throw RangeError("ShootingConfig.s_max must be >= 10");
    if (series_terms < 1) throw RangeError("ShootingConfig.series_terms must be >= 1");
    if (!(v_inf > 0.0) || !std::isfinite(v_inf)) throw RangeError("ShootingConfig.v_inf must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw RangeError("ShootingConfig tolerances must be positive");
    if (n_points < 16) throw RangeError("ShootingConfig.n_points must be >= 16");
}

double SimilarityProfile::max_v() const {
    if (v.empty()) return 0.0;
    const double on_grid = *std::max_element(v.begin(), v.end());
    // The refined peak usually falls between nodes and sits slightly above the largest node value.
    return s_peak > 0.0 ? std::max(on_grid, evaluate(s_peak)) : on_grid;
}

double SimilarityProfile::evaluate(double s) const {
    if (s <= 0.0 || s_grid.empty()) return 0.0;
    const double s_max = s_grid.back();
    if (s >= s_max) {
        if (s == s_max) return v.back();
        const auto far = exact::farfield_series(exact::to_rational(gamma), series_terms, exact::to_rational(v_inf));
        return far.evaluate(s);
    }
    const std::size_t n = s_grid.size();
    const double step = std::sqrt(s_max) / static_cast<double>(n - 1);
    const double xi = std::sqrt(s);
    const auto i = std::min(static_cast<std::size_t>(xi / step), n - 2);
    const double tau = (xi - static_cast<double>(i) * step) / step;
    return hermite(v[i], v[i + 1], slope_xi[i], slope_xi[i + 1], step, tau);
}

SimilarityProfile solve_similarity(double gamma, const ShootingConfig& cfg) {
    if (!std::isfinite(gamma)) throw RangeError("gamma must be finite");
    if (gamma < 0.0) {
        throw NoPositiveSolutionError("no positive similarity solution for gamma = " + std::to_string(gamma) +
                                      " < 0 (retreating touch)");
    }
    cfg.validate();

    const std::size_t n = cfg.n_points;
    const double k = cfg.v_inf;
    const double xi_max = std::sqrt(cfg.s_max);
    const double step = xi_max / static_cast<double>(n - 1);

    // Start just off the touch from the two-term expansion of the first integral
    // 3 (v^2)' + (s - gamma) v = v_inf.
    const double xi0 = 1e-3 * step;
    const double root = std::sqrt(k / 3.0);
    State x{(k / 3.0) * xi0 * xi0 + (2.0 * gamma / 9.0) * root * xi0 * xi0 * xi0, k / 3.0 + (gamma / 3.0) * root * xi0};

    std::vector<double> times;
    times.reserve(n);
    times.push_back(xi0);
    for (std::size_t i = 1; i < n; ++i) times.push_back(static_cast<double>(i) * step);
    times.back() = xi_max;

    std::vector<State> states;
    states.reserve(n);
    const Rhs rhs{gamma};
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(cfg.abs_tol, cfg.rel_tol, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, x, times.begin(), times.end(), 0.1 * step,
                         [&](const State& st, double) { states.push_back(st); });
    if (states.size() != n) throw Error("similarity integration stopped early");

    SimilarityProfile out;
    out.gamma = gamma;
    out.v_inf = k;
    out.touch_flux = k;
    out.series_terms = cfg.series_terms;
    out.s_grid.resize(n);
    out.v.resize(n);
    out.v_prime.resize(n);
    out.slope_xi.resize(n);
    std::vector<double> g(n), dg(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = i == 0 ? 0.0 : times[i];
        out.s_grid[i] = xi * xi;
        if (i == 0) continue;
        const State& st = states[i];
        if (!(st[0] > 0.0) || !std::isfinite(st[0]) || !std::isfinite(st[1])) {
            throw Error("similarity profile lost positivity at s = " + std::to_string(out.s_grid[i]));
        }
        out.v[i] = std::sqrt(st[0]);
        out.v_prime[i] = st[1] / (2.0 * out.v[i]);
        out.slope_xi[i] = 2.0 * xi * out.v_prime[i];
        g[i] = st[1];
        State d{};
        rhs(st, d, xi);
        dg[i] = d[1];
    }
    out.v[0] = 0.0;
    out.v_prime[0] = out.v[1] / out.s_grid[1];
    out.slope_xi[0] = root;
    g[0] = k / 3.0;
    dg[0] = (gamma / 3.0) * root;

    // Peak: the single sign change of g = (v^2)', located on the Hermite cubic in xi.
    std::size_t peak = n;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (g[i] > 0.0 && g[i + 1] <= 0.0) {
            peak = i;
            break;
        }
    }
    if (peak == n) throw Error("similarity profile has no interior peak below s_max; increase s_max");
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hermite(g[peak], g[peak + 1], dg[peak], dg[peak + 1], step, mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double xi_peak = (static_cast<double>(peak) + 0.5 * (lo + hi)) * step;
    out.s_peak = xi_peak * xi_peak;

    const double tail = out.s_grid.back() * out.v.back() / k - 1.0;
    if (!(std::abs(tail) < 0.05)) {
        throw Error("similarity profile has not reached the 1/s tail at s_max = " + std::to_string(cfg.s_max) +
                    " (s v / v_inf - 1 = " + std::to_string(tail) + ")");
    }
    out.residual = residual(out);
    return out;
}

double residual(const SimilarityProfile& profile) {
    const auto& s = profile.s_grid;
    const auto& v = profile.v;
    const auto& vp = profile.v_prime;
    const std::size_t n = s.size();
    if (n < 3) return 0.0;
    std::vector<double> flux(n);
    for (std::size_t i = 0; i < n; ++i) flux[i] = 6.0 * v[i] * vp[i] + (s[i] - profile.gamma) * v[i];
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        // Node 0 may carry a secant slope, so the first interior node uses a forward difference.
        const double d = i == 1 ? (flux[2] - flux[1]) / (s[2] - s[1]) : (flux[i + 1] - flux[i - 1]) / (s[i + 1] - s[i - 1]);
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

BookProfile dimensional_profile(const SimilarityProfile& profile, double t, double s0, Scales scales,
                                const PriceGrid& grid, Side side) {
    if (!(t > 0.0)) throw RangeError("dimensional_profile needs t > 0");
    if (!(scales.h0 > 0.0) || !(scales.l0 > 0.0)) throw RangeError("dimensional_profile needs positive scales");
    const double height = scales.h0 / std::cbrt(t);
    const double length = scales.l0 * std::cbrt(t);
    BookProfile out = BookProfile::zeros(grid, side, t);
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        const double offset = side == Side::Ask ? grid.center(i) - s0 : s0 - grid.center(i);
        out.h[i] = height * profile.evaluate(offset / length);
    }
    return out;
}

std::vector<std::pair<double, double>> rescale(const BookProfile& book, double t, double s0, Scales scales) {
    if (!(t > 0.0)) throw RangeError("rescale needs t > 0");
    const double height = scales.h0 / std::cbrt(t);
    const double length = scales.l0 * std::cbrt(t);
    std::vector<std::pair<double, double>> out;
    out.reserve(book.h.size());
    for (std::size_t i = 0; i < book.h.size(); ++i) {
        const double offset = book.side == Side::Ask ? book.grid.center(i) - s0 : s0 - book.grid.center(i);
        out.emplace_back(offset / length, book.h[i] / height);
    }
    return out;
}

}  // namespace lob::similarity
