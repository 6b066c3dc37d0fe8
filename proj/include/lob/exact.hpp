#pragma once

#include "lob/core.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <functional>
#include <string>
#include <vector>

namespace lob::exact {

using Rational = boost::multiprecision::cpp_rational;

/// Nearest rational with denominator at most `max_den` (continued fractions).
Rational to_rational(double x, long long max_den = 1'000'000);

// ---------------------------------------------------------------------------
// Steady square-root profiles
// ---------------------------------------------------------------------------

/// Finite-mass steady book with the touch at `touch` and depth vanishing at the
/// extinction price s_b. Ask orientation: h = sqrt(a^2 (s_b - S)) on [touch, s_b].
/// h^2 is affine on the support, so (h^2)_SS = 0 and the profile is stationary.
struct SteadyProfile {
    double a = 0.0;
    double s_b = 0.0;
    double touch = 0.0;
    Side side = Side::Ask;

    double depth(double price) const;
    /// (2/3) a w^(3/2) with w = |s_b - touch|.
    double mass() const;
};

enum class Sampling {
    CellCenter,   ///< point values; h^2 is exactly affine in the cell index
    CellAverage,  ///< exact cell averages; total_mass matches the closed form
};

/// Samples the steady profile on a grid whose touch-side edge is the touch.
BookProfile steady_profile(double a, double s_b, const PriceGrid& grid, Sampling sampling = Sampling::CellCenter,
                           Side side = Side::Ask);
BookProfile steady_profile(const SteadyProfile& steady, const PriceGrid& grid, Sampling sampling = Sampling::CellCenter);

/// Steady profile with the given mass between `touch` and the extinction price s_b.
SteadyProfile fix_mass(double mass, double touch, double s_b);

// ---------------------------------------------------------------------------
// Series solutions of 3 (v^2)'' + (s - gamma) v' + v = 0
// ---------------------------------------------------------------------------

enum class SeriesLocation { Touch, FarField };

/// Touch: v = sum_{k=1..order} coeffs[k-1] s^k.
/// FarField: v = v_inf * sum_{k=1..order} coeffs[k-1] s^(-k).
struct SeriesCoefficients {
    SeriesLocation location = SeriesLocation::Touch;
    Rational gamma;
    Rational v_inf{1};
    std::vector<Rational> coeffs;
    int order = 0;

    std::vector<double> as_double() const;
    /// Value of the truncated series at s (far field: including the v_inf factor).
    double evaluate(double s) const;
};

/// Polynomial ansatz at the touch, solved order by order. With a nonzero touch speed
/// the order-m balance is linear in a_{m+1} with pivot gamma (m+1)^2; the nontrivial
/// root of the order-0 balance 6 a_1^2 - gamma a_1 = 0 gives a_1 = gamma/6. With
/// gamma = 0 the first coefficient vanishes and a_2 comes from the order-2 balance
/// 36 a_2^2 + 3 a_2 = 0 instead.
SeriesCoefficients touch_series(const Rational& gamma, int order);

/// Far-field expansion. Collecting s^(-m) gives
///   b_m = gamma b_{m-1} + 3 (m - 2) sum_{i+j=m-2} b_i b_j,  b_1 = v_inf,
/// so the first three normalised coefficients are (1, gamma, gamma^2) and v_inf enters from m = 4.
SeriesCoefficients farfield_series(const Rational& gamma, int order, const Rational& v_inf = Rational{1});

/// Near-touch coefficients computed from the recurrence alongside the values printed
/// in the source model's near-touch expansion (-1/4 and gamma/118).
struct TouchCoefficientRow {
    int power = 0;
    double recurrence = 0.0;
    double printed = 0.0;
    bool matches = false;
};
std::vector<TouchCoefficientRow> touch_discrepancy_report(const Rational& gamma);
std::string format_discrepancy_report(const std::vector<TouchCoefficientRow>& rows, double gamma);

// ---------------------------------------------------------------------------
// Parabolic cap: exact compactly supported solution of h_t = (h^2)_SS
// ---------------------------------------------------------------------------
//
// h(S, t) = t^(-1/3) max(0, C - (S - c)^2 / (12 t^(2/3))).
//
// With x = S - c and g = C - x^2/(12 t^(2/3)) on the support:
//   h_t      = -(1/3) t^(-4/3) g + t^(-1/3) * x^2 / (18 t^(5/3)) = t^(-4/3) (-C/3 + x^2/(12 t^(2/3)))
//   (h^2)_SS = t^(-2/3) d^2/dx^2 g^2 = t^(-2/3) (2 g'^2 + 2 g g'') with g' = -x/(6 t^(2/3)), g'' = -1/(6 t^(2/3))
//            = t^(-4/3) (x^2/(18 t^(2/3)) - g/3)          = t^(-4/3) (-C/3 + x^2/(12 t^(2/3)))
// so the equation holds identically; h^2 and its flux vanish at the edges. In similarity
// variables (h = t^(-1/3) v(x / t^(1/3))) this is v = C - s^2/12, which satisfies
// 3 (v^2)'' + s v' + v = 0 exactly.

double parabolic_cap_depth(double c_mass, double t, double center, double price);
double parabolic_cap_half_width(double c_mass, double t);
/// Total quantity (4/3) sqrt(12) C^(3/2); independent of t.
double parabolic_cap_mass(double c_mass);
BookProfile parabolic_cap(double c_mass, double t, double center, const PriceGrid& grid,
                          Sampling sampling = Sampling::CellAverage);

// ---------------------------------------------------------------------------
// Dimensional asymptotics
// ---------------------------------------------------------------------------

/// Series reassembled in price/time units with unit scales (H = t^(-1/3), L = t^(1/3)):
///   near touch: h_0 = t^(-1/3) sum a_k ((S - S0)/t^(1/3))^k
///   deep book:  h_inf = v_inf sum c_k t^((k-1)/3) / (S - S0)^k
/// Both return 0 on the wrong side of the touch.
struct DimensionalAsymptotics {
    std::function<double(double)> near_touch;
    std::function<double(double)> deep_book;
};

DimensionalAsymptotics dimensional_asymptotics(double gamma, double s0, double t, double v_inf = 1.0,
                                               int order = 3);

}  // namespace lob::exact
