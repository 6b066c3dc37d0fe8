#pragma once

#include "lob/core.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace lob::similarity {

/// Numeric solution of 3 (v^2)'' + (s - gamma) v' + v = 0 with v(0) = 0 and v ~ v_inf / s.
///
/// The grid is uniform in sqrt(s): s_grid[i] = s_max (i / (n - 1))^2, which clusters nodes at
/// the touch where v grows like sqrt(s).
struct SimilarityProfile {
    double gamma = 0.0;
    std::vector<double> s_grid;
    std::vector<double> v;
    /// dv/ds. Node 0 holds the secant slope to node 1 because the true slope is unbounded there.
    std::vector<double> v_prime;
    /// dv/d(sqrt s); finite everywhere and used for interpolation.
    std::vector<double> slope_xi;
    double v_inf = 1.0;
    /// 3 (v^2)' at the touch; equals v_inf for every member of the family.
    double touch_flux = 0.0;
    double s_peak = 0.0;
    double residual = 0.0;
    int series_terms = 3;

    double max_v() const;
    /// v(s): 0 for s < 0, cubic Hermite in sqrt(s) on the grid, far-field series beyond s_max.
    double evaluate(double s) const;
};

struct ShootingConfig {
    double s_max = 50.0;
    /// Terms of the far-field series used beyond s_max.
    int series_terms = 3;
    /// Deep-book amplitude selecting the member of the family.
    double v_inf = 1.0;
    double rel_tol = 1e-11;
    double abs_tol = 1e-13;
    std::size_t n_points = 2001;

    void validate() const;
};

/// Integrates outward from the touch. Throws NoPositiveSolutionError for gamma < 0.
SimilarityProfile solve_similarity(double gamma, const ShootingConfig& cfg = {});

/// Max over interior nodes of |3 (v^2)'' + (s - gamma) v' + v|, evaluated as the finite
/// difference of 6 v v' + (s - gamma) v, whose derivative is exactly that expression.
double residual(const SimilarityProfile& profile);

/// Height and length prefactors: H(t) = H0 t^(-1/3), L(t) = L0 t^(1/3).
struct Scales {
    double h0 = 1.0;
    double l0 = 1.0;
};

/// h(S, t) = H0 t^(-1/3) v(s) with s = (S - s0) / (L0 t^(1/3)) on the ask side and
/// s = (s0 - S) / (L0 t^(1/3)) on the bid side, sampled at cell centers.
BookProfile dimensional_profile(const SimilarityProfile& profile, double t, double s0, Scales scales,
                                const PriceGrid& grid, Side side = Side::Ask);

/// Inverse of dimensional_profile at the cell centers: pairs (s_i, h_i t^(1/3) / H0).
std::vector<std::pair<double, double>> rescale(const BookProfile& book, double t, double s0, Scales scales);

}  // namespace lob::similarity
