#include "doctest.h"

#include "lob/errors.hpp"
#include "lob/similarity.hpp"

#include <cmath>

using namespace lob;
using namespace lob::similarity;

TEST_CASE("accepted profiles satisfy the similarity equation") {
    for (double gamma : {0.0, 0.5, 1.0, 2.0}) {
        const auto p = solve_similarity(gamma);
        CAPTURE(gamma);
        CHECK(p.residual < 1e-6 * p.max_v());
        CHECK(residual(p) == doctest::Approx(p.residual));
        CHECK(p.v.front() == 0.0);
        CHECK(p.v_inf > 0.0);
        CHECK(std::abs(p.s_grid.back() * p.v.back() / p.v_inf - 1.0) < 0.05);
        CHECK(p.s_peak > 0.0);
        CHECK(p.evaluate(p.s_peak) == p.max_v());
        for (double v : p.v) CHECK(v <= p.max_v());
        // The touch carries the deep-book flux.
        CHECK(p.touch_flux == doctest::Approx(p.v_inf).epsilon(1e-9));
    }
}

TEST_CASE("fast touches need a longer grid to reach the tail") {
    // The correction to v_inf / s is of relative size gamma / s.
    CHECK_THROWS_AS(solve_similarity(4.0), Error);
    ShootingConfig longer;
    longer.s_max = 200.0;
    const auto p = solve_similarity(4.0, longer);
    CHECK(p.residual < 1e-6 * p.max_v());
    CHECK(std::abs(p.s_grid.back() * p.v.back() - 1.0) < 0.05);
}

TEST_CASE("single peak and a single sign change of the slope") {
    for (double gamma : {0.0, 0.5, 1.0, 2.0}) {
        const auto p = solve_similarity(gamma);
        int sign_changes = 0;
        for (std::size_t i = 2; i < p.v_prime.size(); ++i) {
            if ((p.v_prime[i] > 0) != (p.v_prime[i - 1] > 0)) ++sign_changes;
        }
        CHECK(sign_changes == 1);
        for (double v : p.v) CHECK(v >= 0.0);
    }
}

TEST_CASE("far-field ratio recovers the touch speed") {
    for (double gamma : {0.5, 1.0, 2.0}) {
        const auto p = solve_similarity(gamma);
        const double s = p.s_grid.back();
        const double ratio = s * s * (p.v.back() - p.v_inf / s) / p.v_inf;
        CHECK(ratio == doctest::Approx(gamma).epsilon(0.05));
    }
    const auto sym = solve_similarity(0.0);
    const double s = sym.s_grid.back();
    CHECK(std::abs(s * s * (sym.v.back() - 1.0 / s)) < 0.05);
}

TEST_CASE("square-root start at the touch") {
    // Near the touch v^2 ~ (v_inf / 3) s, so v'(0+) is unbounded for every gamma including 0.
    for (double gamma : {0.0, 1.0}) {
        const auto p = solve_similarity(gamma);
        const double s1 = p.s_grid[1];
        CHECK(p.v[1] / std::sqrt(s1) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-3));
    }
}

TEST_CASE("retreating touch has no positive solution") {
    CHECK_THROWS_AS(solve_similarity(-0.5), NoPositiveSolutionError);
    CHECK_THROWS_AS(solve_similarity(NAN), RangeError);
}

TEST_CASE("tolerance refinement barely moves the profile") {
    ShootingConfig loose;
    ShootingConfig tight;
    tight.rel_tol *= 0.5;
    tight.abs_tol *= 0.5;
    for (double gamma : {0.5, 2.0}) {
        const auto a = solve_similarity(gamma, loose);
        const auto b = solve_similarity(gamma, tight);
        CHECK(b.s_peak == doctest::Approx(a.s_peak).epsilon(1e-3));
        CHECK(b.s_grid.back() * b.v.back() == doctest::Approx(a.s_grid.back() * a.v.back()).epsilon(1e-3));
    }
}

TEST_CASE("scaling symmetry of the family") {
    // v -> c^2 v(s/c), gamma -> c gamma, v_inf -> c^3 v_inf maps solutions to solutions.
    const double c = 2.0;
    const auto base = solve_similarity(1.0);
    ShootingConfig scaled_cfg;
    scaled_cfg.v_inf = c * c * c;
    scaled_cfg.s_max = 100.0;
    const auto scaled = solve_similarity(c * 1.0, scaled_cfg);
    CHECK(scaled.s_peak == doctest::Approx(c * base.s_peak).epsilon(1e-6));
    for (double s : {0.5, 2.0, 7.0, 30.0}) {
        CHECK(scaled.evaluate(c * s) == doctest::Approx(c * c * base.evaluate(s)).epsilon(1e-6));
    }
}

TEST_CASE("residual of hand-built profiles") {
    // v = C - s^2/12 solves the gamma = 0 equation identically.
    SimilarityProfile cap;
    const double c = 1.0;
    for (int i = 0; i <= 300; ++i) {
        const double s = 3.0 * i / 300.0;
        cap.s_grid.push_back(s);
        cap.v.push_back(c - s * s / 12.0);
        cap.v_prime.push_back(-s / 6.0);
    }
    CHECK(residual(cap) < 1e-12);

    SimilarityProfile zero = cap;
    std::fill(zero.v.begin(), zero.v.end(), 0.0);
    std::fill(zero.v_prime.begin(), zero.v_prime.end(), 0.0);
    CHECK(residual(zero) == 0.0);
}

TEST_CASE("evaluation off the grid") {
    const auto p = solve_similarity(1.0);
    CHECK(p.evaluate(-1.0) == 0.0);
    CHECK(p.evaluate(0.0) == 0.0);
    for (std::size_t i : {5u, 100u, 1000u}) CHECK(p.evaluate(p.s_grid[i]) == doctest::Approx(p.v[i]).epsilon(1e-12));
    // Beyond s_max the far-field series takes over smoothly.
    const double s_max = p.s_grid.back();
    CHECK(p.evaluate(s_max * (1 + 1e-9)) == doctest::Approx(p.v.back()).epsilon(1e-3));
    CHECK(p.evaluate(200.0) == doctest::Approx(1.0 / 200.0 + 1.0 / (200.0 * 200.0)).epsilon(1e-3));
}

TEST_CASE("dimensional profiles") {
    const auto p = solve_similarity(0.5);
    const PriceGrid grid(-5.0, 45.0, 500);
    const auto unit = dimensional_profile(p, 1.0, 3.0, {}, grid);
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
        CHECK(unit.h[i] == p.evaluate(grid.center(i) - 3.0));
    }
    const auto early = dimensional_profile(p, 1.0, 3.0, {}, grid);
    const auto late = dimensional_profile(p, 8.0, 3.0, {}, PriceGrid(-5.0, 95.0, 20000));
    CHECK(early.max_depth() / late.max_depth() == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(p.max_v() / (p.max_v() * std::cbrt(1.0 / 8.0)) == doctest::Approx(2.0).epsilon(1e-12));

    const Scales scales{1.5, 0.8};
    const auto book = dimensional_profile(p, 2.7, 3.0, scales, grid);
    for (const auto& [s, v] : rescale(book, 2.7, 3.0, scales)) CHECK(v == doctest::Approx(p.evaluate(s)).epsilon(1e-10));

    const auto bid = dimensional_profile(p, 1.0, 3.0, {}, grid, Side::Bid);
    CHECK(bid.h[0] == doctest::Approx(p.evaluate(3.0 - grid.center(0))));
    CHECK(bid.h[grid.n_cells() - 1] == 0.0);
}

TEST_CASE("shooting config validation") {
    ShootingConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.s_max = 5.0;
    CHECK_THROWS_AS(cfg.validate(), RangeError);
    cfg = {};
    cfg.v_inf = 0.0;
    CHECK_THROWS_AS(solve_similarity(1.0, cfg), RangeError);
    cfg = {};
    cfg.n_points = 4;
    CHECK_THROWS_AS(cfg.validate(), RangeError);
}
