#include "doctest.h"

#include "lob/analysis.hpp"
#include "lob/errors.hpp"
#include "lob/exact.hpp"
#include "lob/pde.hpp"
#include "lob/similarity.hpp"

#include <cmath>

using namespace lob;
using namespace lob::analysis;

namespace {

Trajectory synthetic_touch(const std::function<double(double)>& touch, double origin) {
    Trajectory traj{.grid = PriceGrid(0.0, 20.0, 2000), .t_origin = 0.0, .touch_origin = origin};
    for (int k = 1; k <= 100; ++k) {
        const double t = 0.1 * k;
        traj.touch_series.push_back({t, touch(t)});
        traj.peak_series.push_back({t, 1.0});
    }
    return traj;
}

// Snapshots of h = H0 t^(-1/3) v((S - S0(t)) / (L0 t^(1/3))) with S0(t) = origin - speed t^(1/3).
Trajectory manufactured(double gamma, double origin, double speed, similarity::Scales scales, const PriceGrid& grid,
                        double t_lo, double t_step) {
    const auto profile = similarity::solve_similarity(gamma);
    std::vector<BookProfile> snaps;
    for (int k = 0; k < 40; ++k) {
        const double t = t_lo + t_step * k;
        snaps.push_back(similarity::dimensional_profile(profile, t, origin - speed * std::cbrt(t), scales, grid));
    }
    return trajectory_from_snapshots(snaps, 0.0, origin);
}

}  // namespace

TEST_CASE("exact power laws are recovered") {
    const auto traj = synthetic_touch([](double t) { return 15.0 - 2.0 * std::cbrt(t); }, 15.0);
    const auto fit = fit_touch_exponent(traj, {1.0, 10.0});
    CHECK(fit.exponent == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(fit.prefactor == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK(fit.samples == 91);

    const auto flat = fit_height_exponent(traj, {1.0, 10.0});
    CHECK(std::abs(flat.exponent) < 1e-6);

    std::vector<TimedValue> series;
    for (int k = 1; k <= 50; ++k) series.push_back({2.0 + k, 3.0 * std::pow(k, 0.7)});
    const auto gen = fit_power_law(series, 2.0, {3.0, 52.0});
    CHECK(gen.exponent == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(gen.prefactor == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("unfittable touch series") {
    const auto still = synthetic_touch([](double) { return 5.0; }, 5.0);
    CHECK_THROWS_AS(fit_touch_exponent(still, {1.0, 10.0}), UnfittableError);

    const auto wobble = synthetic_touch([](double t) { return 5.0 - std::sin(t); }, 5.0);
    CHECK_THROWS_AS(fit_touch_exponent(wobble, {0.1, 10.0}), UnfittableError);

    const auto few = synthetic_touch([](double t) { return 5.0 - t; }, 5.0);
    CHECK_THROWS_AS(fit_touch_exponent(few, {1.0, 1.5}), UnfittableError);

    std::vector<TimedValue> bad{{1, 1}, {2, 0}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}, {8, 1}, {9, 1}};
    CHECK_THROWS_AS(fit_power_law(bad, 0.0, {0.5, 10.0}), UnfittableError);
}

TEST_CASE("default window skips the initial transient") {
    const auto traj = synthetic_touch([](double t) { return 15.0 - t; }, 15.0);
    const auto w = default_window(traj);
    CHECK(w.t_lo == doctest::Approx(2.0));
    CHECK(w.t_hi == doctest::Approx(10.0));
}

TEST_CASE("parabolic cap decays like t^(-1/3)") {
    const PriceGrid grid(-8.0, 8.0, 400);
    SolverConfig cfg;
    cfg.t_end = 4.0;
    cfg.diagnostic_interval = 0.05;
    auto traj = run(exact::parabolic_cap(1.0, 1.0, 0.0, grid), PhysicalParams{}, BoundaryPair{}, cfg);
    traj.t_origin = 0.0;
    const auto fit = fit_height_exponent(traj, {1.5, 4.0});
    CHECK(fit.exponent == doctest::Approx(-1.0 / 3.0).epsilon(0.03));
}

TEST_CASE("collapse of exactly self-similar snapshots") {
    const PriceGrid grid(-6.0, 6.0, 800);
    std::vector<BookProfile> caps;
    for (double t : {1.0, 1.5, 2.0}) caps.push_back(exact::parabolic_cap(1.0, t, 0.0, grid, exact::Sampling::CellCenter));
    const auto traj = trajectory_from_snapshots(caps, 0.0, 0.0);
    const auto rep = collapse(traj, {1.0, 1.5, 2.0});
    CHECK(rep.max_distance < 1e-3);
    REQUIRE(rep.distances.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rep.distances[i][i] == 0.0);
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(rep.distances[i][j] == rep.distances[j][i]);
            CHECK(rep.distances[i][j] >= 0.0);
        }
    }
    const auto relabelled = collapse(traj, {2.0, 1.0, 1.5});
    CHECK(relabelled.max_distance == doctest::Approx(rep.max_distance).epsilon(1e-12));
    CHECK_THROWS_AS(collapse(traj, {1.0, 1.5}), RangeError);
    CHECK_THROWS_AS(collapse(traj, {1.0, 1.5, 3.0}), LookupError);
}

TEST_CASE("relaxation toward a different shape does not collapse") {
    const PriceGrid grid(0.0, 10.0, 200);
    const auto initial = BookProfile::from_function(grid, [](double s) { return s > 2.0 && s < 4.0 ? 1.0 : 0.0; });
    std::vector<double> target(grid.n_cells());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double s = grid.center(i);
        target[i] = s > 2.0 ? 3.0 * std::exp(-(s - 7.0) * (s - 7.0)) + 0.01 : 0.0;
    }
    PhysicalParams params;
    params.source = SourceTerm::relaxation(1.0, target);
    SolverConfig cfg;
    cfg.mode = SolverMode::SourceOnly;
    cfg.t_end = 3.0;
    cfg.output_times = {0.2, 1.0, 3.0};
    auto traj = run(initial, params, BoundaryPair{}, cfg);
    const auto rep = collapse(traj, {0.2, 1.0, 3.0});
    CHECK(rep.max_distance > 0.1);
}

TEST_CASE("touch speed round trip through the similarity family") {
    const auto traj = manufactured(1.0, 10.0, 1.0, {}, PriceGrid(-20.0, 40.0, 12000), 1.0, 0.2);
    const auto est = estimate_gamma(traj, {1.0, 9.0});
    CHECK(est.gamma == doctest::Approx(1.0).epsilon(0.05));
    CHECK(est.status == GammaStatus::Advancing);
    CHECK(est.ratio == doctest::Approx(touch_to_peak_ratio(1.0)).epsilon(0.02));

    // Price translation.
    const auto shifted = manufactured(1.0, 15.0, 1.0, {}, PriceGrid(-15.0, 45.0, 12000), 1.0, 0.2);
    CHECK(estimate_gamma(shifted, {1.0, 9.0}).gamma == doctest::Approx(est.gamma).epsilon(1e-3));

    // (S, t) -> (2 S, 8 t): h'(S', t') = h(S'/2, t'/8) has height prefactor 2 and the same length prefactor.
    const auto stretched = manufactured(1.0, 20.0, 1.0, {2.0, 1.0}, PriceGrid(-40.0, 80.0, 12000), 8.0, 1.6);
    CHECK(estimate_gamma(stretched, {8.0, 72.0}).gamma == doctest::Approx(est.gamma).epsilon(1e-2));
}

TEST_CASE("stationary touch gives zero touch speed") {
    const auto traj = manufactured(1.0, 10.0, 0.0, {}, PriceGrid(-20.0, 40.0, 6000), 1.0, 0.2);
    const auto est = estimate_gamma(traj, {1.0, 9.0});
    CHECK(est.status == GammaStatus::Stationary);
    CHECK(std::abs(est.gamma) < 0.02);
}

TEST_CASE("symmetric cap sits at the edge of the family") {
    const PriceGrid grid(-8.0, 8.0, 1600);
    std::vector<BookProfile> caps;
    for (int k = 0; k < 20; ++k) caps.push_back(exact::parabolic_cap(1.0, 1.0 + 0.2 * k, 0.0, grid));
    // The point source sits at the center at t = 0, so that is where the touch starts.
    const auto traj = trajectory_from_snapshots(caps, 0.0, 0.0);
    const auto est = estimate_gamma(traj, {1.0, 5.0});
    // Touch and peak recede at the same rate: the ratio is one, outside the reference family.
    CHECK(est.ratio == doctest::Approx(1.0).epsilon(0.02));
    CHECK(est.status == GammaStatus::CapLimit);
}

TEST_CASE("touch-to-peak ratio increases with the touch speed") {
    double prev = 0.0;
    for (double gamma : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const double r = touch_to_peak_ratio(gamma);
        CHECK(r > prev);
        CHECK(r < 1.0);
        prev = r;
    }
    CHECK(touch_to_peak_ratio(0.0) == 0.0);
}

TEST_CASE("distance to the steady family") {
    const PriceGrid grid(0.0, 10.0, 400);
    const auto steady = exact::steady_profile(0.8, 6.0, grid);
    CHECK(steady_distance(steady) < 1e-12);

    const auto uniform = BookProfile::from_function(grid, [](double) { return 1.0; });
    const double d = steady_distance(uniform);
    CHECK(d > 0.1);
    CHECK(d < 1.0);

    CHECK_THROWS_AS(steady_distance(BookProfile::zeros(grid)), RangeError);

    BookProfile bid = exact::steady_profile(0.8, 4.0, grid, exact::Sampling::CellCenter, Side::Bid);
    CHECK(steady_distance(bid) < 1e-12);
}

TEST_CASE("trajectory rebuilt from snapshots") {
    const PriceGrid grid(-6.0, 6.0, 300);
    std::vector<BookProfile> caps;
    for (double t : {2.0, 1.0, 3.0}) caps.push_back(exact::parabolic_cap(1.0, t, 0.0, grid));
    const auto traj = trajectory_from_snapshots(caps, 0.0);
    REQUIRE(traj.snapshots.size() == 3);
    CHECK(traj.snapshots.front().t == 1.0);
    CHECK(traj.touch_origin.has_value());
    CHECK(traj.mass_series[2].value == doctest::Approx(exact::parabolic_cap_mass(1.0)).epsilon(1e-12));
    CHECK(traj.peak_series[0].value > traj.peak_series[2].value);

    auto mixed = caps;
    mixed[1] = exact::parabolic_cap(1.0, 1.0, 0.0, PriceGrid(-6.0, 6.0, 200));
    CHECK_THROWS_AS(trajectory_from_snapshots(mixed, 0.0), RangeError);
    CHECK_THROWS_AS(trajectory_from_snapshots({}, 0.0), RangeError);
}

TEST_CASE("gamma status names") {
    CHECK(to_string(GammaStatus::Advancing) == "advancing");
    CHECK(to_string(GammaStatus::CapLimit) == "cap_limit");
}
