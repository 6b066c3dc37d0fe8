#include "doctest.h"

#include "lob/core.hpp"
#include "lob/errors.hpp"
#include "lob/exact.hpp"
#include "lob/pde.hpp"

#include <cmath>
#include <random>

using namespace lob;

TEST_CASE("price grid geometry") {
    const PriceGrid g(-2.0, 3.0, 10);
    CHECK(g.dx() == doctest::Approx(0.5));
    CHECK(g.center(0) == doctest::Approx(-1.75));
    CHECK(g.center(9) == doctest::Approx(2.75));
    CHECK(g.edge(10) == doctest::Approx(3.0));
    CHECK(g.centers().size() == 10);
    CHECK_THROWS_AS(PriceGrid(0.0, 1.0, 3), RangeError);
    CHECK_THROWS_AS(PriceGrid(1.0, 1.0, 8), RangeError);
    CHECK_THROWS_AS(PriceGrid(0.0, NAN, 8), RangeError);
}

TEST_CASE("book profile validation") {
    const PriceGrid g(0.0, 1.0, 4);
    BookProfile p = BookProfile::zeros(g);
    CHECK_NOTHROW(p.validate());
    p.h[2] = -1e-3;
    CHECK_THROWS_AS(p.validate(), RangeError);
    p.h = {1.0, 2.0};
    CHECK_THROWS_AS(p.validate(), RangeError);
    p.h = {1.0, 3.0, 2.0, NAN};
    CHECK_THROWS_AS(p.validate(), RangeError);
    p.h = {1.0, 3.0, 2.0, 0.0};
    CHECK(p.max_depth() == 3.0);
    CHECK(p.argmax() == 1);
}

TEST_CASE("volume of constant and empty books") {
    const PriceGrid g(0.0, 10.0, 20);
    const auto two = BookProfile::from_function(g, [](double) { return 2.0; });
    CHECK(volume(two, 0.0, 10.0) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(total_mass(two) == doctest::Approx(20.0).epsilon(1e-14));
    // Partial cells contribute in proportion to the covered length.
    CHECK(volume(two, 0.1, 0.35) == doctest::Approx(0.5).epsilon(1e-14));

    const auto zero = BookProfile::zeros(g);
    CHECK(volume(zero, 1.3, 7.7) == 0.0);
    CHECK_THROWS_AS(volume(two, 3.0, 1.0), RangeError);
    CHECK_THROWS_AS(volume(two, -1.0, 1.0), RangeError);

    const auto one = BookProfile::from_function(PriceGrid(0.0, 5.0, 7), [](double) { return 1.0; });
    CHECK(total_mass(one) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("square-root book volume converges under refinement") {
    // Antiderivative oracle: integral of sqrt(4 - S) over [0, 4] is (2/3) 4^(3/2) = 16/3.
    double prev = 0.0;
    for (std::size_t n : {50u, 100u, 200u, 400u}) {
        const PriceGrid g(0.0, 4.0, n);
        const auto p = BookProfile::from_function(g, [](double s) { return std::sqrt(std::max(0.0, 4.0 - s)); });
        const double err = std::abs(volume(p, 0.0, 4.0) - 16.0 / 3.0);
        // Midpoint sampling of a sqrt endpoint singularity: error scales like dx^(3/2), well inside O(dx).
        CHECK(err < g.dx());
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
    const auto exact_avg = exact::steady_profile(1.0, 4.0, PriceGrid(0.0, 4.0, 64), exact::Sampling::CellAverage);
    CHECK(total_mass(exact_avg) == doctest::Approx(16.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("volume is additive and monotone") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    const PriceGrid g(0.0, 8.0, 32);
    for (int trial = 0; trial < 20; ++trial) {
        BookProfile p = BookProfile::zeros(g);
        for (double& v : p.h) v = u(rng);
        const double s2 = g.edge(2 + static_cast<std::size_t>(trial % 29));
        const double whole = volume(p, 0.3, 7.9);
        CHECK(volume(p, 0.3, s2) + volume(p, s2, 7.9) == doctest::Approx(whole).epsilon(1e-12));

        BookProfile bigger = p;
        for (double& v : bigger.h) v += u(rng);
        CHECK(volume(bigger, 0.3, 7.9) >= whole);
        CHECK(total_mass(p) >= 0.0);
    }
}

TEST_CASE("mirroring reflects prices and reverses cells") {
    const PriceGrid g(1.0, 5.0, 4);
    BookProfile p = BookProfile::zeros(g, Side::Bid, 2.5);
    p.h = {1.0, 2.0, 3.0, 4.0};
    const auto m = mirror(p);
    CHECK(m.grid.s_min() == -5.0);
    CHECK(m.grid.s_max() == -1.0);
    CHECK(m.h == std::vector<double>{4.0, 3.0, 2.0, 1.0});
    CHECK(m.t == 2.5);
    CHECK(mirror(m).h == p.h);
}

TEST_CASE("source terms") {
    CHECK(SourceTerm::zero().rate(3, 1.0, 2.0, 5.0) == 0.0);
    CHECK(SourceTerm::zero().is_zero());

    const auto relax = SourceTerm::relaxation(2.0, 1.5);
    CHECK(relax.rate(0, 0.0, 0.0, 1.0) == doctest::Approx(1.0));
    CHECK(relax.stiffness() == 2.0);
    CHECK_THROWS_AS(SourceTerm::relaxation(-1.0, 1.0), RangeError);

    const auto tab = SourceTerm::tabulated({1.0, 2.0, 3.0, 4.0});
    CHECK(tab.rate(1, 0.0, 0.0, 0.0) == 2.0);
    CHECK(tab.mirrored(4).rate(1, 0.0, 0.0, 0.0) == 3.0);

    const auto fn = SourceTerm::function([](double s, double t) { return s + 10.0 * t; });
    CHECK(fn.rate(0, 2.0, 1.0, 0.0) == doctest::Approx(12.0));
    CHECK(fn.mirrored(4).rate(0, -2.0, 1.0, 0.0) == doctest::Approx(12.0));
}

TEST_CASE("physical parameter validation") {
    PhysicalParams p;
    CHECK_NOTHROW(p.validate());
    p.beta = 0.0;
    CHECK_THROWS_AS(p.validate(), RangeError);
    p.beta = 1.0;
    p.rho = -1.0;
    CHECK_THROWS_AS(p.validate(), RangeError);
    p.rho = 1.0;
    p.theta = 0.0;
    CHECK_THROWS_AS(p.validate(), RangeError);
    p.theta = 1.0;
    p.u0 = INFINITY;
    CHECK_THROWS_AS(p.validate(), RangeError);
}

TEST_CASE("distances") {
    const std::vector<double> a{1.0, 2.0, 3.0}, b{1.5, 2.0, 1.0};
    CHECK(linf_distance(a, b) == 2.0);
    CHECK(l1_distance(a, b, 0.5) == doctest::Approx(1.25));
    CHECK_THROWS_AS(linf_distance(a, std::vector<double>{1.0}), RangeError);
}

TEST_CASE("one zero-flux step conserves mass") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    const PriceGrid g(0.0, 10.0, 64);
    BookProfile p = BookProfile::zeros(g);
    for (double& v : p.h) v = u(rng);
    const SolverConfig cfg;
    const auto next = step(p, PhysicalParams{}, BoundaryPair{}, cfg, stable_dt(p, PhysicalParams{}, cfg));
    CHECK(total_mass(next) == doctest::Approx(total_mass(p)).epsilon(1e-12));
}
