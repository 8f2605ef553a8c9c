#include "drawdown/dual.hpp"
#include "drawdown/policy.hpp"

#include <doctest.h>

#include <cmath>

using namespace drawdown;

TEST_CASE("floor policy holds no stock and consumes b cbar") {
    const auto p = reference_params();
    const auto sol = solve(p);
    const auto d = decide(sol, p.b / p.r * 2.0, 2.0);
    CHECK(d.theta == 0.0);
    CHECK(d.c == doctest::Approx(0.7 * 2.0));
    CHECK(d.region == Region::Floor);
}

TEST_CASE("consumption is cbar at x_one from both sides") {
    const auto sol = solve(reference_params());
    const auto rb = region_boundaries(sol);
    const double cbar = 3.0;
    const auto at = decide(sol, rb.x_one * cbar, cbar);
    CHECK(at.c == doctest::Approx(cbar).epsilon(1e-9));
    CHECK(decide(sol, rb.x_one * (1 - 1e-9) * cbar, cbar).c == doctest::Approx(cbar).epsilon(1e-7));
}

TEST_CASE("wealth above a ratchets cbar to w / a") {
    const auto sol = solve(reference_params());
    const auto rb = region_boundaries(sol);
    const double w = 2.0 * rb.a;
    const auto d = decide(sol, w, 1.0);
    CHECK(d.cbar_new == doctest::Approx(w / rb.a));
    CHECK(d.c == doctest::Approx(w / rb.a));
    CHECK(d.point.x == doctest::Approx(rb.a));
    const auto again = decide(sol, w, d.cbar_new);
    CHECK(again.cbar_new == d.cbar_new);
}

TEST_CASE("theta matches the dual expression") {
    const auto p = reference_params();
    const auto sol = solve(p);
    const auto rb = region_boundaries(sol);
    const double x = 0.5 * (rb.x_kink + rb.x_one);
    const auto d = decide(sol, x, 1.0);
    const double z = d.point.vp;
    const double expect = (p.mu - p.r) / (p.sigma * p.sigma) * z * eval_J(sol, z).Jpp;
    CHECK(d.theta == doctest::Approx(expect).epsilon(1e-12));
    CHECK(d.c == doctest::Approx(std::pow(z, -1.0 / p.R)).epsilon(1e-12));
}

TEST_CASE("Merton fraction") {
    auto p = reference_params();
    CHECK(merton_fraction(p) == doctest::Approx(0.09 / (0.35 * 0.35 * 2.0)));
    double prev = merton_fraction(p);
    for (double R : {3.0, 5.0, 10.0}) {
        p.R = R;
        CHECK(merton_fraction(p) < prev);
        prev = merton_fraction(p);
    }
}

TEST_CASE("small b recovers the Merton stock fraction in the interior") {
    auto p = reference_params();
    p.b = 1e-3;
    const auto sol = solve(p);
    const auto rb = region_boundaries(sol);
    const double x = 0.5 * (rb.x_kink + rb.x_one);
    const auto d = decide(sol, x, 1.0);
    CHECK(d.theta / x == doctest::Approx(merton_fraction(p)).epsilon(0.02));
}
