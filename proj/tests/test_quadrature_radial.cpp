#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "iplab/errors.hpp"
#include "iplab/quadrature_radial.hpp"
#include "oracles.hpp"

using namespace iplab;

namespace {

double uniform(std::mt19937_64& e, double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(e() >> 11) * 0x1.0p-53;
}

}  // namespace

TEST_CASE("the decay integral at zero and the ball eigenvalue have closed forms") {
    const double F0 = std::numbers::pi * std::numbers::sqrt2 / 4.0;
    CHECK(std::abs(decay_integral(0.0) - F0) < 1e-10);
    CHECK(std::abs(decay_integral_at_zero() - F0) < 1e-15);
    CHECK(std::abs(ball_eigenvalue(1.0) - std::pow(F0, 4)) / std::pow(F0, 4) < 1e-8);
    for (double R : {0.5, 2.0, 4.0})
        CHECK(std::abs(ball_eigenvalue(R) * std::pow(R, 4) - ball_eigenvalue(1.0)) / ball_eigenvalue(1.0) < 1e-10);
}

TEST_CASE("the decay integral is strictly decreasing and its inverse undoes it") {
    double prev = decay_integral(0.0);
    for (int i = 1; i <= 20; ++i) {
        double q = i / 20.0;
        double v = decay_integral(q);
        CHECK(v < prev);
        prev = v;
        if (q < 1.0) CHECK(std::abs(decay_integral_inverse(v) - q) < 1e-9);
    }
    CHECK(decay_integral(1.0) == 0.0);
}

TEST_CASE("profiles agree with the Picard iteration of their fixed-point form") {
    struct Case {
        bool growing;
        double R, lambda, u0;
    };
    const Case cases[] = {{true, 1.0, 1.0, 1.0},
                          {true, 2.0, 0.5, 0.3},
                          {false, 1.0, ball_eigenvalue(1.0), 1.0},
                          {false, 1.5, 0.5 * ball_eigenvalue(1.5), 2.0}};
    for (const auto& c : cases) {
        RadialProfile p = c.growing ? growing_profile(c.R, c.lambda, c.u0) : decaying_profile(c.R, c.lambda, c.u0, Pin::center);
        oracle::PicardResult o = oracle::picard_radial(c.R, c.lambda, c.u0, c.growing);
        REQUIRE(o.converged);
        double err = 0.0;
        for (std::size_t i = 0; i < o.r.size(); ++i) err = std::max(err, std::abs(o.u[i] - p.value(o.r[i])));
        CHECK(err < 1e-8);
    }
}

TEST_CASE("the eigenfunction vanishes at the radius and the edge-pinned profile hits its edge value") {
    RadialProfile e = eigen_profile(1.0, 1.0);
    CHECK(e.value(0.0) == doctest::Approx(1.0));
    CHECK(std::abs(e.value(1.0)) < 1e-9);
    RadialProfile d = decaying_profile(1.0, 0.5 * ball_eigenvalue(1.0), 0.5, Pin::edge);
    CHECK(std::abs(d.value(1.0) - 0.5) < 1e-9);
    CHECK(d.center > 0.5);
    CHECK_THROWS_AS(decaying_profile(1.0, 1.01 * ball_eigenvalue(1.0), 1.0, Pin::center), ParameterError);
}

TEST_CASE("dm/dlambda matches a centred finite difference") {
    std::mt19937_64 e(17);
    const double R = 1.0, lb = ball_eigenvalue(R);
    for (int i = 0; i < 10; ++i) {
        double lambda = uniform(e, 0.1, 0.9) * lb, delta = uniform(e, 0.2, 2.0);
        const double eps = 1e-5;
        double mp = decaying_profile(R, lambda + eps, delta, Pin::edge).center;
        double mm = decaying_profile(R, lambda - eps, delta, Pin::edge).center;
        double fd = (mp - mm) / (2.0 * eps);
        double exact = dm_dlambda(R, lambda, delta);
        CHECK(exact > 0.0);
        CHECK(std::abs(exact - fd) / exact < 1e-4);
    }
}

TEST_CASE("the centre value grows with lambda and dominates its lower bound") {
    const double R = 1.0, lb = ball_eigenvalue(R);
    double prev = 0.0;
    for (int i = 1; i <= 9; ++i) {
        double lambda = 0.1 * i * lb;
        double m = decaying_profile(R, lambda, 1.0, Pin::edge).center;
        CHECK(m > prev);
        CHECK(m >= decaying_center_lower_bound(R, lambda, 1.0));
        prev = m;
    }
}

TEST_CASE("growing profiles obey the small-radius lower bound") {
    const double lambda = 0.7, delta = 0.8;
    RadialProfile p = growing_profile(1.0, lambda, delta);
    CHECK(p.value(0.0) == doctest::Approx(delta));
    for (double r : {0.01, 0.05, 0.1, 0.3}) {
        double bound = std::pow(3.0, 4.0 / 3.0) * delta / 4.0 * std::cbrt(lambda) * std::pow(r, 4.0 / 3.0);
        CHECK(p.value(r) - delta >= bound * (1.0 - 1e-12));
    }
}

TEST_CASE("growth estimates sandwich the profile value strictly") {
    CHECK(std::abs(growth_sigma() - 2.0 / std::pow(15.0, 0.25)) < 1e-15);
    for (double R : {5.0, 10.0, 20.0}) {
        GrowthBounds b = growth_bounds(1.0, 1.0, R);
        CHECK(b.applicable);
        CHECK(b.lower < b.value);
        CHECK(b.value < b.upper);
    }
    CHECK_THROWS_AS(growth_bounds(1.0, 1.0, 1e-3), ParameterError);
}

TEST_CASE("adaptive Simpson reports non-finite integrands") {
    CHECK_THROWS_AS(adaptive_simpson([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-10), NumericalError);
    QuadratureResult q = adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12);
    CHECK(std::abs(q.value - 2.0) < 1e-11);
}
