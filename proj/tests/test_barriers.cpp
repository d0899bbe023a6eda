#include <cmath>
#include <random>

#include "doctest.h"
#include "iplab/barriers.hpp"
#include "iplab/catalog.hpp"
#include "iplab/errors.hpp"
#include "iplab/harness.hpp"

using namespace iplab;

namespace {

struct Fixture {
    std::shared_ptr<const CylinderGrid> grid;
    BarrierContext ctx;

    Fixture() {
        grid = std::make_shared<const CylinderGrid>(build_grid(Domain::ball({0.0, 0.0}, 1.0), 0.1, 0.5, 10));
        DataSpec bump{"gaussian-bump", {{"base", 1.0}, {"amplitude", 1.0}, {"width", 0.3}, {"center", nullptr}}};
        ctx = BarrierContext::make(grid, make_data(bump, grid->domain));
    }
};

/// Gamma of eta = log b by centred differences: Delta_inf eta + |D eta|^4 - 3 eta_t.
/// Returns NaN when the difference stencil straddles two pieces.
double fd_gamma(const Barrier& b, std::span<const double> x, double t, double hx) {
    const double ht = hx;
    BarrierPiece p = b.piece(x, t);
    auto eta = [&](double dx, double dy, double dt) {
        double y[] = {x[0] + dx, x[1] + dy};
        return b.piece(y, t + dt) == p ? std::log(b.value(y, t + dt)) : std::nan("");
    };
    double c = eta(0, 0, 0);
    double ex = (eta(hx, 0, 0) - eta(-hx, 0, 0)) / (2 * hx), ey = (eta(0, hx, 0) - eta(0, -hx, 0)) / (2 * hx);
    double exx = (eta(hx, 0, 0) - 2 * c + eta(-hx, 0, 0)) / (hx * hx);
    double eyy = (eta(0, hx, 0) - 2 * c + eta(0, -hx, 0)) / (hx * hx);
    double exy = (eta(hx, hx, 0) - eta(hx, -hx, 0) - eta(-hx, hx, 0) + eta(-hx, -hx, 0)) / (4 * hx * hx);
    double et = (eta(0, 0, ht) - eta(0, 0, -ht)) / (2 * ht);
    double g2 = ex * ex + ey * ey;
    return ex * ex * exx + 2 * ex * ey * exy + ey * ey * eyy + g2 * g2 - 3 * et;
}

}  // namespace

TEST_CASE("closed-form barrier residuals agree with finite differences") {
    Fixture f;
    const double eps = 0.1 * (f.ctx.M - f.ctx.m);
    auto anchors = anchor_net(*f.grid, 3);
    int compared = 0;
    for (BarrierKind kind : {BarrierKind::sub, BarrierKind::super})
        for (std::size_t i = 0; i < anchors.size(); i += 17) {
            Barrier b = make_barrier(f.ctx, anchors[i].first, anchors[i].second, eps, kind);
            if (b.constant) continue;
            std::vector<BarrierPiece> pieces = {BarrierPiece::plateau};
            if (b.family == BarrierFamily::gamma_sub_cone || b.family == BarrierFamily::gamma_sup_cusp)
                pieces.insert(pieces.end(), {BarrierPiece::upper, BarrierPiece::lower});
            else
                pieces.push_back(BarrierPiece::radial);
            for (BarrierPiece p : pieces)
                for (const auto& [x, t] : region_points(b, p, 4, 31 + i)) {
                    // the cone pieces are singular at the anchor; keep the stencil well inside a smooth region
                    if (std::hypot(x[0] - b.anchor[0], x[1] - b.anchor[1]) < 1e-2) continue;
                    double fd = fd_gamma(b, x, t, 1e-5);
                    if (!std::isfinite(fd)) continue;
                    double exact = b.residual_gamma(x, t);
                    double scale = std::max({1.0, std::abs(exact), std::abs(b.rate), std::abs(b.k), std::pow(b.c, 4.0)});
                    CHECK(std::abs(fd - exact) / scale < 1e-4);
                    ++compared;
                }
        }
    CHECK(compared > 50);
}

TEST_CASE("the lower cone piece solves the equation exactly") {
    Fixture f;
    const double eps = 0.1 * (f.ctx.M - f.ctx.m);
    int tested = 0;
    for (int n : f.grid->lateral) {
        Barrier b = make_gamma_sub_cone(f.ctx, n, 5, eps);
        if (b.constant) continue;
        CHECK(std::abs(std::pow(b.c, 4.0) - 3.0 * b.k) <= 1e-12 * std::max(1.0, 3.0 * b.k));
        for (const auto& [x, t] : region_points(b, BarrierPiece::lower, 5, n)) {
            CHECK(std::abs(b.residual_gamma(x, t)) <= 1e-9 * std::max(1.0, 3.0 * b.k));
            ++tested;
        }
        if (tested > 40) break;
    }
    CHECK(tested > 0);
}

TEST_CASE("barriers are pinned to the data and dominate it on the parabolic boundary") {
    Fixture f;
    const double eps = 0.03 * (f.ctx.M - f.ctx.m);
    auto anchors = anchor_net(*f.grid, 1);
    for (BarrierKind kind : {BarrierKind::sub, BarrierKind::super}) {
        auto family = build_family(f.ctx, anchors, eps, kind);
        auto reps = audit_barriers(f.ctx, family, 10, 3);
        for (const auto& r : reps) CHECK_MESSAGE(r.pass, r.property_id);
    }
}

TEST_CASE("barriers serialise their family and constants") {
    Fixture f;
    Barrier b = make_barrier(f.ctx, f.grid->lateral[0], 4, 0.1, BarrierKind::super);
    auto j = b.to_json();
    CHECK(j["family"] == to_string(b.family));
    CHECK(barrier_family_from_string(j["family"].get<std::string>()) == b.family);
    auto cat = barrier_catalog({b});
    CHECK(cat.dump().find(to_string(b.family)) != std::string::npos);
}

TEST_CASE("the anchor net covers level 0 and lateral nodes at strided levels") {
    Fixture f;
    CHECK(anchor_net(*f.grid, 1).size() == f.grid->parabolic_boundary().size());
    CHECK(anchor_net(*f.grid, 4).size() == f.grid->node_count() + 2 * f.grid->lateral.size());
    CHECK_THROWS_AS(anchor_net(*f.grid, 0), ParameterError);
}

TEST_CASE("staircase slabs halve between their end times and meet the closed-form residual") {
    Domain ball = Domain::ball({0.0, 0.0}, 1.0);
    Staircase st = make_staircase_sup(ball, [](double t) { return std::exp(-t); }, 0.25, 0.4, 4);
    REQUIRE(st.slabs() == 4);
    for (int k = 1; k <= st.slabs(); ++k) {
        CHECK(st.g(k, st.times[k - 1]) == doctest::Approx(1.0));
        CHECK(st.g(k, st.times[k]) == doctest::Approx(0.5));
        CHECK(st.times[k] - st.times[k - 1] >= 1.0);
        CHECK(std::exp(st.lambda_bar * (st.times[k] - st.times[k - 1]) / 3.0) >= 2.0 * (1.0 - 1e-12));
        CHECK(std::exp(-st.times[k]) <= 0.25 / std::pow(2.0, k + 1));
        const double x[] = {0.3, 0.1};
        double t = 0.5 * (st.times[k - 1] + st.times[k]);
        CHECK(st.residual_pi(k, x, t) == doctest::Approx(st.residual_closed_form(k, x, t)).epsilon(1e-9));
        // with an exact halving factor the closed form is zero, so the sign holds up to rounding
        CHECK(st.residual_pi(k, x, t) <= 1e-15 * std::max(1.0, std::abs(st.residual_closed_form(k, x, t))));
    }
}

TEST_CASE("the strong-minimum bump meets its residual bound and vanishes on its lateral face") {
    MinmBump b = make_minm_bump({0.0, 0.0}, 0.3, 0.15, 0.5, 1.0, 0.5);
    PropertyReport r = check_minm_bump(b, 1000, 11);
    CHECK(r.pass);
    CHECK(r.instances_run == 1000);
    for (double t : {0.16, 0.3, 0.34}) CHECK(b.value_at_radius(0.5, t) == 0.0);
}

TEST_CASE("the asymmetric barrier has constant infinity Laplacian") {
    Domain d = Domain::ball({0.0, 0.0}, 1.0);
    Asym01Barrier b = make_asym01_barrier(d, {0.2, 0.0}, 2.0, 1.5, 0.1);
    const double expected = -b.K * b.K * b.K / Asym01Barrier::sigma;
    for (double r : {0.1, 0.5, 0.9}) {
        const double s = 1e-4;
        double u1 = (b.value(r + s) - b.value(r - s)) / (2 * s);
        double u2 = (b.value(r + s) - 2 * b.value(r) + b.value(r - s)) / (s * s);
        CHECK(u1 * u1 * u2 == doctest::Approx(expected).epsilon(1e-5));
        CHECK(b.infinity_laplacian(r) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("the improvement bump needs mu > 0 and uses the documented delta") {
    std::vector<double> X = {2.0, 0.0, 0.0, 2.0};
    CHECK_THROWS_AS(make_exist13_bump({0.0, 0.0}, 0.5, 0.0, {1.0, 0.0}, {-1.0, 0.0, 0.0, -1.0}, 1.0, 0.01, 0.2),
                    ParameterError);
    Exist13Bump b = make_exist13_bump({0.0, 0.0}, 0.5, 0.0, {1.0, 0.0}, X, 1.0, 0.01, 0.2);
    CHECK(b.mu == doctest::Approx(2.0));
    CHECK(b.rho > 0.0);
    CHECK(exist13_delta(0.1, 0.25, 0.2) == doctest::Approx(0.25 * 0.25 * 0.2 / 32.0));
    CHECK(exist13_delta(1e-6, 0.25, 0.2) == 1e-6);
}

TEST_CASE("envelopes bracket the field and are idempotent") {
    Fixture f;
    std::mt19937_64 e(9);
    GridField noisy = sample_field(f.grid, [&](std::span<const double> x, double t) {
        return 1.0 + x[0] + t + 0.01 * static_cast<double>(e() >> 11) * 0x1.0p-53;
    });
    GridField up = usc_envelope(noisy), down = lsc_envelope(noisy);
    for (std::size_t i = 0; i < noisy.values.size(); ++i) {
        CHECK(up.values[i] >= noisy.values[i]);
        CHECK(down.values[i] <= noisy.values[i]);
    }
    CHECK(usc_envelope(up).values == up.values);
    CHECK(lsc_envelope(down).values == down.values);
}
