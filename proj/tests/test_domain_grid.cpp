#include <cmath>
#include <sstream>

#include "doctest.h"
#include "iplab/domain_grid.hpp"
#include "iplab/errors.hpp"
#include "oracles.hpp"

using namespace iplab;

TEST_CASE("interior and closure counts match a brute-force lattice scan") {
    const Domain domains[] = {Domain::ball({0.0, 0.0}, 1.0), Domain::box({0.0, 0.0}, {1.0, 1.0}),
                              Domain::box({-1.0, 0.0}, {1.0, 0.5}), Domain::interval(0.0, 2.0),
                              Domain::ball({0.5, -0.5, 0.0}, 1.0)};
    for (const auto& d : domains)
        for (double h : {0.1, 0.05}) {
            if (d.dim == 3 && h < 0.1) continue;
            CylinderGrid g = build_grid(d, h, 1.0, 2);
            oracle::MaskCount m = oracle::brute_force_mask(d, h);
            CHECK(g.node_count() == m.closure);
            CHECK(static_cast<int>(g.interior.size()) == m.interior);
            CHECK(g.interior.size() + g.lateral.size() == static_cast<std::size_t>(g.node_count()));
        }
}

TEST_CASE("a unit square with h = 0.5 has one interior node once the size floor is lowered") {
    Domain d = Domain::box({0.0, 0.0}, {1.0, 1.0});
    CHECK_THROWS_AS(build_grid(d, 0.5, 1.0, 4), ConfigurationError);
    GridOptions opt;
    opt.min_interior_per_axis = 1;
    CylinderGrid g = build_grid(d, 0.5, 1.0, 4, opt);
    CHECK(g.node_count() == 9);
    REQUIRE(g.interior.size() == 1);
    auto x = g.x(g.interior[0]);
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(0.5));
}

TEST_CASE("time levels stop short of T and the parabolic boundary lists each entry once") {
    CylinderGrid g = build_grid(Domain::ball({0.0, 0.0}, 1.0), 0.1, 0.5, 10);
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(9) == doctest::Approx(0.45));
    auto pb = g.parabolic_boundary();
    CHECK(pb.size() == static_cast<std::size_t>(g.node_count()) + g.lateral.size() * 9);
    int initial = 0;
    for (const auto& e : pb) {
        if (e.initial) {
            CHECK(e.level == 0);
            ++initial;
        } else {
            CHECK(e.level > 0);
            CHECK(g.roles[e.node] == NodeRole::lateral);
        }
    }
    CHECK(initial == g.node_count());
}

TEST_CASE("bad geometry is rejected") {
    Domain d = Domain::ball({0.0, 0.0}, 1.0);
    CHECK_THROWS_AS(build_grid(d, -0.1, 1.0, 4), ConfigurationError);
    CHECK_THROWS_AS(build_grid(d, 0.1, 0.0, 4), ConfigurationError);
    CHECK_THROWS_AS(build_grid(d, 0.6, 1.0, 4), ConfigurationError);
}

TEST_CASE("domains round-trip through JSON") {
    for (const auto& d : {Domain::ball({0.25, -1.0}, 2.0), Domain::box({0.0, 1.0}, {2.0, 3.0}), Domain::interval(-1.0, 1.0)}) {
        Domain back = Domain::from_json(d.to_json());
        CHECK(back.to_json() == d.to_json());
    }
    CHECK_THROWS_AS(Domain::from_json({{"kind", "torus"}}), ConfigurationError);
}

TEST_CASE("exported floats reload bit for bit") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("field CSV has one row per node and level") {
    auto g = std::make_shared<const CylinderGrid>(build_grid(Domain::interval(0.0, 1.0), 0.25, 1.0, 3));
    GridField f(g, 1.5);
    std::ostringstream os;
    f.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "level,t,node,x0,role,value");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == g->node_count() * g->levels);
}

TEST_CASE("boundary data must be positive and continuous at corners") {
    auto g = build_grid(Domain::ball({0.0, 0.0}, 1.0), 0.2, 1.0, 4);
    BoundaryData neg;
    neg.initial = [](std::span<const double>) { return -1.0; };
    neg.lateral = [](std::span<const double>, double) { return -1.0; };
    CHECK_THROWS_AS(validate_boundary_data(g, neg, true), DataError);

    BoundaryData jump;
    jump.initial = [](std::span<const double>) { return 1.0; };
    jump.lateral = [](std::span<const double>, double) { return 2.0; };
    CHECK_THROWS_AS(validate_boundary_data(g, jump, true), DataError);
    jump.allow_corner_jump = true;
    CHECK_NOTHROW(validate_boundary_data(g, jump, true));

    DataBounds b = data_bounds(g, jump);
    CHECK(b.inf == 1.0);
    CHECK(b.sup == 2.0);
}
