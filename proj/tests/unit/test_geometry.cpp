#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homoglab/errors.hpp"
#include "homoglab/geometry.hpp"

using namespace homoglab;

TEST_CASE("grid indexing round-trips") {
    Grid g(5);
    CHECK(g.h() == doctest::Approx(0.2));
    for (int c = 0; c < g.size(); ++c) CHECK(g.index(g.row(c), g.col(c)) == c);
    const Point p = g.center(g.index(1, 3));
    CHECK(p.x1 == doctest::Approx(0.7));
    CHECK(p.x2 == doctest::Approx(0.3));
    CHECK_THROWS_AS(Grid(0), InvalidSpec);
}

TEST_CASE("ball hole partition: regions, counts and fraction") {
    PartitionSpec s;
    s.config = Configuration::LocalInHoles;
    s.n = 4;
    s.hole = BallHole{0.5};
    s.resolution = 8;
    const Partition p = build_partition(s);
    CHECK(p.grid.m() == 16);
    CHECK(p.hole_count == 4);
    CHECK(p.n_a() + p.n_b() == p.grid.size());
    CHECK(p.volume_a + p.volume_b == doctest::Approx(1.0));
    CHECK(p.x_fraction == doctest::Approx(p.volume_a));
    // Every hole cell is in A for LocalInHoles, and every A cell is in a hole.
    for (int c = 0; c < p.grid.size(); ++c) CHECK((p.hole_index_of_cell[c] >= 0) == p.in_a(c));
    // Holes are translates of each other.
    const auto holes = p.hole_cells();
    for (const auto& h : holes) CHECK(h.size() == holes.front().size());
    for (int c = 0; c < p.grid.size(); ++c) {
        const int gd = p.global_dof(c);
        CHECK((p.in_a(c) ? p.a_cells[gd] : p.b_cells[gd - p.n_a()]) == c);
    }
}

TEST_CASE("holes-in-B partition is the complement") {
    PartitionSpec s;
    s.n = 2;
    s.resolution = 16;
    s.config = Configuration::LocalInHoles;
    const Partition a = build_partition(s);
    s.config = Configuration::NonlocalInHoles;
    const Partition b = build_partition(s);
    for (int c = 0; c < a.grid.size(); ++c) CHECK(a.in_a(c) != b.in_a(c));
    CHECK(a.x_fraction + b.x_fraction == doctest::Approx(1.0));
}

TEST_CASE("rasterized disk area approaches pi C^2 / 4") {
    const double exact = std::numbers::pi * 0.25 / 4.0;
    PartitionSpec s;
    s.hole = BallHole{0.5};
    CHECK(limit_fractions(s).x == doctest::Approx(exact).epsilon(1e-12));
    s.config = Configuration::NonlocalInHoles;
    CHECK(limit_fractions(s).x == doctest::Approx(1.0 - exact).epsilon(1e-12));

    // Independent lattice-point count of the radius q/4 disk in cell units.
    const auto count = [](int q) {
        int c = 0;
        for (int b = 0; b < q; ++b) {
            for (int a = 0; a < q; ++a) {
                const double y1 = a + 0.5 - q / 2.0, y2 = b + 0.5 - q / 2.0;
                c += y1 * y1 + y2 * y2 < q * q / 16.0;
            }
        }
        return c;
    };
    CHECK(count(16) == 52);
    double previous = 1.0;
    for (int q : {8, 16, 32, 64, 128}) {
        s.config = Configuration::LocalInHoles;
        s.n = 8;
        s.resolution = q;
        const Partition p = build_partition(s);
        CAPTURE(q);
        CHECK(p.x_fraction == doctest::Approx(count(q) / double(q * q)).epsilon(1e-14));
        const double err = std::abs(p.x_fraction - exact) / exact;
        // Center sampling is not monotone in q: q = 16 and 32 give the same count ratio.
        CHECK(err <= previous);
        previous = err;
    }
    CHECK(previous <= 0.005);
    CHECK(std::abs(count(64) / 4096.0 - exact) <= 0.01 * exact);
}

TEST_CASE("degenerate holes are rejected") {
    PartitionSpec s;
    s.hole = BallHole{0.05};
    s.resolution = 2;
    CHECK_THROWS_WITH_AS(build_partition(s), doctest::Contains("empty hole"), InvalidSpec);
    s.resolution = 8;
    s.n = 3;
    CHECK_THROWS_AS(build_partition(s), InvalidSpec);
    s.n = 2;
    s.hole = BallHole{1.5};
    CHECK_THROWS_AS(build_partition(s), InvalidSpec);
    s.hole = RectHole{1.0, 0.5};
    CHECK_THROWS_AS(build_partition(s), InvalidSpec);
}

TEST_CASE("strip partitions") {
    SUBCASE("n = 2 puts the upper half in A") {
        const Partition p = build_partition(strip_spec_for_grid(2, 8));
        for (int c = 0; c < p.grid.size(); ++c) CHECK(p.in_a(c) == (p.grid.center(c).x2 >= 0.5));
    }
    for (int n : {2, 3, 4, 5}) {
        const Partition p = build_partition(strip_spec_for_grid(n, 64));
        CHECK(p.x_fraction == 0.5);
        CHECK(p.n_a() == p.n_b());
        // A is a union of full rows.
        for (int c = 0; c < p.grid.size(); ++c) CHECK(p.in_a(c) == p.in_a(p.grid.index(p.grid.row(c), 0)));
    }
    PartitionSpec s;
    s.config = Configuration::Strips;
    CHECK(limit_fractions(s).x == 0.5);
    CHECK_THROWS_AS(strip_spec_for_grid(4, 12), InvalidSpec);
}
