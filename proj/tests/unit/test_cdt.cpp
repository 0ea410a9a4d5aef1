#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cdtref/cdt.hpp"
#include "cdtref/verify.hpp"

using namespace cdtref;

TEST_CASE("build_delaunay minimal cases") {
    SECTION("three points make one triangle") {
        Mesh m = build_delaunay({{0, 0}, {1, 0}, {0, 1}});
        CHECK(m.alive_triangle_count() == 1);
        m.check_structure();
    }
    SECTION("unit square gives two triangles, deterministic diagonal") {
        Mesh m1 = build_delaunay({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
        Mesh m2 = build_delaunay({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
        CHECK(m1.alive_triangle_count() == 2);
        m1.check_structure();
        CHECK(m1.euler_holds());
        // Cocircular tie broken the same way across runs.
        TriId t1, t2;
        int e1, e2;
        const bool d1 = detail::find_edge(m1, 0, 2, t1, e1);
        const bool d2 = detail::find_edge(m2, 0, 2, t2, e2);
        CHECK(d1 == d2);
    }
    SECTION("collinear input is rejected") {
        CHECK_THROWS_AS(build_delaunay({{0, 0}, {1, 1}, {2, 2}, {3, 3}}), CdtError);
    }
    SECTION("fewer than three points rejected") {
        CHECK_THROWS_AS(build_delaunay({{0, 0}, {1, 0}}), CdtError);
    }
}

TEST_CASE("build_delaunay random points pass brute-force circumcircle oracle") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> coord(0.0, 10.0);
    std::vector<Point2> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back({coord(rng), coord(rng)});
    Mesh m = build_delaunay(pts);
    m.check_structure();
    CHECK(m.euler_holds());
    CHECK(m.alive_vertex_count() == 1000);
    CHECK(delaunay_violations(m) == 0);
}

TEST_CASE("build_delaunay handles structured degeneracies") {
    SECTION("grid with many cocircular quadruples") {
        std::vector<Point2> pts;
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) pts.push_back({double(x), double(y)});
        Mesh m = build_delaunay(pts);
        m.check_structure();
        CHECK(m.euler_holds());
        CHECK(m.alive_vertex_count() == 64);
        CHECK(delaunay_violations(m) == 0);
    }
    SECTION("points on a hull edge's supporting line") {
        Mesh m = build_delaunay({{0, 0}, {1, 0}, {0.5, 1}, {2, 0}, {3, 0}, {-1, 0}});
        m.check_structure();
        CHECK(m.euler_holds());
        CHECK(delaunay_violations(m) == 0);
    }
    SECTION("collinear prefix before the first off-line point") {
        Mesh m = build_delaunay({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {1.5, 2}, {0.5, 0.25}});
        m.check_structure();
        CHECK(delaunay_violations(m) == 0);
    }
}

TEST_CASE("recover_segments flags an existing Delaunay edge") {
    Pslg g;
    g.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    g.segments = {{0, 1}};
    Mesh m = build_cdt(g);
    m.check_structure();
    CHECK(conformity_ok(m, g));
    CHECK(m.alive_subsegment_count() == 1);
}

TEST_CASE("recover_segments forces a crossing diagonal") {
    // The square's Delaunay diagonal ties; whichever was chosen, requesting
    // the other one forces flips.
    for (std::uint32_t diag_a : {0u, 1u}) {
        Pslg g;
        g.points = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        g.segments = {{diag_a, static_cast<std::uint32_t>(diag_a + 2)}};
        Mesh m = build_cdt(g);
        m.check_structure();
        CHECK(conformity_ok(m, g));
        TriId t;
        int e;
        CHECK(detail::find_edge(m, diag_a, diag_a + 2, t, e));
        CHECK(m.triangles[t].seg[e] != kNone);
    }
}

TEST_CASE("recover_segments across many crossed edges") {
    // A row of points above and below a long segment, so the segment crosses
    // many Delaunay edges.
    Pslg g;
    g.points.push_back({-1, 0});
    g.points.push_back({21, 0});
    for (int i = 0; i < 20; ++i) {
        g.points.push_back({double(i), 0.7});
        g.points.push_back({double(i) + 0.3, -0.6});
    }
    g.segments = {{0, 1}};
    Mesh m = build_cdt(g);
    m.check_structure();
    CHECK(conformity_ok(m, g));
    CHECK(constrained_delaunay_violations(m) == 0);
    // The long edge should block visibility for some circumcircles; the
    // unconstrained oracle would report violations.
    CHECK(delaunay_violations(m) > 0);
}

TEST_CASE("recover_segments splits chains at collinear vertices") {
    Pslg g;
    g.points = {{0, 0}, {4, 0}, {2, 0}, {1, 2}, {3, 2}, {1, -2}, {3, -2}};
    g.segments = {{0, 1}};   // vertex 2 lies exactly on this segment
    Mesh m = build_cdt(g);
    m.check_structure();
    CHECK(conformity_ok(m, g));
    CHECK(m.alive_subsegment_count() == 2);
}

TEST_CASE("constrained oracle respects visibility blocking") {
    // Non-convex PSLG: a segment wall with a point hidden behind it.
    Pslg g;
    g.points = {{0, 0}, {4, 0}, {2, 3}, {2, 0.5}, {2, -2}};
    g.segments = {{0, 1}};
    Mesh m = build_cdt(g);
    m.check_structure();
    CHECK(conformity_ok(m, g));
    CHECK(constrained_delaunay_violations(m) == 0);
}

TEST_CASE("locate_point walks and classifications") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(0.0, 4.0);
    std::vector<Point2> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({coord(rng), coord(rng)});
    Mesh m = build_delaunay(pts);

    SECTION("interior points are found from any start") {
        for (int trial = 0; trial < 50; ++trial) {
            const Point2 q{coord(rng) * 0.5 + 1.0, coord(rng) * 0.5 + 1.0};
            const Location loc = locate_point(m, 0, q);
            REQUIRE((loc.kind == Location::Kind::Inside || loc.kind == Location::Kind::OnEdge ||
                     loc.kind == Location::Kind::OnVertex));
            if (loc.kind == Location::Kind::Inside) {
                for (int e = 0; e < 3; ++e) {
                    const auto [x, y] = m.edge_vertices(loc.tri, e);
                    CHECK(orient2d(m.pos(x), m.pos(y), q) == Orientation::Positive);
                }
            }
        }
    }
    SECTION("existing vertices are classified OnVertex") {
        const Location loc = locate_point(m, 0, pts[17]);
        CHECK(loc.kind == Location::Kind::OnVertex);
        CHECK(loc.vert == 17);
    }
    SECTION("far outside points escape the hull") {
        const Location loc = locate_point(m, 0, {100, 100});
        CHECK(loc.kind == Location::Kind::OutsideHull);
    }
}

TEST_CASE("locate_point intercepts subsegments on the path") {
    // Wall between left start region and right target point.
    Pslg g;
    g.points = {{0, 0}, {10, 0}, {10, 5}, {0, 5}, {5, -1}, {5, 6}, {2, 2.5}, {8, 2.5}};
    g.segments = {{4, 5}};
    Mesh m = build_cdt(g);
    const Location start = locate_point(m, 0, {1.9, 2.4});
    REQUIRE(start.kind == Location::Kind::Inside);
    const Location loc = locate_point(m, start.tri, {8, 2.4}, true);
    CHECK(loc.kind == Location::Kind::Intercepted);
    REQUIRE(loc.seg != kNone);
    // The intercepted subsegment belongs to the wall.
    CHECK(m.subsegments[loc.seg].parent == 0);
}
