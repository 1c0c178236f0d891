#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "ipp/errors.hpp"
#include "ipp/graph.hpp"

using namespace ipp;

namespace {

std::string grid_json(int nx, int ny, double spacing = 1.0) {
    std::string v = "[", e = "[";
    for (int r = 0; r < ny; ++r) {
        for (int c = 0; c < nx; ++c) {
            const int id = r * nx + c;
            if (id) v += ",";
            v += "{\"id\":" + std::to_string(id) + ",\"x\":" + std::to_string(c * spacing) +
                 ",\"y\":" + std::to_string(r * spacing) + "}";
            if (c + 1 < nx)
                e += (e.size() > 1 ? "," : std::string()) + "{\"u\":" + std::to_string(id) +
                     ",\"v\":" + std::to_string(id + 1) + "}";
            if (r + 1 < ny)
                e += (e.size() > 1 ? "," : std::string()) + "{\"u\":" + std::to_string(id) +
                     ",\"v\":" + std::to_string(id + nx) + "}";
        }
    }
    return "{\"vertices\":" + v + "],\"edges\":" + e + "]}";
}

AreaGraph unit_grid(int nx, int ny) { return load_graph(grid_json(nx, ny)); }

// Every simple path from the walk's tip to v, depth-first; small graphs only.
void enumerate_paths(const AreaGraph& g, VertexId v, std::vector<VertexId>& walk,
                     std::set<VertexId>& used, double cost, double limit,
                     std::vector<std::pair<double, std::vector<VertexId>>>& out) {
    if (walk.back() == v) out.push_back({cost, walk});
    for (const auto& [next, len] : g.neighbors(walk.back())) {
        if (used.count(next) || cost + len > limit + 1e-9) continue;
        used.insert(next);
        walk.push_back(next);
        enumerate_paths(g, v, walk, used, cost + len, limit, out);
        walk.pop_back();
        used.erase(next);
    }
}

}  // namespace

TEST_CASE("load_graph fills missing lengths with the Euclidean distance") {
    const auto g = load_graph(
        R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":3,"y":4}],"edges":[{"u":0,"v":1}]})");
    CHECK(g.edge_length(0, 1) == doctest::Approx(5.0));
    CHECK(g.edges().size() == 1);
}

TEST_CASE("load_graph rejects malformed documents") {
    CHECK_THROWS_AS(load_graph("not json"), ValidationError);
    CHECK_THROWS_AS(load_graph(R"({"edges":[]})"), ValidationError);
    CHECK_THROWS_AS(  // dangling endpoint
        load_graph(R"({"vertices":[{"id":0,"x":0,"y":0}],"edges":[{"u":0,"v":7}]})"),
        ValidationError);
    CHECK_THROWS_AS(  // non-positive length
        load_graph(
            R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],"edges":[{"u":0,"v":1,"length":0}]})"),
        ValidationError);
    CHECK_THROWS_AS(  // shorter than the straight line between the endpoints
        load_graph(
            R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":3,"y":4}],"edges":[{"u":0,"v":1,"length":2}]})"),
        ValidationError);
    CHECK_THROWS_AS(  // duplicate vertex id
        load_graph(R"({"vertices":[{"id":0,"x":0,"y":0},{"id":0,"x":1,"y":0}]})"),
        ValidationError);
}

TEST_CASE("load_graph on the 4x4 grid document") {
    const auto g = unit_grid(4, 4);
    CHECK(g.vertices().size() == 16);
    CHECK(g.edges().size() == 24);
    CHECK(g.adjacent(5, 6));
    CHECK_FALSE(g.adjacent(0, 5));
}

TEST_CASE("explicit lengths may exceed the Euclidean distance") {
    const auto g = load_graph(
        R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0}],"edges":[{"u":0,"v":1,"length":2.5}]})");
    CHECK(g.edge_length(0, 1) == doctest::Approx(2.5));
}

TEST_CASE("path_cost sums traversals, revisits included") {
    const auto g = load_graph(
        R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":2,"y":0}],"edges":[{"u":0,"v":1}]})");
    CHECK(path_cost(Path{{0, 1}}, g) == doctest::Approx(2.0));
    CHECK(path_cost(Path{{0, 1, 0}}, g) == doctest::Approx(4.0));

    const auto grid = unit_grid(2, 2);
    CHECK(path_cost(Path{{0, 1, 3}}, grid) == doctest::Approx(2.0));  // L-shaped walk
    CHECK_THROWS_AS(path_cost(Path{{0, 3}}, grid), ValidationError);  // not an edge
}

TEST_CASE("path_cost is reversal invariant") {
    const auto g = unit_grid(3, 3);
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        Path p{{static_cast<VertexId>(rng() % 9)}};
        for (int step = 0; step < 6; ++step) {
            const auto& nbrs = g.neighbors(p.vertex_ids.back());
            p.vertex_ids.push_back(nbrs[rng() % nbrs.size()].first);
        }
        Path r = p;
        std::reverse(r.vertex_ids.begin(), r.vertex_ids.end());
        CHECK(path_cost(p, g) == doctest::Approx(path_cost(r, g)).epsilon(1e-12));
    }
}

TEST_CASE("sample_along_path spacing and counts") {
    SUBCASE("cost 2.0 at 0.5 gives five points") {
        const auto g = unit_grid(3, 1);
        const auto pts = sample_along_path(Path{{0, 1, 2}}, g, 0.5);
        REQUIRE(pts.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(pts[i].x == doctest::Approx(0.5 * static_cast<double>(i)));
            CHECK(pts[i].y == doctest::Approx(0.0));
        }
    }
    SUBCASE("cost 1.9 at 0.5 gives four points, no terminal sample") {
        const auto g = load_graph(
            R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":1,"y":0.9}],
                "edges":[{"u":0,"v":1},{"u":1,"v":2}]})");
        const auto pts = sample_along_path(Path{{0, 1, 2}}, g, 0.5);
        REQUIRE(pts.size() == 4);
        CHECK(pts[3].x == doctest::Approx(1.0));
        CHECK(pts[3].y == doctest::Approx(0.5));
    }
    SUBCASE("corner walk interpolates around the bend") {
        const auto g = unit_grid(2, 2);
        const auto pts = sample_along_path(Path{{0, 1, 3}}, g, 0.5);
        REQUIRE(pts.size() == 5);
        CHECK(pts[1].x == doctest::Approx(0.5));
        CHECK(pts[1].y == doctest::Approx(0.0));
        CHECK(pts[3].x == doctest::Approx(1.0));
        CHECK(pts[3].y == doctest::Approx(0.5));
        CHECK(pts[4].x == doctest::Approx(1.0));
        CHECK(pts[4].y == doctest::Approx(1.0));
    }
    SUBCASE("single-vertex path samples its location once") {
        const auto g = unit_grid(2, 2);
        const auto pts = sample_along_path(Path{{3}}, g, 0.5);
        REQUIRE(pts.size() == 1);
        CHECK(pts[0].x == doctest::Approx(1.0));
    }
}

TEST_CASE("sample_along_path count and on-segment properties") {
    const auto g = unit_grid(4, 4);
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        Path p{{static_cast<VertexId>(rng() % 16)}};
        for (int step = 0; step < 1 + int(rng() % 8); ++step) {
            const auto& nbrs = g.neighbors(p.vertex_ids.back());
            p.vertex_ids.push_back(nbrs[rng() % nbrs.size()].first);
        }
        const double interval = 0.3 + 0.4 * static_cast<double>(rng() % 10) / 10.0;
        const auto pts = sample_along_path(p, g, interval);
        const double cost = path_cost(p, g);
        CHECK(pts.size() == static_cast<std::size_t>(std::floor(cost / interval + 1e-12)) + 1);

        for (const Point& pt : pts) {
            double best = 1e9;
            for (std::size_t i = 0; i + 1 < p.vertex_ids.size(); ++i)
                best = std::min(best, point_segment_distance(pt, g.point(p.vertex_ids[i]),
                                                             g.point(p.vertex_ids[i + 1])));
            if (p.vertex_ids.size() == 1) best = distance(pt, g.point(p.vertex_ids[0]));
            CHECK(best < 1e-9);
        }
    }
}

TEST_CASE("shortest_path base cases") {
    const auto g = load_graph(
        R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":2,"y":0}],
            "edges":[{"u":0,"v":1},{"u":1,"v":2}]})");
    CHECK(shortest_path(g, 1, 1) == Path{{1}});
    CHECK(shortest_path_cost(g, 1, 1) == 0.0);
    CHECK(shortest_path(g, 0, 2) == Path{{0, 1, 2}});
    CHECK(shortest_path_cost(g, 0, 2) == doctest::Approx(2.0));
}

TEST_CASE("shortest_path picks the lexicographically smallest optimum") {
    const auto g = unit_grid(4, 4);
    const Path p = shortest_path(g, 0, 15);
    CHECK(path_cost(p, g) == doctest::Approx(6.0));

    // Brute-force oracle over all simple corner-to-corner paths.
    std::vector<std::pair<double, std::vector<VertexId>>> all;
    std::vector<VertexId> walk{0};
    std::set<VertexId> used{0};
    enumerate_paths(g, 15, walk, used, 0.0, 6.0, all);
    REQUIRE(!all.empty());
    double best = 1e18;
    for (const auto& [c, seq] : all) best = std::min(best, c);
    std::vector<VertexId> smallest;
    for (const auto& [c, seq] : all)
        if (c <= best + 1e-9 && (smallest.empty() || seq < smallest)) smallest = seq;
    CHECK(best == doctest::Approx(6.0));
    CHECK(p.vertex_ids == smallest);
    CHECK(p.vertex_ids == std::vector<VertexId>{0, 1, 2, 3, 7, 11, 15});
}

TEST_CASE("shortest_path on random pairs never loses to enumeration") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = unit_grid(3, 3);
        const auto u = static_cast<VertexId>(rng() % 9);
        const auto v = static_cast<VertexId>(rng() % 9);
        std::vector<std::pair<double, std::vector<VertexId>>> all;
        std::vector<VertexId> walk{u};
        std::set<VertexId> used{u};
        enumerate_paths(g, v, walk, used, 0.0, 8.0, all);
        double best = 1e18;
        for (const auto& [c, seq] : all) best = std::min(best, c);
        CHECK(shortest_path_cost(g, u, v) <= best + 1e-9);
    }
}

TEST_CASE("disconnected vertices are reported") {
    const auto g = load_graph(
        R"({"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":5,"y":5}],
            "edges":[{"u":0,"v":1}]})");
    CHECK_THROWS_AS(shortest_path(g, 0, 2), ValidationError);
    CHECK_THROWS_AS(shortest_path_cost(g, 0, 2), ValidationError);
}

TEST_CASE("PlanRequest validation") {
    PlanRequest req;
    req.graph = unit_grid(3, 3);
    req.start = 0;
    req.terminal = 8;
    req.budget = 4.0;
    req.hyper.sigma_f = 1.0;
    req.hyper.length_scale = 1.0;
    CHECK_NOTHROW(req.validate());

    SUBCASE("budget below the shortest path") {
        req.budget = 3.0;
        CHECK_THROWS_AS(req.validate(), ValidationError);
    }
    SUBCASE("unknown endpoint") {
        req.terminal = 77;
        CHECK_THROWS_AS(req.validate(), ValidationError);
    }
    SUBCASE("bad sample interval") {
        req.sample_interval = 0.0;
        CHECK_THROWS_AS(req.validate(), ValidationError);
    }
}

TEST_CASE("pilot CSV loading keeps unique locations in file order") {
    const std::string path = "/tmp/ipp_test_pilot.csv";
    {
        std::ofstream out(path);
        out << "x,y,ap,rss\n1.0,2.0,ap_a,-50\n3.0,4.0,ap_a,-60\n1.0,2.0,ap_b,-55\n";
    }
    const auto pts = load_pilot_points_csv(path);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].x == doctest::Approx(1.0));
    CHECK(pts[1].x == doctest::Approx(3.0));
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_pilot_points_csv("/nonexistent/pilot.csv"), ValidationError);
}
