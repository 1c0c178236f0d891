#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ipp/geometry.hpp"
#include "ipp/gp.hpp"

namespace ipp {

using VertexId = int;

struct Edge {
    VertexId u = 0;
    VertexId v = 0;
    double length = 0.0;  // meters, >= Euclidean distance between endpoints
};

// Undirected survey graph with metric coordinates. Immutable after load.
class AreaGraph {
public:
    AreaGraph() = default;
    AreaGraph(std::map<VertexId, Point> vertices, std::vector<Edge> edges);

    const std::map<VertexId, Point>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_vertex(VertexId id) const { return vertices_.count(id) != 0; }
    const Point& point(VertexId id) const;

    // Neighbors sorted by id; each entry is (neighbor, edge length).
    const std::vector<std::pair<VertexId, double>>& neighbors(VertexId id) const;

    bool adjacent(VertexId u, VertexId v) const;
    // Length of edge (u,v); throws ValidationError when absent.
    double edge_length(VertexId u, VertexId v) const;

    double min_edge_length() const { return min_edge_length_; }

    // Vertex locations with exact coordinate duplicates removed, in id order.
    std::vector<Point> unique_vertex_points() const;

private:
    std::map<VertexId, Point> vertices_;
    std::vector<Edge> edges_;
    std::map<VertexId, std::vector<std::pair<VertexId, double>>> adjacency_;
    std::map<std::pair<VertexId, VertexId>, double> edge_length_;  // key: (min,max)
    double min_edge_length_ = 0.0;
};

// A walk: consecutive vertices must be joined by an edge; revisits allowed.
struct Path {
    std::vector<VertexId> vertex_ids;

    bool empty() const { return vertex_ids.empty(); }
    std::size_t size() const { return vertex_ids.size(); }

    friend bool operator==(const Path& a, const Path& b) {
        return a.vertex_ids == b.vertex_ids;
    }
};

// Parses the graph JSON document:
//   {"vertices":[{"id":int,"x":float,"y":float},...],
//    "edges":[{"u":int,"v":int,"length":float?},...]}
// Missing lengths default to the Euclidean distance.
AreaGraph load_graph(const std::string& json_text);
AreaGraph load_graph_file(const std::string& path);

// Sum of traversed edge lengths; revisited edges count every traversal.
double path_cost(const Path& p, const AreaGraph& g);

// Points at arc lengths 0, interval, 2*interval, ... <= path cost, linearly
// interpolated along the walk. Always floor(cost/interval) + 1 points; the
// terminal vertex is not force-sampled.
std::vector<Point> sample_along_path(const Path& p, const AreaGraph& g, double interval);

// Minimum-cost walk from u to v; among shortest paths returns the
// lexicographically smallest vertex-id sequence. Throws ValidationError
// when u and v are disconnected.
Path shortest_path(const AreaGraph& g, VertexId u, VertexId v);
double shortest_path_cost(const AreaGraph& g, VertexId u, VertexId v);

// Shortest-path distances from source to every reachable vertex.
std::map<VertexId, double> shortest_distances(const AreaGraph& g, VertexId source);

// Planner input. The graph is held by value; survey graphs are small.
struct PlanRequest {
    AreaGraph graph;
    VertexId start = 0;
    VertexId terminal = 0;
    double budget = 0.0;           // meters
    double sample_interval = 0.5;  // meters
    std::vector<Point> pilot_points;
    Hyperparameters hyper;
    uint64_t seed = 0;

    void validate() const;  // throws ValidationError
};

// Pilot CSV (header x,y,ap,rss): unique observation locations in file order.
std::vector<Point> load_pilot_points_csv(const std::string& path);

}  // namespace ipp
