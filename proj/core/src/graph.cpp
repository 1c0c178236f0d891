#include "ipp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ipp/errors.hpp"

namespace ipp {

namespace {

std::pair<VertexId, VertexId> edge_key(VertexId u, VertexId v) {
    return {std::min(u, v), std::max(u, v)};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

AreaGraph::AreaGraph(std::map<VertexId, Point> vertices, std::vector<Edge> edges)
    : vertices_(std::move(vertices)), edges_(std::move(edges)) {
    if (vertices_.empty()) throw ValidationError("graph must contain at least one vertex");
    for (const auto& [id, p] : vertices_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ValidationError("vertex " + std::to_string(id) + " has non-finite coordinates");
        adjacency_[id];  // isolated vertices still get an (empty) row
    }
    min_edge_length_ = std::numeric_limits<double>::infinity();
    for (const Edge& e : edges_) {
        if (!has_vertex(e.u) || !has_vertex(e.v))
            throw ValidationError("edge references unknown vertex id");
        if (e.u == e.v) throw ValidationError("self-loop edges are not allowed");
        if (!(e.length > 0.0) || !std::isfinite(e.length))
            throw ValidationError("edge length must be positive");
        const double euclid = distance(point(e.u), point(e.v));
        if (e.length < euclid - 1e-9)
            throw ValidationError("edge length shorter than the Euclidean distance");
        const auto key = edge_key(e.u, e.v);
        if (edge_length_.count(key)) throw ValidationError("duplicate edge");
        edge_length_[key] = e.length;
        adjacency_[e.u].emplace_back(e.v, e.length);
        adjacency_[e.v].emplace_back(e.u, e.length);
        min_edge_length_ = std::min(min_edge_length_, e.length);
    }
    for (auto& [id, nbrs] : adjacency_) std::sort(nbrs.begin(), nbrs.end());
    if (edges_.empty()) min_edge_length_ = 0.0;
}

const Point& AreaGraph::point(VertexId id) const {
    auto it = vertices_.find(id);
    if (it == vertices_.end())
        throw ValidationError("unknown vertex id " + std::to_string(id));
    return it->second;
}

const std::vector<std::pair<VertexId, double>>& AreaGraph::neighbors(VertexId id) const {
    auto it = adjacency_.find(id);
    if (it == adjacency_.end())
        throw ValidationError("unknown vertex id " + std::to_string(id));
    return it->second;
}

bool AreaGraph::adjacent(VertexId u, VertexId v) const {
    return edge_length_.count(edge_key(u, v)) != 0;
}

double AreaGraph::edge_length(VertexId u, VertexId v) const {
    auto it = edge_length_.find(edge_key(u, v));
    if (it == edge_length_.end())
        throw ValidationError("no edge between " + std::to_string(u) + " and " +
                              std::to_string(v));
    return it->second;
}

std::vector<Point> AreaGraph::unique_vertex_points() const {
    std::vector<Point> out;
    std::set<std::pair<double, double>> seen;
    for (const auto& [id, p] : vertices_)
        if (seen.insert({p.x, p.y}).second) out.push_back(p);
    return out;
}

AreaGraph load_graph(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("graph JSON parse error: ") + e.what());
    }

    std::map<VertexId, Point> vertices;
    std::vector<Edge> edges;
    try {
        if (!j.contains("vertices") || !j["vertices"].is_array())
            throw ValidationError("graph JSON: missing \"vertices\" array");
        for (const auto& v : j["vertices"]) {
            const VertexId id = v.at("id").get<VertexId>();
            if (vertices.count(id))
                throw ValidationError("graph JSON: duplicate vertex id " + std::to_string(id));
            vertices[id] = Point{v.at("x").get<double>(), v.at("y").get<double>()};
        }
        if (j.contains("edges")) {
            if (!j["edges"].is_array()) throw ValidationError("graph JSON: \"edges\" not an array");
            for (const auto& e : j["edges"]) {
                Edge edge;
                edge.u = e.at("u").get<VertexId>();
                edge.v = e.at("v").get<VertexId>();
                if (e.contains("length")) {
                    edge.length = e["length"].get<double>();
                } else {
                    if (!vertices.count(edge.u) || !vertices.count(edge.v))
                        throw ValidationError("graph JSON: edge references unknown vertex id");
                    edge.length = distance(vertices[edge.u], vertices[edge.v]);
                }
                edges.push_back(edge);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("graph JSON schema violation: ") + e.what());
    }
    return AreaGraph(std::move(vertices), std::move(edges));
}

AreaGraph load_graph_file(const std::string& path) { return load_graph(read_file(path)); }

double path_cost(const Path& p, const AreaGraph& g) {
    if (p.empty()) throw ValidationError("path_cost: empty path");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < p.vertex_ids.size(); ++i)
        total += g.edge_length(p.vertex_ids[i], p.vertex_ids[i + 1]);
    return total;
}

std::vector<Point> sample_along_path(const Path& p, const AreaGraph& g, double interval) {
    if (!(interval > 0.0)) throw ValidationError("sample interval must be positive");
    if (p.empty()) throw ValidationError("sample_along_path: empty path");

    const double total = path_cost(p, g);
    std::vector<Point> samples;
    samples.reserve(static_cast<std::size_t>(total / interval) + 1);

    std::size_t leg = 0;          // index of the current leg (p[leg] -> p[leg+1])
    double leg_start_arc = 0.0;   // arc length at p[leg]
    const auto n_samples = static_cast<std::size_t>(std::floor(total / interval + 1e-12)) + 1;
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double target = static_cast<double>(k) * interval;
        while (leg + 1 < p.vertex_ids.size()) {
            const double len = g.edge_length(p.vertex_ids[leg], p.vertex_ids[leg + 1]);
            if (leg_start_arc + len >= target - 1e-12) break;
            leg_start_arc += len;
            ++leg;
        }
        if (leg + 1 >= p.vertex_ids.size()) {
            samples.push_back(g.point(p.vertex_ids.back()));
            continue;
        }
        const Point& a = g.point(p.vertex_ids[leg]);
        const Point& b = g.point(p.vertex_ids[leg + 1]);
        const double len = g.edge_length(p.vertex_ids[leg], p.vertex_ids[leg + 1]);
        const double t = std::clamp((target - leg_start_arc) / len, 0.0, 1.0);
        samples.push_back(Point{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return samples;
}

std::map<VertexId, double> shortest_distances(const AreaGraph& g, VertexId source) {
    if (!g.has_vertex(source)) throw ValidationError("unknown source vertex");
    std::map<VertexId, double> dist;
    using Entry = std::pair<double, VertexId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        auto it = dist.find(u);
        if (it != dist.end() && it->second <= d) continue;
        dist[u] = d;
        for (const auto& [v, len] : g.neighbors(u)) {
            auto jt = dist.find(v);
            if (jt == dist.end() || d + len < jt->second) heap.push({d + len, v});
        }
    }
    return dist;
}

Path shortest_path(const AreaGraph& g, VertexId u, VertexId v) {
    if (!g.has_vertex(u) || !g.has_vertex(v)) throw ValidationError("unknown endpoint vertex");
    if (u == v) return Path{{u}};

    // Distances to the target, then a greedy descent choosing the smallest
    // next id that stays on some shortest path: this realizes the
    // lexicographically smallest shortest vertex sequence.
    const auto dist_to_target = shortest_distances(g, v);
    if (!dist_to_target.count(u))
        throw ValidationError("vertices " + std::to_string(u) + " and " + std::to_string(v) +
                              " are disconnected");

    Path p{{u}};
    VertexId cur = u;
    while (cur != v) {
        const double remaining = dist_to_target.at(cur);
        VertexId next = -1;
        for (const auto& [w, len] : g.neighbors(cur)) {  // neighbors sorted by id
            auto it = dist_to_target.find(w);
            if (it == dist_to_target.end()) continue;
            if (std::abs(len + it->second - remaining) <= 1e-9) {
                next = w;
                break;
            }
        }
        if (next < 0) throw NumericalError("shortest_path: descent failed (inconsistent weights)");
        p.vertex_ids.push_back(next);
        cur = next;
    }
    return p;
}

double shortest_path_cost(const AreaGraph& g, VertexId u, VertexId v) {
    if (!g.has_vertex(u) || !g.has_vertex(v)) throw ValidationError("unknown endpoint vertex");
    if (u == v) return 0.0;
    const auto dist = shortest_distances(g, u);
    auto it = dist.find(v);
    if (it == dist.end()) throw ValidationError("vertices are disconnected");
    return it->second;
}

void PlanRequest::validate() const {
    hyper.validate();
    if (!graph.has_vertex(start) || !graph.has_vertex(terminal))
        throw ValidationError("start or terminal vertex not in graph");
    if (!(sample_interval > 0.0)) throw ValidationError("sample_interval must be positive");
    if (!std::isfinite(budget)) throw ValidationError("budget must be finite");
    const double sp = shortest_path_cost(graph, start, terminal);
    if (budget < sp - 1e-9)
        throw ValidationError("budget below the shortest-path cost between the endpoints");
    for (const Point& p : pilot_points)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw ValidationError("pilot point with non-finite coordinates");
}

std::vector<Point> load_pilot_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open pilot CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("pilot CSV is empty");

    std::vector<Point> points;
    std::set<std::pair<double, double>> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string xs, ys;
        if (!std::getline(ss, xs, ',') || !std::getline(ss, ys, ','))
            throw ValidationError("pilot CSV: bad row at line " + std::to_string(line_no));
        try {
            Point p{std::stod(xs), std::stod(ys)};
            if (seen.insert({p.x, p.y}).second) points.push_back(p);
        } catch (const std::exception&) {
            throw ValidationError("pilot CSV: bad number at line " + std::to_string(line_no));
        }
    }
    return points;
}

}  // namespace ipp
