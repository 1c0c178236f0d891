#include <algorithm>
#include <chrono>
#include <set>

#include "ipp/errors.hpp"
#include "ipp/planners.hpp"
#include "rand_util.hpp"

namespace ipp {

namespace {

using detail::rand_index;
using detail::uniform01;

// Subdivides every edge with a midpoint vertex so an edge can be "visited"
// by routing through its edge node.
struct EdgeNodeGraph {
    AreaGraph graph;
    std::vector<VertexId> mid_ids;              // per original edge index
    std::map<VertexId, std::size_t> mid_to_edge;
};

EdgeNodeGraph build_edge_node_graph(const AreaGraph& g) {
    VertexId next_id = g.vertices().rbegin()->first + 1;
    std::map<VertexId, Point> vertices = g.vertices();
    std::vector<Edge> edges;
    EdgeNodeGraph out;
    for (std::size_t i = 0; i < g.edges().size(); ++i) {
        const Edge& e = g.edges()[i];
        const Point a = g.point(e.u), b = g.point(e.v);
        const VertexId m = next_id++;
        vertices[m] = Point{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
        edges.push_back({e.u, m, 0.5 * e.length});
        edges.push_back({m, e.v, 0.5 * e.length});
        out.mid_ids.push_back(m);
        out.mid_to_edge[m] = i;
    }
    out.graph = AreaGraph(std::move(vertices), std::move(edges));
    return out;
}

// Projects a walk on the subdivided graph back onto the original graph.
// A spur u -> mid -> u becomes the full out-and-back u -> v -> u.
Path map_back(const Path& aug, const EdgeNodeGraph& eng, const AreaGraph& g) {
    Path out;
    for (VertexId id : aug.vertex_ids) {
        auto mid = eng.mid_to_edge.find(id);
        if (mid == eng.mid_to_edge.end()) {
            if (!out.vertex_ids.empty() && out.vertex_ids.back() == id) continue;
            out.vertex_ids.push_back(id);
        } else if (!out.vertex_ids.empty()) {
            const Edge& e = g.edges()[mid->second];
            const VertexId prev = out.vertex_ids.back();
            // Remember which edge we entered through; emitted when we see
            // where the walk lands next.
            const VertexId other = (prev == e.u) ? e.v : e.u;
            out.vertex_ids.push_back(other);
        }
    }
    return out;
}

}  // namespace

PlanResult ero_plan(const PlanRequest& req, const EROConfig& cfg,
                    std::vector<double>* accepted_trace) {
    req.validate();
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    if (accepted_trace) accepted_trace->clear();

    const UtilityContext ctx = make_utility_context(req);
    auto score = [&](const Path& p) {
        return path_utility(ctx, sample_along_path(p, req.graph, req.sample_interval));
    };

    Path current = shortest_path(req.graph, req.start, req.terminal);
    double current_utility = score(current);

    const std::size_t n_edges = req.graph.edges().size();
    if (n_edges > 0) {
        const EdgeNodeGraph eng = build_edge_node_graph(req.graph);
        std::set<std::size_t> selected;
        std::mt19937_64 rng(req.seed);

        for (int iter = 0; iter < cfg.iterations; ++iter) {
            std::set<std::size_t> proposal = selected;
            const bool can_add = selected.size() < n_edges;
            const bool can_delete = !selected.empty();
            const bool add = can_add && (!can_delete || uniform01(rng) < 0.5);
            if (add) {
                std::vector<std::size_t> absent;
                for (std::size_t i = 0; i < n_edges; ++i)
                    if (!selected.count(i)) absent.push_back(i);
                proposal.insert(absent[rand_index(rng, absent.size())]);
            } else {
                std::vector<std::size_t> present(selected.begin(), selected.end());
                proposal.erase(present[rand_index(rng, present.size())]);
            }

            std::vector<VertexId> required{req.start, req.terminal};
            for (std::size_t e : proposal) required.push_back(eng.mid_ids[e]);

            Path candidate;
            try {
                const Path aug = steiner_tsp(eng.graph, required, req.start, req.terminal);
                candidate = map_back(aug, eng, req.graph);
            } catch (const ValidationError&) {
                continue;  // required set not connected: reject the move
            }
            if (path_cost(candidate, req.graph) > req.budget + 1e-9) continue;

            const double utility = score(candidate);
            if (utility > current_utility + 1e-12) {
                current = std::move(candidate);
                current_utility = utility;
                selected = std::move(proposal);
                if (accepted_trace) accepted_trace->push_back(utility);
            }
        }
    }

    PlanResult out;
    out.path = std::move(current);
    out.cost = path_cost(out.path, req.graph);
    out.utility = current_utility;
    out.algorithm = "ero";
    out.seed = req.seed;
    out.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace ipp
