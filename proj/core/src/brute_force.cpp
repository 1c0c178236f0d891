#include <chrono>

#include "ipp/errors.hpp"
#include "ipp/planners.hpp"

namespace ipp {

namespace {

using Clock = std::chrono::steady_clock;

struct Search {
    const PlanRequest& req;
    const UtilityContext& ctx;
    const std::map<VertexId, double>& dist_to_terminal;
    Clock::time_point deadline;
    long checks_since_clock = 0;

    Path best;
    double best_utility = -1.0;

    void tick() {
        // Amortized clock polling; the enumeration explodes combinatorially.
        if (++checks_since_clock < 256) return;
        checks_since_clock = 0;
        if (Clock::now() > deadline)
            throw TimeLimitError("brute_force_plan: time limit exceeded");
    }

    void visit(Path& walk, double cost) {
        tick();
        if (walk.vertex_ids.back() == req.terminal) {
            const double u = path_utility(
                ctx, sample_along_path(walk, req.graph, req.sample_interval));
            if (u > best_utility + 1e-12 || best.empty()) {
                best_utility = u;
                best = walk;
            }
        }
        const VertexId cur = walk.vertex_ids.back();
        for (const auto& [next, len] : req.graph.neighbors(cur)) {  // ascending id
            auto it = dist_to_terminal.find(next);
            if (it == dist_to_terminal.end()) continue;
            if (cost + len + it->second > req.budget + 1e-9) continue;
            walk.vertex_ids.push_back(next);
            visit(walk, cost + len);
            walk.vertex_ids.pop_back();
        }
    }
};

}  // namespace

PlanResult brute_force_plan(const PlanRequest& req, double time_limit_s) {
    req.validate();
    const auto t0 = Clock::now();

    const UtilityContext ctx = make_utility_context(req);
    const auto dist_to_terminal = shortest_distances(req.graph, req.terminal);

    Search search{req, ctx, dist_to_terminal,
                  t0 + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(time_limit_s)),
                  0, {}, -1.0};
    Path walk{{req.start}};
    search.visit(walk, 0.0);

    PlanResult out;
    out.path = std::move(search.best);
    out.cost = path_cost(out.path, req.graph);
    out.utility = search.best_utility;
    out.algorithm = "bruteforce";
    out.seed = req.seed;
    out.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace ipp
