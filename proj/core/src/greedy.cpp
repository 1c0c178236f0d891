#include <chrono>
#include <limits>
#include <set>

#include "ipp/errors.hpp"
#include "ipp/planners.hpp"

namespace ipp {

// Algorithm sketch: P starts as the shortest start->terminal walk. Each round
// re-routes through V(P) + {candidate} with the Steiner TSP, scores the
// marginal benefit-cost ratio, and adopts the best candidate while it fits
// the budget and does not lower the utility.
PlanResult greedy_plan(const PlanRequest& req) {
    req.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const UtilityContext ctx = make_utility_context(req);

    auto score = [&](const Path& p) {
        return path_utility(ctx, sample_along_path(p, req.graph, req.sample_interval));
    };

    Path current = shortest_path(req.graph, req.start, req.terminal);
    double current_cost = path_cost(current, req.graph);
    double current_utility = score(current);

    while (true) {
        std::set<VertexId> on_path(current.vertex_ids.begin(), current.vertex_ids.end());
        std::vector<VertexId> required(on_path.begin(), on_path.end());

        double best_mbcr = -std::numeric_limits<double>::infinity();
        Path best_path;
        double best_cost = 0.0, best_utility_val = 0.0;

        for (const auto& [vc, pt] : req.graph.vertices()) {  // ascending id = tie-break order
            if (on_path.count(vc)) continue;
            std::vector<VertexId> extended = required;
            extended.push_back(vc);
            Path candidate;
            try {
                candidate = steiner_tsp(req.graph, extended, req.start, req.terminal);
            } catch (const ValidationError&) {
                continue;  // vc unreachable from the required set
            }
            const double cost = path_cost(candidate, req.graph);
            const double delta_cost = cost - current_cost;
            if (delta_cost <= 1e-12) continue;  // vc was absorbed by a witness detour
            const double utility = score(candidate);
            const double mbcr = (utility - current_utility) / delta_cost;
            if (mbcr > best_mbcr + 1e-15) {
                best_mbcr = mbcr;
                best_path = candidate;
                best_cost = cost;
                best_utility_val = utility;
            }
        }

        if (best_path.empty()) break;                 // no candidates remain
        if (best_cost > req.budget + 1e-9) break;     // best extension does not fit
        if (best_utility_val < current_utility) break;  // keeps utility monotone
        current = std::move(best_path);
        current_cost = best_cost;
        current_utility = best_utility_val;
    }

    PlanResult out;
    out.path = std::move(current);
    out.cost = current_cost;
    out.utility = current_utility;
    out.algorithm = "greedy";
    out.seed = req.seed;
    out.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace ipp
