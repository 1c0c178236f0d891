#include <chrono>
#include <optional>

#include "ipp/errors.hpp"
#include "ipp/planners.hpp"

namespace ipp {

namespace {

using Clock = std::chrono::steady_clock;

// Divide and conquer over (middle vertex, budget split) pairs; the second
// half is scored conditioned on the first half's samples.
class RecursiveGreedy {
public:
    RecursiveGreedy(const PlanRequest& req, const RGConfig& cfg)
        : req_(req),
          cfg_(cfg),
          ctx_(make_utility_context(req)),
          deadline_(Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(cfg.time_limit_s))) {
        for (const auto& [id, pt] : req.graph.vertices()) {
            vertex_ids_.push_back(id);
            dist_.emplace(id, shortest_distances(req.graph, id));
        }
    }

    std::optional<Path> solve(VertexId s, VertexId t, double budget,
                              const std::vector<Point>& conditioning, int depth) {
        if (Clock::now() > deadline_)
            throw TimeLimitError("recursive_greedy_plan: time limit exceeded");

        const auto& row = dist_.at(s);
        auto it = row.find(t);
        if (it == row.end() || it->second > budget + 1e-9) return std::nullopt;

        Path best = shortest_path(req_.graph, s, t);
        if (depth == 0) return best;
        double best_value = augmented_utility(conditioning, best);

        for (VertexId mid : vertex_ids_) {
            for (int j = 1; j <= cfg_.budget_grid; ++j) {
                const double first_budget =
                    budget * static_cast<double>(j) / static_cast<double>(cfg_.budget_grid);
                auto first = solve(s, mid, first_budget, conditioning, depth - 1);
                if (!first) continue;

                std::vector<Point> seen = conditioning;
                const auto first_samples =
                    sample_along_path(*first, req_.graph, req_.sample_interval);
                seen.insert(seen.end(), first_samples.begin(), first_samples.end());

                const double remaining = budget - path_cost(*first, req_.graph);
                auto second = solve(mid, t, remaining, seen, depth - 1);
                if (!second) continue;

                Path joined = *first;
                joined.vertex_ids.insert(joined.vertex_ids.end(),
                                         second->vertex_ids.begin() + 1,
                                         second->vertex_ids.end());
                const double value = augmented_utility(conditioning, joined);
                if (value > best_value + 1e-12) {
                    best_value = value;
                    best = std::move(joined);
                }
            }
        }
        return best;
    }

private:
    double augmented_utility(const std::vector<Point>& conditioning, const Path& p) {
        std::vector<Point> points = conditioning;
        const auto samples = sample_along_path(p, req_.graph, req_.sample_interval);
        points.insert(points.end(), samples.begin(), samples.end());
        return path_utility(ctx_, points);
    }

    const PlanRequest& req_;
    RGConfig cfg_;
    UtilityContext ctx_;
    Clock::time_point deadline_;
    std::vector<VertexId> vertex_ids_;
    std::map<VertexId, std::map<VertexId, double>> dist_;
};

}  // namespace

PlanResult recursive_greedy_plan(const PlanRequest& req, const RGConfig& cfg) {
    req.validate();
    cfg.validate();
    const auto t0 = Clock::now();

    RecursiveGreedy rg(req, cfg);
    auto best = rg.solve(req.start, req.terminal, req.budget, {}, cfg.recursion_depth);
    if (!best) throw ValidationError("recursive_greedy_plan: no feasible path within budget");

    PlanResult out;
    out.path = std::move(*best);
    out.cost = path_cost(out.path, req.graph);
    out.utility = evaluate_path_utility(req, out.path);
    out.algorithm = "rg";
    out.seed = req.seed;
    out.runtime_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace ipp
