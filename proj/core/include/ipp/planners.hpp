#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ipp/graph.hpp"
#include "ipp/tsp.hpp"

namespace ipp {

struct PlanResult {
    Path path;
    double cost = 0.0;     // meters
    double utility = 0.0;  // nats
    double runtime_s = 0.0;
    std::string algorithm;
    uint64_t seed = 0;
};

// {"algorithm":...,"seed":...,"path":[...],"cost":...,"utility":...,"runtime_s":...}
// include_runtime=false writes runtime_s as 0 for byte-reproducible artifacts.
std::string to_json_string(const PlanResult& r, bool include_runtime = true);
PlanResult plan_result_from_json(const std::string& json_text);

struct GAConfig {
    int pop_size = 200;
    int tournament_size = 10;
    double mutation_fraction = 0.9;
    int generations = 5;

    void validate() const;
};

struct RGConfig {
    int recursion_depth = 2;
    int budget_grid = 16;              // number of evenly spaced budget splits
    double utility_upper_bound = 0.0;  // documented QP-variant knob, unused by the search
    double time_limit_s = 600.0;

    void validate() const;
};

struct EROConfig {
    int iterations = 200;

    void validate() const;
};

// UtilityContext shared by every planner for this request: V is the graph's
// deduplicated vertex set, conditioning adds the request's pilot points.
UtilityContext make_utility_context(const PlanRequest& req);

// Utility of a concrete walk under the request (samples, then f_D).
double evaluate_path_utility(const PlanRequest& req, const Path& p);

// Checks budget, endpoints and adjacency; throws ValidationError otherwise.
void check_feasible(const PlanRequest& req, const Path& p);

// Depth-first enumeration of every feasible walk, pruned by
// cost + dist-to-terminal > budget. Utility-maximal walk wins; throws
// TimeLimitError when the wall clock runs out.
PlanResult brute_force_plan(const PlanRequest& req, double time_limit_s = 600.0);

// Algorithm: start from the shortest path, repeatedly adopt the absent vertex
// with the highest marginal benefit-cost ratio (Steiner-TSP re-routing) while
// the extension fits the budget.
PlanResult greedy_plan(const PlanRequest& req);

std::vector<Path> ga_init_population(const PlanRequest& req, const GAConfig& cfg);
std::vector<Path> ga_crossover(const Path& a, const Path& b, const AreaGraph& g,
                               double budget, std::mt19937_64& rng);
Path ga_mutate(const Path& p, const AreaGraph& g, double budget, std::mt19937_64& rng);
// generation_best, when given, receives the elite fitness after every generation.
PlanResult ga_plan(const PlanRequest& req, const GAConfig& cfg = {},
                   std::vector<double>* generation_best = nullptr);

PlanResult recursive_greedy_plan(const PlanRequest& req, const RGConfig& cfg = {});

// accepted_trace, when given, receives the utility after every accepted move.
PlanResult ero_plan(const PlanRequest& req, const EROConfig& cfg = {},
                    std::vector<double>* accepted_trace = nullptr);

}  // namespace ipp
