#include "ipp/planners.hpp"

#include <cmath>

#include <json.hpp>

#include "ipp/errors.hpp"

namespace ipp {

std::string to_json_string(const PlanResult& r, bool include_runtime) {
    nlohmann::json j;
    j["algorithm"] = r.algorithm;
    j["seed"] = r.seed;
    j["path"] = r.path.vertex_ids;
    j["cost"] = r.cost;
    j["utility"] = r.utility;
    j["runtime_s"] = include_runtime ? r.runtime_s : 0.0;
    return j.dump();
}

PlanResult plan_result_from_json(const std::string& json_text) {
    PlanResult r;
    try {
        nlohmann::json j = nlohmann::json::parse(json_text);
        r.algorithm = j.at("algorithm").get<std::string>();
        r.seed = j.at("seed").get<uint64_t>();
        r.path.vertex_ids = j.at("path").get<std::vector<VertexId>>();
        r.cost = j.at("cost").get<double>();
        r.utility = j.at("utility").get<double>();
        r.runtime_s = j.at("runtime_s").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad PlanResult JSON: ") + e.what());
    }
    return r;
}

void GAConfig::validate() const {
    if (pop_size < 2) throw ValidationError("GA pop_size must be >= 2");
    if (tournament_size < 2 || tournament_size > pop_size)
        throw ValidationError("GA tournament_size must be in [2, pop_size]");
    if (mutation_fraction < 0.0 || mutation_fraction > 1.0)
        throw ValidationError("GA mutation_fraction must be in [0, 1]");
    if (generations < 1) throw ValidationError("GA generations must be >= 1");
}

void RGConfig::validate() const {
    if (recursion_depth < 1) throw ValidationError("RG recursion_depth must be >= 1");
    if (budget_grid < 2) throw ValidationError("RG budget_grid must be >= 2");
    if (!(time_limit_s > 0.0)) throw ValidationError("RG time limit must be positive");
}

void EROConfig::validate() const {
    if (iterations < 1) throw ValidationError("ERO iterations must be >= 1");
}

UtilityContext make_utility_context(const PlanRequest& req) {
    UtilityContext ctx;
    ctx.vertex_points = req.graph.unique_vertex_points();
    ctx.pilot_points = req.pilot_points;
    ctx.hyper = req.hyper;
    return ctx;
}

double evaluate_path_utility(const PlanRequest& req, const Path& p) {
    return path_utility(make_utility_context(req), sample_along_path(p, req.graph,
                                                                     req.sample_interval));
}

void check_feasible(const PlanRequest& req, const Path& p) {
    if (p.empty()) throw ValidationError("plan is empty");
    if (p.vertex_ids.front() != req.start || p.vertex_ids.back() != req.terminal)
        throw ValidationError("plan endpoints do not match the request");
    const double cost = path_cost(p, req.graph);  // throws on a broken adjacency
    if (cost > req.budget + 1e-9) throw ValidationError("plan exceeds the budget");
}

}  // namespace ipp
