#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "ipp/errors.hpp"
#include "ipp/planners.hpp"
#include "rand_util.hpp"

namespace ipp {

namespace {

using detail::rand_index;
using detail::uniform01;

// All-pairs shortest distances, computed lazily per source.
class DistCache {
public:
    explicit DistCache(const AreaGraph& g) : g_(g) {}

    double dist(VertexId u, VertexId v) {
        const auto& row = table(u);
        auto it = row.find(v);
        if (it == row.end()) throw ValidationError("vertices are disconnected");
        return it->second;
    }

    const std::map<VertexId, double>& table(VertexId u) {
        auto it = cache_.find(u);
        if (it == cache_.end()) it = cache_.emplace(u, shortest_distances(g_, u)).first;
        return it->second;
    }

private:
    const AreaGraph& g_;
    std::map<VertexId, std::map<VertexId, double>> cache_;
};

// Replaces the leg seq[slot] -> seq[slot+1] by a detour through v, walking
// concrete shortest paths so the sequence stays a valid walk.
void splice_through(std::vector<VertexId>& seq, std::size_t slot, VertexId v,
                    const AreaGraph& g) {
    const Path first = shortest_path(g, seq[slot], v);
    const Path second = shortest_path(g, v, seq[slot + 1]);
    std::vector<VertexId> detour(first.vertex_ids.begin(), first.vertex_ids.end());
    detour.insert(detour.end(), second.vertex_ids.begin() + 1, second.vertex_ids.end());
    seq.erase(seq.begin() + static_cast<std::ptrdiff_t>(slot),
              seq.begin() + static_cast<std::ptrdiff_t>(slot) + 2);
    seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(slot), detour.begin(), detour.end());
}

// One chromosome attempt at first-half fraction alpha; empty path on failure.
Path attempt_chromosome(const PlanRequest& req, double alpha, DistCache& dists,
                        std::mt19937_64& rng) {
    const AreaGraph& g = req.graph;
    const double first_budget = alpha * req.budget;

    // Random adjacent walk from the start until the half budget is hit.
    std::vector<VertexId> seq{req.start};
    double seq_cost = 0.0;
    while (seq_cost < first_budget) {
        const auto& nbrs = g.neighbors(seq.back());
        if (nbrs.empty()) break;
        const auto& [next, len] = nbrs[rand_index(rng, nbrs.size())];
        if (seq_cost + len > first_budget) break;  // the sampled step overflows: stop here
        seq.push_back(next);
        seq_cost += len;
    }

    // Close to the terminal with the shortest path.
    const VertexId mid = seq.back();
    Path closure = shortest_path(g, mid, req.terminal);
    std::vector<VertexId> seq2 = closure.vertex_ids;
    double seq2_cost = path_cost(closure, g);
    if (seq_cost + seq2_cost > req.budget + 1e-12) return {};  // over budget: drop and retry

    // Spend the remainder inserting random absent vertices at the cheapest slot.
    const double seq2_budget = req.budget - first_budget;
    while (seq2_cost < seq2_budget && seq2.size() >= 2) {
        std::set<VertexId> covered(seq.begin(), seq.end());
        covered.insert(seq2.begin(), seq2.end());
        std::vector<VertexId> absent;
        for (const auto& [id, pt] : g.vertices())
            if (!covered.count(id)) absent.push_back(id);
        if (absent.empty()) break;

        const VertexId v = absent[rand_index(rng, absent.size())];
        std::size_t best_slot = 0;
        double best_inc = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < seq2.size(); ++i) {
            try {
                const double inc = dists.dist(seq2[i], v) + dists.dist(v, seq2[i + 1]) -
                                   g.edge_length(seq2[i], seq2[i + 1]);
                if (inc < best_inc - 1e-15) {
                    best_inc = inc;
                    best_slot = i;
                }
            } catch (const ValidationError&) {
                continue;  // v unreachable through this slot
            }
        }
        if (!std::isfinite(best_inc)) break;
        if (seq2_cost + best_inc > seq2_budget ||
            seq_cost + seq2_cost + best_inc > req.budget + 1e-12)
            break;  // the sampled vertex overflows: stop inserting
        splice_through(seq2, best_slot, v, g);
        seq2_cost += best_inc;
    }

    Path chromosome;
    chromosome.vertex_ids = seq;
    chromosome.vertex_ids.insert(chromosome.vertex_ids.end(), seq2.begin() + 1, seq2.end());
    return chromosome;
}

Path generate_chromosome(const PlanRequest& req, DistCache& dists, std::mt19937_64& rng) {
    // 50 tries per fraction, then relax the first half by 10% steps; at
    // alpha ~ 0 the walk degenerates to the bare shortest path, which the
    // request invariant guarantees feasible.
    for (double alpha = 0.5;; alpha *= 0.9) {
        for (int attempt = 0; attempt < 50; ++attempt) {
            Path c = attempt_chromosome(req, alpha, dists, rng);
            if (!c.empty()) return c;
        }
        if (alpha < 1e-6)
            throw ValidationError("ga_init_population: cannot build a feasible chromosome");
    }
}

std::vector<Path> init_population(const PlanRequest& req, const GAConfig& cfg, DistCache& dists,
                                  std::mt19937_64& rng) {
    std::vector<Path> pop;
    pop.reserve(static_cast<std::size_t>(cfg.pop_size));
    while (pop.size() < static_cast<std::size_t>(cfg.pop_size))
        pop.push_back(generate_chromosome(req, dists, rng));
    return pop;
}

}  // namespace

std::vector<Path> ga_init_population(const PlanRequest& req, const GAConfig& cfg) {
    req.validate();
    cfg.validate();
    DistCache dists(req.graph);
    std::mt19937_64 rng(req.seed);
    return init_population(req, cfg, dists, rng);
}

std::vector<Path> ga_crossover(const Path& a, const Path& b, const AreaGraph& g, double budget,
                               std::mt19937_64& rng) {
    if (a.size() < 3 || b.size() < 3) return {};

    // Common intermediate vertices, sorted for a reproducible random pick.
    std::set<VertexId> in_a(a.vertex_ids.begin() + 1, a.vertex_ids.end() - 1);
    std::vector<VertexId> common;
    std::set<VertexId> seen;
    for (std::size_t i = 1; i + 1 < b.vertex_ids.size(); ++i) {
        const VertexId v = b.vertex_ids[i];
        if (in_a.count(v) && seen.insert(v).second) common.push_back(v);
    }
    if (common.empty()) return {};
    std::sort(common.begin(), common.end());
    const VertexId cut = common[rand_index(rng, common.size())];

    const auto first_intermediate = [&](const Path& p) {
        for (std::size_t i = 1; i + 1 < p.vertex_ids.size(); ++i)
            if (p.vertex_ids[i] == cut) return i;
        return std::size_t{0};
    };
    const std::size_t ia = first_intermediate(a);
    const std::size_t ib = first_intermediate(b);

    const auto recombine = [&](const Path& head, std::size_t ih, const Path& tail,
                               std::size_t it) {
        Path child;
        child.vertex_ids.assign(head.vertex_ids.begin(),
                                head.vertex_ids.begin() + static_cast<std::ptrdiff_t>(ih) + 1);
        child.vertex_ids.insert(child.vertex_ids.end(),
                                tail.vertex_ids.begin() + static_cast<std::ptrdiff_t>(it) + 1,
                                tail.vertex_ids.end());
        return child;
    };

    std::vector<Path> offspring;
    for (Path child : {recombine(a, ia, b, ib), recombine(b, ib, a, ia)})
        if (path_cost(child, g) <= budget + 1e-9) offspring.push_back(std::move(child));
    return offspring;
}

Path ga_mutate(const Path& p, const AreaGraph& g, double budget, std::mt19937_64& rng) {
    if (p.size() < 4) return p;  // no adjacent intermediate pair to mutate at
    const double cost = path_cost(p, g);

    // Positions k where p[k] and p[k+1] are both intermediate.
    const std::size_t k = 1 + rand_index(rng, p.size() - 3);
    const VertexId vi = p.vertex_ids[k];
    const VertexId vj = p.vertex_ids[k + 1];
    const double step = g.edge_length(vi, vj);

    const auto insert_at = [&](std::vector<VertexId> extra) {
        Path out = p;
        out.vertex_ids.insert(out.vertex_ids.begin() + static_cast<std::ptrdiff_t>(k) + 1,
                              extra.begin(), extra.end());
        return out;
    };

    std::set<VertexId> adj_i, adj_j;
    for (const auto& [w, len] : g.neighbors(vi)) adj_i.insert(w);
    for (const auto& [w, len] : g.neighbors(vj)) adj_j.insert(w);

    std::vector<VertexId> commons;
    for (VertexId w : adj_i)
        if (adj_j.count(w) && w != vi && w != vj) commons.push_back(w);

    if (!commons.empty()) {
        std::vector<VertexId> feasible;
        for (VertexId w : commons)
            if (cost + g.edge_length(vi, w) + g.edge_length(w, vj) - step <= budget + 1e-9)
                feasible.push_back(w);
        if (feasible.empty()) return p;
        return insert_at({feasible[rand_index(rng, feasible.size())]});
    }

    // No shared neighbor: bridge through one neighbor of each side.
    std::vector<std::pair<VertexId, VertexId>> bridges;
    for (VertexId u : adj_i) {
        if (u == vj) continue;
        for (VertexId w : adj_j) {
            if (w == vi || w == u || !g.adjacent(u, w)) continue;
            const double inc =
                g.edge_length(vi, u) + g.edge_length(u, w) + g.edge_length(w, vj) - step;
            if (cost + inc <= budget + 1e-9) bridges.emplace_back(u, w);
        }
    }
    if (bridges.empty()) return p;
    const auto& [u, w] = bridges[rand_index(rng, bridges.size())];
    return insert_at({u, w});
}

PlanResult ga_plan(const PlanRequest& req, const GAConfig& cfg,
                   std::vector<double>* generation_best) {
    req.validate();
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    if (generation_best) generation_best->clear();

    const UtilityContext ctx = make_utility_context(req);
    std::map<std::vector<VertexId>, double> fitness_cache;
    auto fitness = [&](const Path& p) {
        auto it = fitness_cache.find(p.vertex_ids);
        if (it != fitness_cache.end()) return it->second;
        const double f = path_utility(ctx, sample_along_path(p, req.graph, req.sample_interval));
        fitness_cache.emplace(p.vertex_ids, f);
        return f;
    };

    DistCache dists(req.graph);
    std::mt19937_64 rng(req.seed);
    std::vector<Path> pop = init_population(req, cfg, dists, rng);
    std::vector<double> fit(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) fit[i] = fitness(pop[i]);

    const auto tournament = [&]() -> const Path& {
        std::size_t winner = rand_index(rng, pop.size());
        for (int t = 1; t < cfg.tournament_size; ++t) {
            const std::size_t c = rand_index(rng, pop.size());
            if (fit[c] > fit[winner]) winner = c;
        }
        return pop[winner];
    };

    for (int gen = 0; gen < cfg.generations; ++gen) {
        std::vector<Path> offspring;
        const int pairs = cfg.pop_size / 2;
        for (int n = 0; n < pairs; ++n) {
            const Path& pa = tournament();
            const Path& pb = tournament();
            for (Path& child : ga_crossover(pa, pb, req.graph, req.budget, rng)) {
                if (uniform01(rng) < cfg.mutation_fraction)
                    child = ga_mutate(child, req.graph, req.budget, rng);
                offspring.push_back(std::move(child));
            }
        }

        // Elitist truncation: parents and offspring compete for pop_size slots.
        std::vector<Path> merged = pop;
        merged.insert(merged.end(), offspring.begin(), offspring.end());
        std::vector<double> merged_fit(merged.size());
        for (std::size_t i = 0; i < merged.size(); ++i) merged_fit[i] = fitness(merged[i]);
        std::vector<std::size_t> idx(merged.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return merged_fit[a] > merged_fit[b]; });
        std::vector<Path> next;
        std::vector<double> next_fit;
        for (std::size_t i = 0; i < idx.size() && next.size() < pop.size(); ++i) {
            next.push_back(merged[idx[i]]);
            next_fit.push_back(merged_fit[idx[i]]);
        }
        pop = std::move(next);
        fit = std::move(next_fit);
        if (generation_best) generation_best->push_back(*std::max_element(fit.begin(), fit.end()));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (fit[i] > fit[best]) best = i;

    PlanResult out;
    out.path = pop[best];
    out.cost = path_cost(out.path, req.graph);
    out.utility = fit[best];
    out.algorithm = "ga";
    out.seed = req.seed;
    out.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace ipp
