#include "ipp/tsp.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "ipp/errors.hpp"

namespace ipp {

namespace {

std::vector<VertexId> dedupe_keep_order(const std::vector<VertexId>& ids) {
    std::vector<VertexId> out;
    std::set<VertexId> seen;
    for (VertexId id : ids)
        if (seen.insert(id).second) out.push_back(id);
    return out;
}

// Splices closure witness walks along the visit order into one concrete walk.
Path expand_order(const MetricClosure& mc, const std::vector<int>& order) {
    Path walk;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const Path& leg = mc.witness[static_cast<std::size_t>(order[i])]
                                    [static_cast<std::size_t>(order[i + 1])];
        if (walk.empty())
            walk.vertex_ids = leg.vertex_ids;
        else
            walk.vertex_ids.insert(walk.vertex_ids.end(), leg.vertex_ids.begin() + 1,
                                   leg.vertex_ids.end());
    }
    if (walk.empty() && !order.empty())
        walk.vertex_ids.push_back(mc.required[static_cast<std::size_t>(order[0])]);
    return walk;
}

// Held-Karp over the closure indices: fixed first index, visit all of `inner`,
// end at `last` (last == first means closed tour). Returns the visit order.
std::vector<int> held_karp(const MetricClosure& mc, int first, int last,
                           const std::vector<int>& inner) {
    const int m = static_cast<int>(inner.size());
    const auto d = [&](int a, int b) {
        return mc.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    };
    if (m == 0) return {first, last};

    const std::size_t n_masks = std::size_t{1} << m;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(n_masks, std::vector<double>(m, kInf));
    std::vector<std::vector<int>> parent(n_masks, std::vector<int>(m, -1));

    for (int j = 0; j < m; ++j) dp[std::size_t{1} << j][j] = d(first, inner[j]);
    for (std::size_t mask = 1; mask < n_masks; ++mask) {
        for (int j = 0; j < m; ++j) {
            if (!(mask & (std::size_t{1} << j)) || dp[mask][j] == kInf) continue;
            for (int k = 0; k < m; ++k) {
                if (mask & (std::size_t{1} << k)) continue;
                const std::size_t next = mask | (std::size_t{1} << k);
                const double cand = dp[mask][j] + d(inner[j], inner[k]);
                if (cand < dp[next][k]) {
                    dp[next][k] = cand;
                    parent[next][k] = j;
                }
            }
        }
    }

    const std::size_t full = n_masks - 1;
    int best_j = 0;
    double best = kInf;
    for (int j = 0; j < m; ++j) {
        const double cand = dp[full][j] + d(inner[j], last);
        if (cand < best) {
            best = cand;
            best_j = j;
        }
    }

    std::vector<int> rev{last};
    std::size_t mask = full;
    int j = best_j;
    while (j >= 0) {
        rev.push_back(inner[j]);
        const int pj = parent[mask][j];
        mask &= ~(std::size_t{1} << j);
        j = pj;
    }
    rev.push_back(first);
    std::reverse(rev.begin(), rev.end());
    return rev;
}

std::vector<int> nearest_neighbor_two_opt(const MetricClosure& mc, int first, int last,
                                          std::vector<int> inner) {
    const auto d = [&](int a, int b) {
        return mc.dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    };

    // Greedy construction; ties go to the smaller closure index.
    std::vector<int> order{first};
    std::vector<bool> used(inner.size(), false);
    int cur = first;
    for (std::size_t step = 0; step < inner.size(); ++step) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < inner.size(); ++i) {
            if (used[i]) continue;
            if (d(cur, inner[i]) < best_d - 1e-15) {
                best_d = d(cur, inner[i]);
                best = static_cast<int>(i);
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        order.push_back(inner[static_cast<std::size_t>(best)]);
        cur = inner[static_cast<std::size_t>(best)];
    }
    order.push_back(last);

    // 2-opt on the interior until no exchange improves.
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 1; i + 1 < order.size(); ++i) {
            for (std::size_t j = i + 1; j + 1 < order.size(); ++j) {
                const double before = d(order[i - 1], order[i]) + d(order[j], order[j + 1]);
                const double after = d(order[i - 1], order[j]) + d(order[i], order[j + 1]);
                if (after < before - 1e-12) {
                    std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i),
                                 order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                    improved = true;
                }
            }
        }
    }
    return order;
}

}  // namespace

int MetricClosure::index_of(VertexId id) const {
    for (std::size_t i = 0; i < required.size(); ++i)
        if (required[i] == id) return static_cast<int>(i);
    return -1;
}

MetricClosure metric_closure(const AreaGraph& g, const std::vector<VertexId>& required) {
    if (required.empty()) throw ValidationError("metric_closure: empty required set");
    MetricClosure mc;
    mc.required = dedupe_keep_order(required);
    const std::size_t n = mc.required.size();
    mc.dist.assign(n, std::vector<double>(n, 0.0));
    mc.witness.assign(n, std::vector<Path>(n));
    for (std::size_t i = 0; i < n; ++i) {
        mc.witness[i][i] = Path{{mc.required[i]}};
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            Path w = shortest_path(g, mc.required[i], mc.required[j]);  // throws if disconnected
            mc.dist[i][j] = path_cost(w, g);
            mc.witness[i][j] = std::move(w);
        }
    }
    return mc;
}

Path steiner_tsp(const AreaGraph& g, const std::vector<VertexId>& required, VertexId start,
                 VertexId terminal, int exact_limit) {
    const std::vector<VertexId> reqs = dedupe_keep_order(required);
    if (reqs.empty()) throw ValidationError("steiner_tsp: empty required set");
    if (std::find(reqs.begin(), reqs.end(), start) == reqs.end() ||
        std::find(reqs.begin(), reqs.end(), terminal) == reqs.end())
        throw ValidationError("steiner_tsp: start and terminal must be in the required set");

    const MetricClosure mc = metric_closure(g, reqs);
    const int first = mc.index_of(start);
    const int last = mc.index_of(terminal);

    std::vector<int> inner;
    for (int i = 0; i < static_cast<int>(mc.required.size()); ++i)
        if (i != first && i != last) inner.push_back(i);

    if (inner.empty()) {
        if (first == last) return Path{{start}};
        return mc.witness[static_cast<std::size_t>(first)][static_cast<std::size_t>(last)];
    }

    std::vector<int> order;
    if (static_cast<int>(mc.required.size()) <= exact_limit)
        order = held_karp(mc, first, last, inner);
    else
        order = nearest_neighbor_two_opt(mc, first, last, std::move(inner));
    return expand_order(mc, order);
}

}  // namespace ipp
