#pragma once

#include <vector>

#include "ipp/graph.hpp"

namespace ipp {

// Complete distance matrix over a required vertex set, with the concrete
// shortest walk witnessing each entry.
struct MetricClosure {
    std::vector<VertexId> required;
    std::vector<std::vector<double>> dist;  // |R| x |R|, symmetric, zero diagonal
    std::vector<std::vector<Path>> witness;

    int index_of(VertexId id) const;
};

MetricClosure metric_closure(const AreaGraph& g, const std::vector<VertexId>& required);

// Walk from start to terminal visiting every required vertex at least once.
// Exact Held-Karp on the metric closure while the deduplicated required set
// has at most `exact_limit` vertices, nearest-neighbor + 2-opt beyond.
// start == terminal solves the closed-tour variant.
Path steiner_tsp(const AreaGraph& g, const std::vector<VertexId>& required,
                 VertexId start, VertexId terminal, int exact_limit = 12);

}  // namespace ipp
