#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

namespace kgdial {

class KnowledgeGraph;

/// Weighted undirected graph in CSR form, used for aggregation and
/// modularity. `loop(u)` is the diagonal entry A_uu, so a node's strength is
/// the sum of its off-diagonal weights plus its loop.
class UndirectedGraph {
public:
    struct Edge {
        std::uint32_t u;
        std::uint32_t v;
        double weight;
    };

    UndirectedGraph() = default;
    /// Edges with u == v add `weight` to A_uu twice (one per endpoint).
    /// Parallel edges accumulate.
    UndirectedGraph(std::size_t node_count, std::span<const Edge> edges);

    std::size_t node_count() const noexcept { return loops_.size(); }
    std::span<const std::uint32_t> neighbors(std::uint32_t u) const noexcept {
        return {targets_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
    }
    std::span<const double> weights(std::uint32_t u) const noexcept {
        return {weights_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
    }
    double loop(std::uint32_t u) const noexcept { return loops_[u]; }
    double strength(std::uint32_t u) const noexcept { return strength_[u]; }
    /// 2m: sum of all strengths.
    double total_strength() const noexcept { return total_; }

    /// Each off-diagonal pair once, with u < v, in CSR order.
    std::vector<Edge> edges() const;

private:
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> targets_;
    std::vector<double> weights_;
    std::vector<double> loops_;
    std::vector<double> strength_;
    double total_ = 0.0;
};

/// Relation labels and directions erased; one unit-weight edge per distinct
/// entity pair; self-loop triples dropped.
UndirectedGraph erase_labels(const KnowledgeGraph& g);

} // namespace kgdial
