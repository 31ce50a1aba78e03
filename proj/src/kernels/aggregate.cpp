#include "kgdial/kernels.hpp"

#include <cstddef>

namespace kgdial::kernels {

namespace {

inline void aggregate_row(const UndirectedGraph& graph, const EmbeddingTable& in, EmbeddingTable& out,
                          std::uint32_t v) {
    const std::size_t d = in.dimension();
    auto dst = out.row(v);
    const auto neighbors = graph.neighbors(v);
    for (std::size_t k = 0; k < d; ++k)
        dst[k] = 0.0;
    for (std::uint32_t u : neighbors) {
        const auto src = in.row(u);
        for (std::size_t k = 0; k < d; ++k)
            dst[k] += src[k];
    }
    const auto self = in.row(v);
    const double inv = neighbors.empty() ? 0.0 : 1.0 / static_cast<double>(neighbors.size());
    for (std::size_t k = 0; k < d; ++k)
        dst[k] = self[k] + dst[k] * inv;
    normalize(dst);
}

} // namespace

void aggregate_mean_serial(const UndirectedGraph& graph, const EmbeddingTable& in, EmbeddingTable& out) {
    const auto n = static_cast<std::int64_t>(graph.node_count());
    for (std::int64_t v = 0; v < n; ++v)
        aggregate_row(graph, in, out, static_cast<std::uint32_t>(v));
}

void aggregate_mean_omp(const UndirectedGraph& graph, const EmbeddingTable& in, EmbeddingTable& out) {
    const auto n = static_cast<std::int64_t>(graph.node_count());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t v = 0; v < n; ++v)
        aggregate_row(graph, in, out, static_cast<std::uint32_t>(v));
}

void edge_cosines_serial(const EmbeddingTable& table, std::span<const UndirectedGraph::Edge> edges,
                         std::span<double> out) {
    for (std::size_t i = 0; i < edges.size(); ++i)
        out[i] = cosine(table.row(edges[i].u), table.row(edges[i].v));
}

void edge_cosines_omp(const EmbeddingTable& table, std::span<const UndirectedGraph::Edge> edges,
                      std::span<double> out) {
    const auto n = static_cast<std::int64_t>(edges.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] =
            cosine(table.row(edges[static_cast<std::size_t>(i)].u), table.row(edges[static_cast<std::size_t>(i)].v));
}

} // namespace kgdial::kernels
