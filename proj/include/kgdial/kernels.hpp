#pragma once

// Data-parallel kernels. Every `*_omp` kernel has a `*_serial` twin that
// produces bitwise-identical output; the serial versions are the reference
// for tests and the baseline for bench/.

#include "kgdial/embedding.hpp"
#include "kgdial/graph.hpp"
#include "kgdial/undirected_graph.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kgdial {

enum class Execution { serial, parallel };

namespace kernels {

/// out.row(v) = normalize(in.row(v) + mean of in.row(u) over neighbors u).
void aggregate_mean_serial(const UndirectedGraph& graph, const EmbeddingTable& in, EmbeddingTable& out);
void aggregate_mean_omp(const UndirectedGraph& graph, const EmbeddingTable& in, EmbeddingTable& out);

void edge_cosines_serial(const EmbeddingTable& table, std::span<const UndirectedGraph::Edge> edges,
                         std::span<double> out);
void edge_cosines_omp(const EmbeddingTable& table, std::span<const UndirectedGraph::Edge> edges,
                      std::span<double> out);

struct BestMatch {
    std::ptrdiff_t index = -1;
    double similarity = -2.0;
};

/// Highest cosine between `query` and rows [0, pool.size()); ties go to the
/// lowest row.
BestMatch best_cosine_serial(std::span<const double> query, const EmbeddingTable& pool);
BestMatch best_cosine_omp(std::span<const double> query, const EmbeddingTable& pool);

using TripleSet = std::vector<Triple>; // sorted, unique
using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

void jaccard_pairs_serial(std::span<const TripleSet> sets, std::span<const IndexPair> pairs,
                          std::span<double> out);
void jaccard_pairs_omp(std::span<const TripleSet> sets, std::span<const IndexPair> pairs,
                       std::span<double> out);

struct NgramCounts {
    std::array<std::uint64_t, 4> matched{};
    std::array<std::uint64_t, 4> candidate_total{};
    std::array<std::uint64_t, 4> reference_total{};
    std::uint64_t candidate_length = 0;
    std::uint64_t reference_length = 0;
};

using Tokens = std::vector<std::string>;

/// Clipped n-gram matches per pair, orders 1..4.
void ngram_counts_serial(std::span<const Tokens> candidates, std::span<const Tokens> references,
                         std::span<NgramCounts> out);
void ngram_counts_omp(std::span<const Tokens> candidates, std::span<const Tokens> references,
                      std::span<NgramCounts> out);

/// Per-pair LCS F1.
void lcs_f1_serial(std::span<const Tokens> candidates, std::span<const Tokens> references,
                   std::span<double> out);
void lcs_f1_omp(std::span<const Tokens> candidates, std::span<const Tokens> references, std::span<double> out);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

} // namespace kernels
} // namespace kgdial
