#pragma once

#include "kgdial/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgdial {

class UndirectedGraph;

/// Row-major table of fixed-dimension vectors; row i belongs to EntityId{i}.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    EmbeddingTable(std::size_t rows, std::size_t dimension)
        : rows_(rows), dimension_(dimension), data_(rows * dimension, 0.0) {}

    std::size_t size() const noexcept { return rows_; }
    std::size_t dimension() const noexcept { return dimension_; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * dimension_, dimension_}; }
    std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * dimension_, dimension_};
    }
    std::span<const double> operator[](EntityId e) const noexcept { return row(e.value); }

    void push_back(std::span<const double> values);

    friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t dimension_ = 0;
    std::vector<double> data_;
};

enum class Aggregator { mean };

struct EmbeddingConfig {
    std::size_t dimension = 64;
    std::size_t layers = 2;
    std::uint64_t seed = 42;
    Aggregator aggregator = Aggregator::mean;

    void validate() const;
};

/// Seeded per-entity features in [-1, 1]; entity i's row depends only on
/// (seed, i).
EmbeddingTable initial_features(std::size_t entities, std::size_t dimension, std::uint64_t seed);

/// `layers` rounds of h <- normalize(h_self + mean(h_neighbors)) over the
/// relation-erased graph. Rows of isolated nodes are just re-normalized.
EmbeddingTable propagate(const UndirectedGraph& graph, EmbeddingTable features, std::size_t layers);

/// Untrained mean-aggregator GraphSAGE inference. Deterministic in (g, cfg).
EmbeddingTable embed_graph(const KnowledgeGraph& g, const EmbeddingConfig& cfg);

/// Cosine similarity clamped to [-1, 1]; 0 when either vector is zero.
/// Throws on dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

void normalize(std::span<double> v);

struct TextEmbedding {
    std::vector<double> vector;
    /// False for text without any word token; `vector` is then all zeros.
    bool embeddable = false;
};

/// Signed feature hashing of lowercased word tokens with sublinear term
/// frequency, L2-normalized.
TextEmbedding embed_text(std::string_view text, std::size_t dimension);

/// JSONL records {"id": <label>, "vector": [...]}. Every entity must be covered.
EmbeddingTable load_entity_embeddings(const std::filesystem::path& path, const KnowledgeGraph& g,
                                      std::size_t dimension);
void write_entity_embeddings(const std::filesystem::path& path, const KnowledgeGraph& g,
                             const EmbeddingTable& table);

/// Same record format keyed by dialogue id. Vectors are normalized on load.
std::unordered_map<std::string, TextEmbedding> load_text_embeddings(const std::filesystem::path& path,
                                                                    std::size_t dimension);

} // namespace kgdial
