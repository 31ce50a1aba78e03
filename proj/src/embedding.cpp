#include "kgdial/embedding.hpp"

#include "kgdial/error.hpp"
#include "kgdial/kernels.hpp"
#include "kgdial/tokenize.hpp"
#include "kgdial/undirected_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace kgdial {

void EmbeddingTable::push_back(std::span<const double> values) {
    if (rows_ == 0 && dimension_ == 0)
        dimension_ = values.size();
    if (values.size() != dimension_)
        throw Error("EmbeddingTable::push_back: dimension mismatch");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void EmbeddingConfig::validate() const {
    if (dimension < 2)
        throw ConfigError("embedding.dimension must be >= 2");
    if (layers < 1)
        throw ConfigError("embedding.layers must be >= 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

void normalize(std::span<double> v) {
    double sq = 0.0;
    for (double x : v)
        sq += x * x;
    if (sq == 0.0)
        return;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v)
        x *= inv;
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw Error("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " + std::to_string(v.size()) + ")");
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (uu == 0.0 || vv == 0.0)
        return 0.0;
    return std::clamp(dot / std::sqrt(uu * vv), -1.0, 1.0);
}

EmbeddingTable initial_features(std::size_t entities, std::size_t dimension, std::uint64_t seed) {
    EmbeddingTable table(entities, dimension);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < entities; ++i) {
        std::mt19937_64 rng(seed ^ splitmix64(i));
        for (double& x : table.row(i))
            x = uniform(rng);
        normalize(table.row(i));
    }
    return table;
}

EmbeddingTable propagate(const UndirectedGraph& graph, EmbeddingTable features, std::size_t layers) {
    if (features.size() != graph.node_count())
        throw Error("propagate: feature rows do not match node count");
    EmbeddingTable next(features.size(), features.dimension());
    for (std::size_t layer = 0; layer < layers; ++layer) {
        kernels::aggregate_mean_omp(graph, features, next);
        std::swap(features, next);
    }
    return features;
}

EmbeddingTable embed_graph(const KnowledgeGraph& g, const EmbeddingConfig& cfg) {
    cfg.validate();
    if (g.entity_count() == 0)
        throw Error("embed_graph: empty graph");
    return propagate(erase_labels(g), initial_features(g.entity_count(), cfg.dimension, cfg.seed), cfg.layers);
}

TextEmbedding embed_text(std::string_view text, std::size_t dimension) {
    if (dimension < 2)
        throw Error("embed_text: dimension must be >= 2");
    TextEmbedding out{std::vector<double>(dimension, 0.0), false};
    std::unordered_map<std::string, std::size_t> tf;
    for (auto& token : word_tokens(text))
        ++tf[to_lower(token)];
    if (tf.empty())
        return out;
    // Sorted so that hash collisions accumulate in a fixed order.
    std::vector<std::pair<std::string, std::size_t>> terms(tf.begin(), tf.end());
    std::sort(terms.begin(), terms.end());
    for (const auto& [token, count] : terms) {
        const std::uint64_t h = fnv1a(token);
        const double sign = (h >> 63) ? -1.0 : 1.0;
        out.vector[h % dimension] += sign * (1.0 + std::log(static_cast<double>(count)));
    }
    normalize(out.vector);
    out.embeddable = std::any_of(out.vector.begin(), out.vector.end(), [](double x) { return x != 0.0; });
    return out;
}

namespace {

template <typename OnRecord>
void read_vector_records(const std::filesystem::path& path, std::size_t dimension, OnRecord&& on_record) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open embedding file " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string(), line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!record.contains("id") || !record["id"].is_string() || !record.contains("vector") ||
            !record["vector"].is_array())
            throw ParseError(path.string(), line_no, "expected {\"id\": string, \"vector\": [numbers]}");
        auto values = record["vector"].get<std::vector<double>>();
        if (values.size() != dimension)
            throw ParseError(path.string(), line_no,
                             "dimension mismatch: expected " + std::to_string(dimension) + ", found " +
                                 std::to_string(values.size()));
        on_record(record["id"].get<std::string>(), std::move(values), line_no);
    }
}

} // namespace

EmbeddingTable load_entity_embeddings(const std::filesystem::path& path, const KnowledgeGraph& g,
                                      std::size_t dimension) {
    EmbeddingTable table(g.entity_count(), dimension);
    std::vector<bool> seen(g.entity_count(), false);
    read_vector_records(path, dimension, [&](const std::string& id, std::vector<double> values, std::size_t line) {
        const auto e = g.find_entity(id);
        if (!e)
            throw ParseError(path.string(), line, "unknown entity '" + id + "'");
        std::copy(values.begin(), values.end(), table.row(e->value).begin());
        normalize(table.row(e->value));
        seen[e->value] = true;
    });
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw ParseError(path.string(), 0, "no vector for entity '" + g.label(EntityId{static_cast<std::uint32_t>(i)}) + "'");
    return table;
}

void write_entity_embeddings(const std::filesystem::path& path, const KnowledgeGraph& g,
                             const EmbeddingTable& table) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    for (std::uint32_t i = 0; i < table.size(); ++i) {
        const auto row = table.row(i);
        nlohmann::json record{{"id", g.label(EntityId{i})}, {"vector", std::vector<double>(row.begin(), row.end())}};
        out << record.dump() << '\n';
    }
}

std::unordered_map<std::string, TextEmbedding> load_text_embeddings(const std::filesystem::path& path,
                                                                    std::size_t dimension) {
    std::unordered_map<std::string, TextEmbedding> out;
    read_vector_records(path, dimension, [&](const std::string& id, std::vector<double> values, std::size_t) {
        normalize(values);
        const bool embeddable = std::any_of(values.begin(), values.end(), [](double x) { return x != 0.0; });
        out[id] = TextEmbedding{std::move(values), embeddable};
    });
    return out;
}

} // namespace kgdial
