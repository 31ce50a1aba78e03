#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgdial {

/// Interned entity handle. Values are dense, assigned in first-seen order.
struct EntityId {
    std::uint32_t value = 0;
    friend auto operator<=>(const EntityId&, const EntityId&) = default;
};

struct RelationId {
    std::uint32_t value = 0;
    friend auto operator<=>(const RelationId&, const RelationId&) = default;
};

struct Triple {
    EntityId head;
    RelationId relation;
    EntityId tail;

    bool is_self_loop() const noexcept { return head == tail; }
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = t.head.value;
        h = h * 0x9E3779B97F4A7C15ULL ^ t.relation.value;
        h = h * 0x9E3779B97F4A7C15ULL ^ t.tail.value;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

struct Neighbor {
    RelationId relation;
    EntityId entity;
    friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

enum class Direction { out, in, both };
enum class TripleFormat { tsv, jsonl };

struct GraphStats {
    std::size_t entities = 0;
    std::size_t relations = 0;
    std::size_t triples = 0;
    std::size_t self_loops = 0;
    std::size_t duplicate_records = 0;
};

/// Directed, relation-labelled multigraph. Immutable once built; concurrent
/// readers are safe.
class KnowledgeGraph {
public:
    class Builder {
    public:
        /// Returns false when the triple was already present.
        bool add(std::string_view head, std::string_view relation, std::string_view tail);
        KnowledgeGraph build() &&;

    private:
        std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& index,
                             std::vector<std::string>& labels, std::string_view label);

        std::unordered_map<std::string, std::uint32_t> entity_index_;
        std::unordered_map<std::string, std::uint32_t> relation_index_;
        std::vector<std::string> entity_labels_;
        std::vector<std::string> relation_labels_;
        std::vector<Triple> triples_;
        std::unordered_set<Triple, TripleHash> seen_;
        std::size_t duplicates_ = 0;
    };

    KnowledgeGraph() = default;
    KnowledgeGraph(const KnowledgeGraph&) = delete;
    KnowledgeGraph& operator=(const KnowledgeGraph&) = delete;
    KnowledgeGraph(KnowledgeGraph&&) noexcept = default;
    KnowledgeGraph& operator=(KnowledgeGraph&&) noexcept = default;

    std::size_t entity_count() const noexcept { return entity_labels_.size(); }
    std::size_t relation_count() const noexcept { return relation_labels_.size(); }
    std::size_t triple_count() const noexcept { return triples_.size(); }
    bool empty() const noexcept { return triples_.empty(); }

    const std::string& label(EntityId e) const;
    const std::string& label(RelationId r) const;

    std::optional<EntityId> find_entity(std::string_view label) const;
    std::optional<RelationId> find_relation(std::string_view label) const;
    /// Throws kgdial::Error for an unknown label.
    EntityId entity(std::string_view label) const;
    RelationId relation(std::string_view label) const;

    bool contains(EntityId e) const noexcept { return e.value < entity_count(); }
    bool contains(const Triple& t) const;

    /// Triples in first-seen order.
    std::span<const Triple> triples() const noexcept { return triples_; }

    /// Sorted by (relation, entity). Unknown entity throws.
    std::span<const Neighbor> out_neighbors(EntityId e) const;
    std::span<const Neighbor> in_neighbors(EntityId e) const;
    std::vector<Neighbor> neighbors(EntityId e, Direction direction) const;

    /// in-degree + out-degree on the triple set.
    std::size_t degree(EntityId e) const;

    GraphStats stats() const noexcept { return stats_; }

    friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b);

private:
    void check(EntityId e) const;

    std::vector<std::string> entity_labels_;
    std::vector<std::string> relation_labels_;
    std::unordered_map<std::string, std::uint32_t> entity_index_;
    std::unordered_map<std::string, std::uint32_t> relation_index_;
    std::vector<Triple> triples_;
    std::unordered_set<Triple, TripleHash> triple_set_;
    std::vector<std::size_t> out_offsets_;
    std::vector<Neighbor> out_adj_;
    std::vector<std::size_t> in_offsets_;
    std::vector<Neighbor> in_adj_;
    GraphStats stats_;
};

KnowledgeGraph read_graph(std::istream& in, TripleFormat format, const std::string& source_name);
KnowledgeGraph load_graph(const std::filesystem::path& source, TripleFormat format);
TripleFormat parse_triple_format(std::string_view name);

/// Writes the graph as TSV in first-seen triple order; read back it yields
/// an equal graph with identical ids.
void write_graph_tsv(const KnowledgeGraph& g, std::ostream& out);

/// Triple subset of a parent graph. Holds a non-owning parent pointer.
class Subgraph {
public:
    explicit Subgraph(const KnowledgeGraph& parent) : parent_(&parent) {}

    const KnowledgeGraph& parent() const noexcept { return *parent_; }
    /// Sorted, unique.
    std::span<const Triple> triples() const noexcept { return triples_; }
    /// Sorted, unique; union of heads and tails.
    std::span<const EntityId> entities() const noexcept { return entities_; }
    bool empty() const noexcept { return triples_.empty(); }

    friend bool operator==(const Subgraph& a, const Subgraph& b) {
        return a.parent_ == b.parent_ && a.triples_ == b.triples_;
    }

private:
    friend Subgraph induced_subgraph(const KnowledgeGraph&, std::span<const Triple>);

    const KnowledgeGraph* parent_;
    std::vector<Triple> triples_;
    std::vector<EntityId> entities_;
};

/// Throws kgdial::Error if any triple is not in `g`.
Subgraph induced_subgraph(const KnowledgeGraph& g, std::span<const Triple> triples);

/// |A ∩ B| / |A ∪ B| over triple sets. Two empty subgraphs score 0.
double jaccard_similarity(const Subgraph& a, const Subgraph& b);

} // namespace kgdial
