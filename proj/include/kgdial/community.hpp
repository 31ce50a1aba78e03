#pragma once

#include "kgdial/embedding.hpp"
#include "kgdial/graph.hpp"
#include "kgdial/undirected_graph.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace kgdial {

/// Disjoint, total assignment of entities to communities. Communities are
/// kept in canonical order: sorted by their smallest member id, members
/// ascending.
struct CommunityPartition {
    std::vector<std::uint32_t> assignment;       // indexed by EntityId::value
    std::vector<std::vector<EntityId>> communities;
    double modularity = 0.0;
    /// True when `modularity` was measured on similarity-weighted edges.
    bool weighted = false;

    std::size_t size() const noexcept { return communities.size(); }

    /// Rebuilds `communities` from an arbitrary labelling and renumbers
    /// labels canonically. Does not touch `modularity`.
    static CommunityPartition from_labels(std::span<const std::uint32_t> labels);
};

struct PartitionConfig {
    double theta = 0.8;
    bool use_embedding_weights = true;
    std::size_t min_community_size = 3;
    std::size_t max_passes = 20;
    double epsilon = 1e-7;
    /// Lower bound for similarity-derived edge weights.
    double weight_floor = 0.01;

    void validate() const;
};

/// Throws kgdial::Error unless the partition is total, disjoint, non-empty
/// and consistent with `assignment`.
void check_partition(const CommunityPartition& p, std::size_t entity_count);

CommunityPartition initialize_singletons(const KnowledgeGraph& g);

/// Union-find merges of edge endpoints with cosine > theta, applied in
/// descending similarity order on top of `p`.
CommunityPartition propose_merges(const KnowledgeGraph& g, const EmbeddingTable& emb, const CommunityPartition& p,
                                  double theta);

/// Newman-Girvan modularity. 0 when the graph has no edge weight.
double modularity(const UndirectedGraph& graph, std::span<const std::uint32_t> assignment);
/// On the relation-erased unit-weight graph of `g`.
double modularity(const KnowledgeGraph& g, const CommunityPartition& p);

/// Edge weights max(floor, cosine(u, v)) over the relation-erased graph.
UndirectedGraph similarity_weighted(const UndirectedGraph& graph, const EmbeddingTable& emb, double floor);

/// Multi-level Louvain starting from `p` (level 0 moves single nodes, so
/// pre-merged groups can still be split). After each multi-level round the
/// result is refined by single-node moves on `graph`; a node may also leave
/// for an empty community. Q never decreases.
CommunityPartition louvain_optimize(const UndirectedGraph& graph, const CommunityPartition& p,
                                    const PartitionConfig& cfg);
CommunityPartition louvain_optimize(const KnowledgeGraph& g, const CommunityPartition& p,
                                    const PartitionConfig& cfg);

/// initialize -> propose_merges -> louvain_optimize -> small-community merge.
CommunityPartition partition_graph(const KnowledgeGraph& g, const EmbeddingTable& emb, const PartitionConfig& cfg);

/// Everything in one community; used by the no-partition pipeline modes.
CommunityPartition single_community(const KnowledgeGraph& g);

void write_partition(const std::filesystem::path& path, const KnowledgeGraph& g, const CommunityPartition& p);
CommunityPartition read_partition(const std::filesystem::path& path, const KnowledgeGraph& g);

} // namespace kgdial
