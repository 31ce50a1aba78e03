#pragma once

#include "kgdial/dialogue.hpp"
#include "kgdial/graph.hpp"
#include "kgdial/undirected_graph.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace fixtures {

struct LabeledTriple {
    std::string head;
    std::string relation;
    std::string tail;
};

struct Planted {
    std::vector<LabeledTriple> triples;
    /// Block of each entity label, keyed by label.
    std::vector<std::pair<std::string, std::uint32_t>> blocks;
};

/// Block graph: `blocks` x `size` entities, each unordered pair linked with
/// p_in inside a block and p_out across. Inside edges use block-specific
/// relations, crossing edges use "related_to".
Planted planted_partition(std::size_t blocks = 3, std::size_t size = 10, double p_in = 0.8, double p_out = 0.05,
                          std::uint64_t seed = 7);

kgdial::KnowledgeGraph build(const std::vector<LabeledTriple>& triples);

/// Planted labels in the graph's entity order.
std::vector<std::uint32_t> planted_labels(const kgdial::KnowledgeGraph& g, const Planted& p);

void write_tsv(const std::filesystem::path& path, const std::vector<LabeledTriple>& triples);

/// Two triangles joined by one edge.
kgdial::UndirectedGraph barbell();

struct SmallGraph {
    std::uint64_t seed;
    kgdial::UndirectedGraph graph;
};

/// Seeded random graphs with 3 to 8 nodes, at least one edge each; odd
/// seeds carry weights in [0.1, 1.1).
std::vector<SmallGraph> small_graphs();

/// Seeds of small_graphs() on which Louvain from singletons stops at a
/// local optimum below the enumerated maximum.
std::set<std::uint64_t> known_local_optima();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path);

/// Hand-made dialogue over `triples` of `g`, one turn per triple, with
/// question/answer text from the mock templates.
kgdial::Dialogue make_dialogue(const kgdial::KnowledgeGraph& g, std::string id,
                               const std::vector<kgdial::Triple>& triples);

/// Adjusted Rand index between two labelings.
double adjusted_rand(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

} // namespace fixtures
