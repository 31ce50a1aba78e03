#pragma once

#include "kgdial/community.hpp"
#include "kgdial/embedding.hpp"
#include "kgdial/graph.hpp"
#include "kgdial/kernels.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace kgdial {

struct Expansion {
    EntityId entity;
    RelationId relation;
    double similarity = 0.0;
    /// The KG triple linking `entity` to the step's `next`.
    Triple triple;
};

struct WalkStep {
    std::size_t turn = 0; // 1-based
    EntityId current;
    RelationId relation;
    EntityId next;
    std::vector<Expansion> expansions;
    double weight = 0.0;
    /// The KG triple realizing (current, relation, next) in either direction.
    Triple triple;
};

/// Per-step bookkeeping for backtracking: candidates already tried from
/// `steps[i].current`.
struct WalkPlan {
    std::string id;
    std::uint32_t community = 0;
    EntityId seed_entity;
    std::vector<WalkStep> steps;
    std::vector<EntityId> visited; // insertion order, unique
    bool dead_end = false;
    std::vector<std::vector<Neighbor>> tried;

    /// Step triples plus expansion triples, sorted and unique.
    std::vector<Triple> triples() const;
};

enum class SeedPolicy { highest_degree, random_seeded };
enum class WalkStrategy { adaptive, uniform_random };

struct WalkConfig {
    std::size_t turns = 8;
    double alpha = 1.0;
    double beta = 0.5;
    double gamma = 0.75;
    double sigma = 0.7;
    std::size_t max_expansions = 2;
    SeedPolicy seed_policy = SeedPolicy::highest_degree;
    WalkStrategy strategy = WalkStrategy::adaptive;
    std::uint64_t seed = 42;
    /// Plans that end early with fewer steps are discarded.
    std::size_t min_steps = 3;

    void validate() const;
};

/// Membership test for the entities a walk may touch.
class WalkScope {
public:
    static WalkScope whole_graph(std::size_t entity_count);
    static WalkScope community(const CommunityPartition& p, std::uint32_t index);

    bool contains(EntityId e) const noexcept {
        return assignment_ == nullptr || (e.value < assignment_->size() && (*assignment_)[e.value] == index_);
    }
    std::uint32_t index() const noexcept { return index_; }
    std::span<const EntityId> members() const noexcept { return members_; }

private:
    const std::vector<std::uint32_t>* assignment_ = nullptr;
    std::uint32_t index_ = 0;
    std::vector<EntityId> members_;
};

struct ScoredCandidate {
    Neighbor candidate;
    double weight = 0.0;
};

/// Candidates reachable from `current` inside `scope` (either triple
/// direction, self-loops excluded), scored
///   alpha*cos(current, e') + beta/log2(2 + degree(e')) - gamma*[e' visited]
/// and sorted by weight descending, then (relation, entity) ascending.
/// An empty result signals a dead end.
std::vector<ScoredCandidate> score_relations(const KnowledgeGraph& g, const EmbeddingTable& emb, EntityId current,
                                             std::span<const EntityId> visited, const WalkScope& scope,
                                             const WalkConfig& cfg);

enum class StepOutcome { appended, backtracked, dead_end };

/// Appends one step (adaptive: top non-redundant candidate; uniform_random:
/// uniform over unvisited non-redundant candidates, falling back to any
/// non-redundant one). On a dead end the last step is replaced by its next
/// untried alternative; when none exists the plan is flagged dead_end.
StepOutcome step_walk(const KnowledgeGraph& g, const EmbeddingTable& emb, WalkPlan& plan, const WalkScope& scope,
                      const WalkConfig& cfg, std::mt19937_64& rng);

/// Truncates the plan before the first step whose (relation, next) pair
/// repeats an earlier step's pair.
WalkPlan prune_redundant(WalkPlan plan);

/// Attaches up to max_expansions neighbors e' of step.next (inside scope,
/// not next or current) with cos(next, e') >= sigma, by descending cosine.
WalkStep expand_similar(const KnowledgeGraph& g, const EmbeddingTable& emb, WalkStep step, const WalkScope& scope,
                        const WalkConfig& cfg);

/// Builds one plan from `seed` inside `scope`.
WalkPlan build_plan(const KnowledgeGraph& g, const EmbeddingTable& emb, const WalkScope& scope, EntityId seed,
                    const WalkConfig& cfg, std::mt19937_64& rng);

/// Per community with >= 2 entities: walks_per_community plans. Plans
/// shorter than cfg.min_steps are dropped. Output order is (community,
/// walk index). Identical under Execution::serial and ::parallel.
std::vector<WalkPlan> plan_walks(const KnowledgeGraph& g, const EmbeddingTable& emb, const CommunityPartition& p,
                                 const WalkConfig& cfg, std::size_t walks_per_community,
                                 Execution exec = Execution::parallel);

void write_walk_plans(const std::filesystem::path& path, const KnowledgeGraph& g, std::span<const WalkPlan> plans);
std::vector<WalkPlan> read_walk_plans(const std::filesystem::path& path, const KnowledgeGraph& g);

/// Number of distinct entities over step endpoints and expansions.
std::size_t distinct_entities(const WalkPlan& plan);

} // namespace kgdial
