#include "kgdial/walker.hpp"

#include "kgdial/error.hpp"
#include "kgdial/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <optional>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace kgdial {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2));
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Triple realize(const KnowledgeGraph& g, EntityId from, RelationId relation, EntityId to) {
    const Triple forward{from, relation, to};
    if (g.contains(forward))
        return forward;
    const Triple backward{to, relation, from};
    if (g.contains(backward))
        return backward;
    throw Error("no triple links " + g.label(from) + " and " + g.label(to) + " via " + g.label(relation));
}

// A repeated (current, relation, next) tuple always repeats its (relation, next)
// pair, so checking pairs covers both rules.
bool redundant(std::span<const WalkStep> prefix, const Neighbor& c) {
    return std::any_of(prefix.begin(), prefix.end(),
                       [&](const WalkStep& s) { return s.relation == c.relation && s.next == c.entity; });
}

std::vector<EntityId> visited_from(EntityId seed, std::span<const WalkStep> steps) {
    std::vector<EntityId> visited{seed};
    auto add = [&](EntityId e) {
        if (std::find(visited.begin(), visited.end(), e) == visited.end())
            visited.push_back(e);
    };
    for (const WalkStep& s : steps) {
        add(s.next);
        for (const Expansion& x : s.expansions)
            add(x.entity);
    }
    return visited;
}

std::optional<ScoredCandidate> choose(const KnowledgeGraph& g, const EmbeddingTable& emb, EntityId current,
                                      std::span<const WalkStep> prefix, std::span<const Neighbor> exclude,
                                      std::span<const EntityId> visited, const WalkScope& scope,
                                      const WalkConfig& cfg, std::mt19937_64& rng) {
    const auto ranked = score_relations(g, emb, current, visited, scope, cfg);
    std::vector<ScoredCandidate> allowed;
    for (const auto& c : ranked) {
        if (redundant(prefix, c.candidate))
            continue;
        if (std::find(exclude.begin(), exclude.end(), c.candidate) != exclude.end())
            continue;
        if (cfg.strategy == WalkStrategy::adaptive)
            return c;
        allowed.push_back(c);
    }
    if (allowed.empty())
        return std::nullopt;

    // Uniform strategy: ignore scores, keep a stable (relation, entity) order.
    std::sort(allowed.begin(), allowed.end(),
              [](const auto& a, const auto& b) { return a.candidate < b.candidate; });
    std::vector<ScoredCandidate> fresh;
    for (const auto& c : allowed)
        if (std::find(visited.begin(), visited.end(), c.candidate.entity) == visited.end())
            fresh.push_back(c);
    const auto& pool = fresh.empty() ? allowed : fresh;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    auto chosen = pool[pick(rng)];
    chosen.weight = 0.0;
    return chosen;
}

WalkStep make_step(const KnowledgeGraph& g, std::size_t turn, EntityId current, const ScoredCandidate& c) {
    WalkStep step;
    step.turn = turn;
    step.current = current;
    step.relation = c.candidate.relation;
    step.next = c.candidate.entity;
    step.weight = c.weight;
    step.triple = realize(g, current, c.candidate.relation, c.candidate.entity);
    return step;
}

} // namespace

std::vector<Triple> WalkPlan::triples() const {
    std::vector<Triple> out;
    for (const WalkStep& s : steps) {
        out.push_back(s.triple);
        for (const Expansion& x : s.expansions)
            out.push_back(x.triple);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void WalkConfig::validate() const {
    if (turns < 1)
        throw ConfigError("walk.turns must be >= 1");
    if (alpha < 0 || beta < 0 || gamma < 0)
        throw ConfigError("walk.alpha, walk.beta and walk.gamma must be >= 0");
    if (!(alpha + beta > 0))
        throw ConfigError("walk.alpha + walk.beta must be > 0");
    if (!(sigma >= -1.0 && sigma <= 1.0))
        throw ConfigError("walk.sigma must lie in [-1, 1]");
}

WalkScope WalkScope::whole_graph(std::size_t entity_count) {
    WalkScope scope;
    scope.members_.reserve(entity_count);
    for (std::uint32_t i = 0; i < entity_count; ++i)
        scope.members_.push_back(EntityId{i});
    return scope;
}

WalkScope WalkScope::community(const CommunityPartition& p, std::uint32_t index) {
    if (index >= p.size())
        throw Error("WalkScope: community index out of range");
    WalkScope scope;
    scope.assignment_ = &p.assignment;
    scope.index_ = index;
    scope.members_ = p.communities[index];
    return scope;
}

std::vector<ScoredCandidate> score_relations(const KnowledgeGraph& g, const EmbeddingTable& emb, EntityId current,
                                             std::span<const EntityId> visited, const WalkScope& scope,
                                             const WalkConfig& cfg) {
    auto candidates = g.neighbors(current, Direction::both);
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    std::vector<ScoredCandidate> scored;
    scored.reserve(candidates.size());
    for (const Neighbor& c : candidates) {
        if (c.entity == current || !scope.contains(c.entity))
            continue;
        const bool seen = std::find(visited.begin(), visited.end(), c.entity) != visited.end();
        const double semantic = cfg.alpha == 0.0 ? 0.0 : cfg.alpha * cosine(emb[current], emb[c.entity]);
        const double structural =
            cfg.beta / std::log2(2.0 + static_cast<double>(g.degree(c.entity)));
        scored.push_back({c, semantic + structural - (seen ? cfg.gamma : 0.0)});
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.weight > b.weight; });
    return scored;
}

StepOutcome step_walk(const KnowledgeGraph& g, const EmbeddingTable& emb, WalkPlan& plan, const WalkScope& scope,
                      const WalkConfig& cfg, std::mt19937_64& rng) {
    if (plan.steps.size() >= cfg.turns)
        throw Error("step_walk: plan already has " + std::to_string(cfg.turns) + " steps");
    if (plan.visited.empty())
        plan.visited = visited_from(plan.seed_entity, plan.steps);
    plan.tried.resize(plan.steps.size());

    const EntityId current = plan.steps.empty() ? plan.seed_entity : plan.steps.back().next;
    if (auto c = choose(g, emb, current, plan.steps, {}, plan.visited, scope, cfg, rng)) {
        plan.steps.push_back(make_step(g, plan.steps.size() + 1, current, *c));
        plan.tried.push_back({c->candidate});
        plan.visited = visited_from(plan.seed_entity, plan.steps);
        return StepOutcome::appended;
    }

    if (plan.steps.empty()) {
        plan.dead_end = true;
        return StepOutcome::dead_end;
    }

    // Single-level backtrack: swap the last step for its next untried option.
    const WalkStep last = plan.steps.back();
    const auto prefix = std::span<const WalkStep>(plan.steps).first(plan.steps.size() - 1);
    const auto visited = visited_from(plan.seed_entity, prefix);
    if (auto alt = choose(g, emb, last.current, prefix, plan.tried.back(), visited, scope, cfg, rng)) {
        plan.steps.back() = make_step(g, last.turn, last.current, *alt);
        plan.tried.back().push_back(alt->candidate);
        plan.visited = visited_from(plan.seed_entity, plan.steps);
        return StepOutcome::backtracked;
    }
    plan.dead_end = true;
    return StepOutcome::dead_end;
}

WalkPlan prune_redundant(WalkPlan plan) {
    for (std::size_t i = 1; i < plan.steps.size(); ++i) {
        const WalkStep& s = plan.steps[i];
        const bool repeats = std::any_of(plan.steps.begin(), plan.steps.begin() + static_cast<std::ptrdiff_t>(i),
                                         [&](const WalkStep& e) { return e.relation == s.relation && e.next == s.next; });
        if (repeats) {
            plan.steps.resize(i);
            if (plan.tried.size() > i)
                plan.tried.resize(i);
            plan.visited = visited_from(plan.seed_entity, plan.steps);
            break;
        }
    }
    return plan;
}

WalkStep expand_similar(const KnowledgeGraph& g, const EmbeddingTable& emb, WalkStep step, const WalkScope& scope,
                        const WalkConfig& cfg) {
    step.expansions.clear();
    if (cfg.max_expansions == 0)
        return step;
    std::vector<Expansion> found;
    for (const Neighbor& nb : g.neighbors(step.next, Direction::both)) {
        const EntityId other = nb.entity;
        if (other == step.next || other == step.current || !scope.contains(other))
            continue;
        // neighbors() is sorted by relation first, so the first hit per entity
        // carries the lowest connecting relation id.
        if (std::any_of(found.begin(), found.end(), [&](const Expansion& x) { return x.entity == other; }))
            continue;
        const double sim = cosine(emb[step.next], emb[other]);
        found.push_back({other, nb.relation, sim, realize(g, step.next, nb.relation, other)});
    }
    std::erase_if(found, [&](const Expansion& x) { return x.similarity < cfg.sigma; });
    std::stable_sort(found.begin(), found.end(), [](const Expansion& a, const Expansion& b) {
        return a.similarity > b.similarity || (a.similarity == b.similarity && a.entity < b.entity);
    });
    if (found.size() > cfg.max_expansions)
        found.resize(cfg.max_expansions);
    step.expansions = std::move(found);
    return step;
}

WalkPlan build_plan(const KnowledgeGraph& g, const EmbeddingTable& emb, const WalkScope& scope, EntityId seed,
                    const WalkConfig& cfg, std::mt19937_64& rng) {
    WalkPlan plan;
    plan.community = scope.index();
    plan.seed_entity = seed;
    plan.visited = {seed};
    while (plan.steps.size() < cfg.turns) {
        if (step_walk(g, emb, plan, scope, cfg, rng) == StepOutcome::dead_end)
            break;
        plan = prune_redundant(std::move(plan));
        if (cfg.strategy == WalkStrategy::adaptive && !plan.steps.empty()) {
            plan.steps.back() = expand_similar(g, emb, std::move(plan.steps.back()), scope, cfg);
            plan.visited = visited_from(plan.seed_entity, plan.steps);
        }
    }
    return plan;
}

std::vector<WalkPlan> plan_walks(const KnowledgeGraph& g, const EmbeddingTable& emb, const CommunityPartition& p,
                                 const WalkConfig& cfg, std::size_t walks_per_community, Execution exec) {
    cfg.validate();
    check_partition(p, g.entity_count());
    if (emb.size() != g.entity_count())
        throw Error("plan_walks: embeddings do not cover every entity");

    struct Job {
        std::uint32_t community;
        std::size_t walk;
    };
    std::vector<WalkScope> scopes;
    std::vector<std::vector<EntityId>> by_degree;
    std::vector<Job> jobs;
    for (std::uint32_t c = 0; c < p.size(); ++c) {
        scopes.push_back(WalkScope::community(p, c));
        auto members = p.communities[c];
        std::stable_sort(members.begin(), members.end(),
                         [&](EntityId a, EntityId b) { return g.degree(a) > g.degree(b); });
        by_degree.push_back(std::move(members));
        if (p.communities[c].size() < 2)
            continue;
        for (std::size_t k = 0; k < walks_per_community; ++k)
            jobs.push_back({c, k});
    }

    std::vector<WalkPlan> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    auto run_job = [&](std::size_t j) {
        try {
            const Job job = jobs[j];
            std::mt19937_64 rng(mix(mix(cfg.seed, job.community), job.walk));
            const auto& members = by_degree[job.community];
            EntityId seed;
            if (cfg.seed_policy == SeedPolicy::highest_degree) {
                seed = members[job.walk % members.size()];
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
                seed = members[pick(rng)];
            }
            auto plan = build_plan(g, emb, scopes[job.community], seed, cfg, rng);
            plan.id = fmt::format("c{:04d}-w{:02d}", job.community, job.walk);
            plan.tried.clear();
            results[j] = std::move(plan);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    };

    const auto n = static_cast<std::int64_t>(jobs.size());
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t j = 0; j < n; ++j)
            run_job(static_cast<std::size_t>(j));
    } else {
        for (std::int64_t j = 0; j < n; ++j)
            run_job(static_cast<std::size_t>(j));
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    std::vector<WalkPlan> kept;
    for (auto& plan : results)
        if (plan.steps.size() >= cfg.min_steps)
            kept.push_back(std::move(plan));
    return kept;
}

std::size_t distinct_entities(const WalkPlan& plan) {
    std::unordered_set<std::uint32_t> seen;
    for (const WalkStep& s : plan.steps) {
        seen.insert(s.current.value);
        seen.insert(s.next.value);
        for (const Expansion& x : s.expansions)
            seen.insert(x.entity.value);
    }
    return seen.size();
}

void write_walk_plans(const std::filesystem::path& path, const KnowledgeGraph& g, std::span<const WalkPlan> plans) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    for (const WalkPlan& plan : plans) {
        nlohmann::json steps = nlohmann::json::array();
        for (const WalkStep& s : plan.steps)
            steps.push_back(json::step(g, s));
        nlohmann::json record{{"id", plan.id},
                              {"community", plan.community},
                              {"seed", g.label(plan.seed_entity)},
                              {"dead_end", plan.dead_end},
                              {"steps", steps}};
        out << record.dump() << '\n';
    }
}

std::vector<WalkPlan> read_walk_plans(const std::filesystem::path& path, const KnowledgeGraph& g) {
    if (!std::filesystem::exists(path))
        throw Error("missing walk plans: " + path.string());
    std::vector<WalkPlan> plans;
    json::for_each_record(path, [&](const nlohmann::json& j, std::size_t) {
        WalkPlan plan;
        plan.id = j.at("id").get<std::string>();
        plan.community = j.at("community").get<std::uint32_t>();
        plan.seed_entity = g.entity(j.at("seed").get<std::string>());
        plan.dead_end = j.at("dead_end").get<bool>();
        for (const auto& s : j.at("steps"))
            plan.steps.push_back(json::step(g, s));
        plan.visited = visited_from(plan.seed_entity, plan.steps);
        plans.push_back(std::move(plan));
    });
    return plans;
}

} // namespace kgdial
