#include "kgdial/community.hpp"

#include "kgdial/error.hpp"
#include "kgdial/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace kgdial {

namespace {

constexpr double kGainTolerance = 1e-12;

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0u); }

    std::uint32_t find(std::uint32_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b)
            parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::uint32_t> parent_;
};

/// Renumbers labels 0..k-1 in order of first appearance. Returns k.
std::uint32_t compact(std::vector<std::uint32_t>& labels) {
    std::unordered_map<std::uint32_t, std::uint32_t> remap;
    for (auto& label : labels) {
        auto [it, inserted] = remap.try_emplace(label, static_cast<std::uint32_t>(remap.size()));
        label = it->second;
    }
    return static_cast<std::uint32_t>(remap.size());
}

/// Node-level local moving; returns the number of moves made.
std::size_t local_moving(const UndirectedGraph& graph, std::vector<std::uint32_t>& community) {
    const std::size_t n = graph.node_count();
    const double m2 = graph.total_strength();
    if (m2 == 0.0)
        return 0;

    std::vector<double> total(n, 0.0);
    std::vector<std::uint32_t> members(n, 0);
    for (std::uint32_t i = 0; i < n; ++i) {
        total[community[i]] += graph.strength(i);
        ++members[community[i]];
    }
    std::vector<std::uint32_t> vacant;
    for (std::uint32_t c = n; c-- > 0;)
        if (members[c] == 0)
            vacant.push_back(c);

    std::vector<double> link(n, 0.0);
    std::vector<std::uint32_t> touched;
    std::size_t all_moves = 0;
    for (int sweep = 0; sweep < 10000; ++sweep) {
        std::size_t moves = 0;
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint32_t home = community[i];
            const double ki = graph.strength(i);
            const auto neighbors = graph.neighbors(i);
            const auto weights = graph.weights(i);
            touched.clear();
            for (std::size_t k = 0; k < neighbors.size(); ++k) {
                const std::uint32_t c = community[neighbors[k]];
                if (link[c] == 0.0)
                    touched.push_back(c);
                link[c] += weights[k];
            }
            total[home] -= ki;

            std::uint32_t best = home;
            double best_gain = link[home] - total[home] * ki / m2;
            std::sort(touched.begin(), touched.end());
            for (std::uint32_t c : touched) {
                if (c == home)
                    continue;
                const double gain = link[c] - total[c] * ki / m2;
                if (gain > best_gain + kGainTolerance) {
                    best = c;
                    best_gain = gain;
                }
            }
            for (std::uint32_t c : touched)
                link[c] = 0.0;
            // An empty community has gain zero.
            bool isolate = false;
            if (best_gain < -kGainTolerance && members[home] > 1 && !vacant.empty()) {
                best = vacant.back();
                best_gain = 0.0;
                isolate = true;
            }

            total[best] += ki;
            if (best != home) {
                if (isolate)
                    vacant.pop_back();
                --members[home];
                ++members[best];
                if (members[home] == 0)
                    vacant.push_back(home);
                community[i] = best;
                ++moves;
            }
        }
        all_moves += moves;
        if (moves == 0)
            break;
    }
    return all_moves;
}

UndirectedGraph aggregate(const UndirectedGraph& graph, const std::vector<std::uint32_t>& community,
                          std::uint32_t k) {
    std::vector<UndirectedGraph::Edge> edges;
    for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
        if (graph.loop(u) != 0.0)
            edges.push_back({community[u], community[u], graph.loop(u) / 2.0});
        const auto neighbors = graph.neighbors(u);
        const auto weights = graph.weights(u);
        for (std::size_t j = 0; j < neighbors.size(); ++j)
            if (u < neighbors[j])
                edges.push_back({community[u], community[neighbors[j]], weights[j]});
    }
    return UndirectedGraph(k, edges);
}

/// Folds communities smaller than `min_size` into the adjacent community with
/// the highest summed cosine over crossing edges.
std::vector<std::uint32_t> merge_small(const UndirectedGraph& graph, const EmbeddingTable& emb,
                                       std::vector<std::uint32_t> labels, std::size_t min_size) {
    const std::size_t n = labels.size();
    std::uint32_t k = compact(labels);
    std::vector<std::vector<std::uint32_t>> members(k);
    for (std::uint32_t v = 0; v < n; ++v)
        members[labels[v]].push_back(v);

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::uint32_t> order;
        for (std::uint32_t c = 0; c < k; ++c)
            if (!members[c].empty() && members[c].size() < min_size)
                order.push_back(c);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return members[a].size() < members[b].size(); });
        for (std::uint32_t c : order) {
            if (members[c].empty() || members[c].size() >= min_size)
                continue;
            std::map<std::uint32_t, double> affinity;
            for (std::uint32_t u : members[c])
                for (std::uint32_t v : graph.neighbors(u))
                    if (labels[v] != c)
                        affinity[labels[v]] += cosine(emb.row(u), emb.row(v));
            if (affinity.empty())
                continue;
            auto best = affinity.begin();
            for (auto it = affinity.begin(); it != affinity.end(); ++it)
                if (it->second > best->second)
                    best = it;
            const std::uint32_t target = best->first;
            for (std::uint32_t u : members[c])
                labels[u] = target;
            members[target].insert(members[target].end(), members[c].begin(), members[c].end());
            members[c].clear();
            changed = true;
        }
    }
    return labels;
}

} // namespace

CommunityPartition CommunityPartition::from_labels(std::span<const std::uint32_t> labels) {
    CommunityPartition p;
    p.assignment.assign(labels.begin(), labels.end());
    const std::uint32_t k = compact(p.assignment);
    p.communities.resize(k);
    for (std::uint32_t v = 0; v < p.assignment.size(); ++v)
        p.communities[p.assignment[v]].push_back(EntityId{v});
    return p;
}

void PartitionConfig::validate() const {
    if (!(theta >= -1.0 && theta <= 1.0))
        throw ConfigError("partition.theta must lie in [-1, 1]");
    if (max_passes < 1)
        throw ConfigError("partition.max_passes must be >= 1");
    if (min_community_size < 1)
        throw ConfigError("partition.min_community_size must be >= 1");
    if (!(epsilon >= 0.0))
        throw ConfigError("partition.epsilon must be >= 0");
}

void check_partition(const CommunityPartition& p, std::size_t entity_count) {
    if (p.assignment.size() != entity_count)
        throw Error("partition does not cover every entity");
    std::vector<bool> seen(entity_count, false);
    for (std::size_t c = 0; c < p.communities.size(); ++c) {
        if (p.communities[c].empty())
            throw Error("partition has an empty community");
        for (EntityId e : p.communities[c]) {
            if (e.value >= entity_count || seen[e.value])
                throw Error("partition communities overlap or reference unknown entities");
            if (p.assignment[e.value] != c)
                throw Error("partition assignment disagrees with community lists");
            seen[e.value] = true;
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw Error("partition does not cover every entity");
}

CommunityPartition initialize_singletons(const KnowledgeGraph& g) {
    if (g.entity_count() == 0)
        throw Error("initialize_singletons: empty graph");
    std::vector<std::uint32_t> labels(g.entity_count());
    std::iota(labels.begin(), labels.end(), 0u);
    auto p = CommunityPartition::from_labels(labels);
    p.modularity = modularity(g, p);
    return p;
}

CommunityPartition propose_merges(const KnowledgeGraph& g, const EmbeddingTable& emb, const CommunityPartition& p,
                                  double theta) {
    if (emb.size() != g.entity_count())
        throw Error("propose_merges: embeddings cover " + std::to_string(emb.size()) + " of " +
                    std::to_string(g.entity_count()) + " entities");
    check_partition(p, g.entity_count());

    const auto base = erase_labels(g);
    const auto edges = base.edges();
    std::vector<double> sims(edges.size());
    kernels::edge_cosines_omp(emb, edges, sims);
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sims[a] > sims[b]; });

    DisjointSets sets(g.entity_count());
    for (const auto& community : p.communities)
        for (EntityId e : community)
            sets.unite(community.front().value, e.value);
    for (std::size_t idx : order) {
        if (!(sims[idx] > theta))
            break;
        sets.unite(edges[idx].u, edges[idx].v);
    }

    std::vector<std::uint32_t> labels(g.entity_count());
    for (std::uint32_t v = 0; v < labels.size(); ++v)
        labels[v] = sets.find(v);
    auto merged = CommunityPartition::from_labels(labels);
    merged.modularity = modularity(base, merged.assignment);
    return merged;
}

double modularity(const UndirectedGraph& graph, std::span<const std::uint32_t> assignment) {
    const double m2 = graph.total_strength();
    if (m2 == 0.0)
        return 0.0;
    const std::uint32_t k =
        assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
    std::vector<double> inside(k, 0.0), total(k, 0.0);
    for (std::uint32_t u = 0; u < graph.node_count(); ++u) {
        const std::uint32_t c = assignment[u];
        total[c] += graph.strength(u);
        inside[c] += graph.loop(u);
        const auto neighbors = graph.neighbors(u);
        const auto weights = graph.weights(u);
        for (std::size_t j = 0; j < neighbors.size(); ++j)
            if (assignment[neighbors[j]] == c)
                inside[c] += weights[j];
    }
    double q = 0.0;
    for (std::uint32_t c = 0; c < k; ++c) {
        const double share = total[c] / m2;
        q += inside[c] / m2 - share * share;
    }
    return q;
}

double modularity(const KnowledgeGraph& g, const CommunityPartition& p) {
    return modularity(erase_labels(g), p.assignment);
}

UndirectedGraph similarity_weighted(const UndirectedGraph& graph, const EmbeddingTable& emb, double floor) {
    if (emb.size() != graph.node_count())
        throw Error("similarity_weighted: embeddings do not cover every node");
    auto edges = graph.edges();
    std::vector<double> sims(edges.size());
    kernels::edge_cosines_omp(emb, edges, sims);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i].weight = std::max(floor, sims[i]);
    return UndirectedGraph(graph.node_count(), edges);
}

CommunityPartition louvain_optimize(const UndirectedGraph& graph, const CommunityPartition& p,
                                    const PartitionConfig& cfg) {
    cfg.validate();
    check_partition(p, graph.node_count());

    std::vector<std::uint32_t> best = p.assignment;
    double best_q = modularity(graph, best);
    const double input_q = best_q;

    // Multilevel passes, then node-level refinement of the projected result;
    // repeated while refinement finds a better partition.
    for (std::size_t round = 0; round < cfg.max_passes; ++round) {
        UndirectedGraph level = graph;
        std::vector<std::uint32_t> node_of(graph.node_count());
        std::iota(node_of.begin(), node_of.end(), 0u);
        std::vector<std::uint32_t> community = best;
        compact(community);

        for (std::size_t pass = 0; pass < cfg.max_passes; ++pass) {
            const double before = best_q;
            const std::size_t moves = local_moving(level, community);
            const std::uint32_t k = compact(community);

            std::vector<std::uint32_t> projected(graph.node_count());
            for (std::size_t v = 0; v < projected.size(); ++v)
                projected[v] = community[node_of[v]];
            const double q = modularity(graph, projected);
            if (q < before - 1e-9)
                throw std::logic_error("louvain_optimize: modularity decreased within a pass");
            if (q > best_q) {
                best = projected;
                best_q = q;
            }
            spdlog::debug("louvain round {} pass {}: {} moves, {} communities, Q={:.9f}", round, pass, moves, k, q);

            if (k <= 1 || (pass > 0 && (moves == 0 || q - before < cfg.epsilon)))
                break;
            level = aggregate(level, community, k);
            for (auto& v : node_of)
                v = community[v];
            community.resize(k);
            std::iota(community.begin(), community.end(), 0u);
        }

        auto refined = best;
        compact(refined);
        local_moving(graph, refined);
        const double q = modularity(graph, refined);
        if (q <= best_q + cfg.epsilon)
            break;
        best = std::move(refined);
        best_q = q;
    }

    auto result = CommunityPartition::from_labels(best);
    result.modularity = modularity(graph, result.assignment);
    if (result.modularity < input_q - 1e-9)
        throw std::logic_error("louvain_optimize: output modularity below input");
    return result;
}

CommunityPartition louvain_optimize(const KnowledgeGraph& g, const CommunityPartition& p,
                                    const PartitionConfig& cfg) {
    return louvain_optimize(erase_labels(g), p, cfg);
}

CommunityPartition partition_graph(const KnowledgeGraph& g, const EmbeddingTable& emb, const PartitionConfig& cfg) {
    cfg.validate();
    const auto base = erase_labels(g);
    const auto optimized_over =
        cfg.use_embedding_weights ? similarity_weighted(base, emb, cfg.weight_floor) : base;

    const auto singletons = initialize_singletons(g);
    const auto merged = propose_merges(g, emb, singletons, cfg.theta);
    const auto refined = louvain_optimize(optimized_over, merged, cfg);

    auto labels = merge_small(base, emb, refined.assignment, cfg.min_community_size);
    auto result = CommunityPartition::from_labels(labels);
    result.modularity = modularity(optimized_over, result.assignment);
    result.weighted = cfg.use_embedding_weights;
    spdlog::info("partition: {} communities, Q={:.6f}", result.size(), result.modularity);
    return result;
}

CommunityPartition single_community(const KnowledgeGraph& g) {
    std::vector<std::uint32_t> labels(g.entity_count(), 0);
    auto p = CommunityPartition::from_labels(labels);
    p.modularity = 0.0;
    return p;
}

void write_partition(const std::filesystem::path& path, const KnowledgeGraph& g, const CommunityPartition& p) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    std::map<std::size_t, std::size_t> histogram;
    for (const auto& c : p.communities)
        ++histogram[c.size()];
    nlohmann::json hist = nlohmann::json::object();
    for (auto [size, count] : histogram)
        hist[std::to_string(size)] = count;
    nlohmann::json summary{{"type", "summary"},
                           {"communities", p.size()},
                           {"modularity", p.modularity},
                           {"weighted", p.weighted},
                           {"sizes_histogram", hist}};
    out << summary.dump() << '\n';
    for (std::uint32_t v = 0; v < p.assignment.size(); ++v) {
        nlohmann::json record{{"type", "assignment"}, {"entity", g.label(EntityId{v})}, {"community", p.assignment[v]}};
        out << record.dump() << '\n';
    }
}

CommunityPartition read_partition(const std::filesystem::path& path, const KnowledgeGraph& g) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open partition file " + path.string());
    std::vector<std::uint32_t> labels(g.entity_count(), UINT32_MAX);
    double q = 0.0;
    bool weighted = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("type"))
            throw ParseError(path.string(), line_no, "malformed partition record");
        if (record["type"] == "summary") {
            q = record.value("modularity", 0.0);
            weighted = record.value("weighted", false);
            continue;
        }
        const auto e = g.find_entity(record.at("entity").get<std::string>());
        if (!e)
            throw ParseError(path.string(), line_no, "unknown entity");
        labels[e->value] = record.at("community").get<std::uint32_t>();
    }
    if (std::find(labels.begin(), labels.end(), UINT32_MAX) != labels.end())
        throw ParseError(path.string(), 0, "partition does not assign every entity");
    auto p = CommunityPartition::from_labels(labels);
    p.modularity = q;
    p.weighted = weighted;
    return p;
}

} // namespace kgdial
