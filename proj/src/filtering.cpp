#include "kgdial/filtering.hpp"

#include "kgdial/error.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

namespace kgdial {

void FilterConfig::validate() const {
    if (!(semantic_threshold >= 0.0 && semantic_threshold <= 1.0))
        throw ConfigError("filter.semantic_threshold must be in [0, 1]");
    if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0))
        throw ConfigError("filter.jaccard_threshold must be in [0, 1]");
    if (text_dimension == 0)
        throw ConfigError("filter.text_dimension must be > 0");
}

std::string dialogue_text(const Dialogue& d) {
    std::string text;
    for (const DialogueTurn& t : d.turns) {
        text += t.question;
        text += '\n';
        text += t.answer;
        text += '\n';
    }
    return text;
}

DialogueEmbedder hashed_embedder(std::size_t dimension) {
    return [dimension](const Dialogue& d) { return embed_text(dialogue_text(d), dimension); };
}

DialogueEmbedder lookup_embedder(std::unordered_map<std::string, TextEmbedding> vectors) {
    return [vectors = std::move(vectors)](const Dialogue& d) {
        auto it = vectors.find(d.id);
        return it == vectors.end() ? TextEmbedding{} : it->second;
    };
}

std::vector<std::size_t> survivor_order(std::span<const Dialogue> dialogues, KeepPolicy /*only one policy*/) {
    std::vector<std::size_t> order(dialogues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dialogues[a].key_entity_count() > dialogues[b].key_entity_count();
    });
    return order;
}

namespace {

FilterResult collect(std::span<const Dialogue> dialogues, const std::vector<bool>& removed, FilterReport report) {
    FilterResult result;
    for (std::size_t i = 0; i < dialogues.size(); ++i)
        if (!removed[i])
            result.kept.push_back(dialogues[i]);
    report.input_count = dialogues.size();
    report.kept_count = result.kept.size();
    result.report = std::move(report);
    return result;
}

} // namespace

FilterResult semantic_filter(std::span<const Dialogue> dialogues, const DialogueEmbedder& embed, double threshold,
                             KeepPolicy policy, Execution exec) {
    const std::size_t n = dialogues.size();
    std::vector<TextEmbedding> vectors(n);
    for (std::size_t i = 0; i < n; ++i)
        vectors[i] = embed(dialogues[i]);

    FilterReport report;
    std::vector<bool> removed(n, false);
    EmbeddingTable pool;
    std::vector<std::size_t> pool_owner;
    for (std::size_t i : survivor_order(dialogues, policy)) {
        if (!vectors[i].embeddable)
            continue;
        if (pool.size() > 0) {
            const auto best = exec == Execution::parallel ? kernels::best_cosine_omp(vectors[i].vector, pool)
                                                          : kernels::best_cosine_serial(vectors[i].vector, pool);
            if (best.similarity > threshold) {
                removed[i] = true;
                report.removed_semantic.push_back(
                    {dialogues[i].id, dialogues[pool_owner[static_cast<std::size_t>(best.index)]].id, best.similarity});
                continue;
            }
        }
        pool.push_back(vectors[i].vector);
        pool_owner.push_back(i);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!vectors[i].embeddable)
            report.unembeddable.push_back(dialogues[i].id);
    return collect(dialogues, removed, std::move(report));
}

FilterResult subgraph_filter(std::span<const Dialogue> dialogues, double tau, KeepPolicy policy, Execution exec) {
    const std::size_t n = dialogues.size();
    std::vector<kernels::TripleSet> sets(n);
    std::map<Triple, std::vector<std::uint32_t>> postings;
    for (std::size_t i = 0; i < n; ++i) {
        const auto triples = dialogues[i].subgraph.triples();
        sets[i].assign(triples.begin(), triples.end());
        for (const Triple& t : triples)
            postings[t].push_back(static_cast<std::uint32_t>(i));
    }

    std::vector<kernels::IndexPair> pairs;
    for (const auto& [triple, ids] : postings)
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b)
                pairs.emplace_back(ids[a], ids[b]);
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<double> sims(pairs.size());
    if (exec == Execution::parallel)
        kernels::jaccard_pairs_omp(sets, pairs, sims);
    else
        kernels::jaccard_pairs_serial(sets, pairs, sims);

    std::vector<std::vector<std::pair<std::uint32_t, double>>> conflicts(n);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (sims[k] > tau) {
            conflicts[pairs[k].first].emplace_back(pairs[k].second, sims[k]);
            conflicts[pairs[k].second].emplace_back(pairs[k].first, sims[k]);
        }
    }

    FilterReport report;
    std::vector<bool> removed(n, false);
    constexpr std::size_t not_kept = static_cast<std::size_t>(-1);
    std::vector<std::size_t> kept_rank(n, not_kept);
    std::size_t rank = 0;
    for (std::size_t i : survivor_order(dialogues, policy)) {
        if (sets[i].empty()) {
            kept_rank[i] = rank++;
            continue;
        }
        std::size_t partner = not_kept;
        double best = -1.0;
        for (const auto& [j, sim] : conflicts[i]) {
            if (kept_rank[j] == not_kept)
                continue;
            if (sim > best || (sim == best && kept_rank[j] < kept_rank[partner])) {
                partner = j;
                best = sim;
            }
        }
        if (partner != not_kept) {
            removed[i] = true;
            report.removed_jaccard.push_back({dialogues[i].id, dialogues[partner].id, best});
        } else {
            kept_rank[i] = rank++;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (sets[i].empty())
            report.empty_subgraph.push_back(dialogues[i].id);
    return collect(dialogues, removed, std::move(report));
}

FilterResult filter_pipeline(std::span<const Dialogue> dialogues, const FilterConfig& cfg, Execution exec) {
    cfg.validate();
    const DialogueEmbedder embed = cfg.text_embeddings
                                       ? lookup_embedder(load_text_embeddings(*cfg.text_embeddings, cfg.text_dimension))
                                       : hashed_embedder(cfg.text_dimension);
    auto semantic = [&](std::span<const Dialogue> d) {
        return semantic_filter(d, embed, cfg.semantic_threshold, cfg.keep_policy, exec);
    };
    auto subgraph = [&](std::span<const Dialogue> d) {
        return subgraph_filter(d, cfg.jaccard_threshold, cfg.keep_policy, exec);
    };

    FilterResult first = cfg.subgraph_first ? subgraph(dialogues) : semantic(dialogues);
    FilterResult second = cfg.subgraph_first ? semantic(first.kept) : subgraph(first.kept);

    FilterReport report = first.report;
    report.removed_semantic.insert(report.removed_semantic.end(), second.report.removed_semantic.begin(),
                                   second.report.removed_semantic.end());
    report.removed_jaccard.insert(report.removed_jaccard.end(), second.report.removed_jaccard.begin(),
                                  second.report.removed_jaccard.end());
    if (report.unembeddable.empty())
        report.unembeddable = second.report.unembeddable;
    if (report.empty_subgraph.empty())
        report.empty_subgraph = second.report.empty_subgraph;
    report.input_count = dialogues.size();
    report.kept_count = second.kept.size();
    return {std::move(second.kept), std::move(report)};
}

void write_filter_report(const std::filesystem::path& path, const FilterReport& report) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    out << nlohmann::json{{"type", "summary"},
                          {"input_count", report.input_count},
                          {"kept_count", report.kept_count},
                          {"removed_semantic", report.removed_semantic.size()},
                          {"removed_jaccard", report.removed_jaccard.size()}}
               .dump()
        << '\n';
    auto removals = [&](const std::vector<Removal>& list, const char* stage) {
        for (const Removal& r : list)
            out << nlohmann::json{{"type", "removed"},
                                  {"stage", stage},
                                  {"removed", r.removed},
                                  {"kept", r.kept},
                                  {"similarity", r.similarity}}
                       .dump()
                << '\n';
    };
    removals(report.removed_semantic, "semantic");
    removals(report.removed_jaccard, "jaccard");
    for (const auto& id : report.unembeddable)
        out << nlohmann::json{{"type", "flag"}, {"flag", "unembeddable"}, {"id", id}}.dump() << '\n';
    for (const auto& id : report.empty_subgraph)
        out << nlohmann::json{{"type", "flag"}, {"flag", "empty_subgraph"}, {"id", id}}.dump() << '\n';
}

} // namespace kgdial
