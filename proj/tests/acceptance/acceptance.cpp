// One PASS/FAIL line per acceptance criterion. Exit status is the number
// of failures not marked as known.
#include "fixtures.hpp"
#include "oracles.hpp"

#include "kgdial/community.hpp"
#include "kgdial/dataset.hpp"
#include "kgdial/dialogue.hpp"
#include "kgdial/embedding.hpp"
#include "kgdial/filtering.hpp"
#include "kgdial/hashing.hpp"
#include "kgdial/metrics.hpp"
#include "kgdial/pipeline.hpp"
#include "kgdial/tokenize.hpp"
#include "kgdial/walker.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace kgdial;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
    /// Non-empty for a failure that is expected and recorded; it is still
    /// printed as FAIL but does not count toward the exit status.
    std::string known_failure = {};
};

std::vector<oracle::WEdge> to_oracle(const UndirectedGraph& g) {
    std::vector<oracle::WEdge> out;
    for (const auto& e : g.edges())
        out.push_back({e.u, e.v, e.weight});
    return out;
}

CommunityPartition singletons(std::size_t n) {
    std::vector<std::uint32_t> labels(n);
    for (std::uint32_t i = 0; i < n; ++i)
        labels[i] = i;
    return CommunityPartition::from_labels(labels);
}

Outcome modularity_oracle() {
    Outcome out;
    const auto barbell = louvain_optimize(fixtures::barbell(), singletons(6), {});
    const double barbell_best = oracle::best_modularity(6, to_oracle(fixtures::barbell()));
    if (std::abs(barbell.modularity - barbell_best) > 1e-9 || std::abs(barbell_best - 0.357142857) > 1e-9)
        out.ok = false;
    std::size_t graphs = 1;
    std::set<std::uint64_t> misses;
    for (const auto& [seed, g] : fixtures::small_graphs()) {
        ++graphs;
        const auto p = louvain_optimize(g, singletons(g.node_count()), {});
        if (std::abs(p.modularity - oracle::best_modularity(g.node_count(), to_oracle(g))) > 1e-9)
            misses.insert(seed);
    }
    const auto documented = fixtures::known_local_optima();
    out.ok = out.ok && misses == documented;
    out.detail = fmt::format("barbell Q={:.9f}, {} graphs with <=8 nodes, {} at a documented local optimum, {} "
                             "undocumented",
                             barbell.modularity, graphs, misses.size(),
                             std::count_if(misses.begin(), misses.end(),
                                           [&](std::uint64_t s) { return documented.count(s) == 0; }));
    return out;
}

Outcome planted_recovery() {
    const auto planted = fixtures::planted_partition();
    const auto g = fixtures::build(planted.triples);
    const auto p = partition_graph(g, embed_graph(g, {}), {});
    const double ari = fixtures::adjusted_rand(p.assignment, fixtures::planted_labels(g, planted));
    return {ari >= 0.9, fmt::format("ARI={:.4f}, {} communities", ari, p.size())};
}

oracle::LabelSet label_set(const Dialogue& d, const KnowledgeGraph& g) {
    oracle::LabelSet s;
    for (const auto& t : d.subgraph.triples())
        s.emplace(g.label(t.head), g.label(t.relation), g.label(t.tail));
    return s;
}

Outcome jaccard_oracle() {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    std::mt19937_64 rng(2024);
    std::vector<Dialogue> ds;
    std::vector<oracle::Item> items;
    for (std::size_t i = 0; i < 50; ++i) {
        std::vector<Triple> ts;
        const std::size_t len = 2 + rng() % 5;
        const std::size_t base = rng() % 100;
        for (std::size_t k = 0; k < len; ++k)
            ts.push_back(g.triples()[base + rng() % 12]);
        ds.push_back(fixtures::make_dialogue(g, fmt::format("d{:02}", i), ts));
        std::set<std::uint32_t> ents;
        for (const auto& t : ds.back().subgraph.triples()) {
            ents.insert(t.head.value);
            ents.insert(t.tail.value);
        }
        items.push_back({ds.back().id, ents.size()});
    }
    std::vector<oracle::LabelSet> sets;
    for (const auto& d : ds)
        sets.push_back(label_set(d, g));
    std::size_t removals = 0, mismatches = 0;
    for (double tau : {0.3, 0.5, 0.7}) {
        const auto got = subgraph_filter(ds, tau).report.removed_jaccard;
        const auto want = oracle::resolve(
            items, [&](std::size_t i, std::size_t j) { return oracle::jaccard(sets[i], sets[j]); }, tau,
            [&](std::size_t i) { return !sets[i].empty(); });
        removals += want.size();
        if (got.size() != want.size()) {
            ++mismatches;
            continue;
        }
        for (std::size_t k = 0; k < got.size(); ++k)
            if (got[k].removed != want[k].removed || got[k].kept != want[k].kept ||
                got[k].similarity != want[k].similarity)
                ++mismatches;
    }
    return {mismatches == 0 && removals > 0,
            fmt::format("50 dialogues, 3 thresholds, {} oracle removals, {} mismatches", removals, mismatches)};
}

Outcome walk_invariants() {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    const auto emb = embed_graph(g, {});
    const auto part = partition_graph(g, emb, {});
    const auto whole = single_community(g);
    std::size_t plans = 0, violations = 0;
    for (std::uint64_t seed = 1; plans < 1000; ++seed) {
        WalkConfig cfg;
        cfg.seed = seed;
        cfg.seed_policy = SeedPolicy::random_seeded;
        cfg.strategy = seed % 2 ? WalkStrategy::adaptive : WalkStrategy::uniform_random;
        const auto& p = seed % 3 ? part : whole;
        for (const auto& plan : plan_walks(g, emb, p, cfg, 50)) {
            ++plans;
            std::set<std::pair<std::uint32_t, std::uint32_t>> tuples;
            for (std::size_t i = 0; i < plan.steps.size(); ++i) {
                const auto& s = plan.steps[i];
                const bool in_scope = p.assignment[s.current.value] == plan.community &&
                                      p.assignment[s.next.value] == plan.community;
                const bool realized = g.contains(s.triple) && s.triple.relation == s.relation &&
                                      ((s.triple.head == s.current && s.triple.tail == s.next) ||
                                       (s.triple.tail == s.current && s.triple.head == s.next));
                const bool chained = i == 0 ? s.current == plan.seed_entity : plan.steps[i - 1].next == s.current;
                const bool fresh = tuples.insert({s.relation.value, s.next.value}).second;
                bool expansions_ok = true;
                for (const auto& e : s.expansions)
                    expansions_ok = expansions_ok && p.assignment[e.entity.value] == plan.community &&
                                    g.contains(e.triple) && e.similarity >= cfg.sigma;
                if (!(in_scope && realized && chained && fresh && expansions_ok))
                    ++violations;
            }
            if (plan.steps.size() < cfg.min_steps || plan.steps.size() > cfg.turns)
                ++violations;
        }
    }
    return {violations == 0, fmt::format("{} plans, {} violations", plans, violations)};
}

std::vector<std::string> all_artifacts() {
    return {artifact::graph,     artifact::graph_stats, artifact::embeddings, artifact::partition,
            artifact::walks,     artifact::dialogues,   artifact::filtered,   artifact::filter_report,
            artifact::train,     artifact::dev,         artifact::test,       artifact::stats};
}

double mean_key_entities(const fs::path& dialogues, const KnowledgeGraph& g) {
    const auto ds = read_dialogues(dialogues, g);
    double sum = 0;
    for (const auto& d : ds)
        sum += static_cast<double>(d.key_entity_count());
    return ds.empty() ? 0.0 : sum / static_cast<double>(ds.size());
}

Outcome end_to_end(const fs::path& root) {
    fixtures::write_tsv(root / "kg.tsv", fixtures::planted_partition().triples);
    PipelineConfig cfg;
    cfg.kg_source = root / "kg.tsv";
    cfg.walk.turns = 8;
    cfg.output_dir = root / "run_a";
    run_pipeline(cfg);
    cfg.output_dir = root / "run_b";
    run_pipeline(cfg);

    std::size_t differing = 0;
    for (const auto& name : all_artifacts())
        if (sha256_file(root / "run_a" / name) != sha256_file(root / "run_b" / name))
            ++differing;
    const auto stats = nlohmann::json::parse(fixtures::slurp(root / "run_a" / artifact::stats));
    const double turns = stats["total"]["avg_turns_per_dialogue"].get<double>();
    const auto n = stats["total"]["total_dialogues"].get<std::size_t>();
    const std::array<std::size_t, 3> sizes{stats["train"]["total_dialogues"].get<std::size_t>(),
                                           stats["dev"]["total_dialogues"].get<std::size_t>(),
                                           stats["test"]["total_dialogues"].get<std::size_t>()};
    const std::array<double, 3> ratio{6.0 / 9, 1.0 / 9, 2.0 / 9};
    bool ratios_ok = sizes[0] + sizes[1] + sizes[2] == n;
    for (std::size_t k = 0; k < 3; ++k)
        ratios_ok = ratios_ok && std::abs(static_cast<double>(sizes[k]) - ratio[k] * static_cast<double>(n)) <= 1.0;
    return {std::abs(turns - 8.0) <= 0.5 && ratios_ok && differing == 0,
            fmt::format("avg turns {:.3f}, split {}/{}/{} of {}, {} differing artifacts", turns, sizes[0], sizes[1],
                        sizes[2], n, differing)};
}

Outcome filter_fixture() {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    std::vector<Dialogue> ds;
    for (std::size_t i = 0; i < 16; ++i)
        ds.push_back(fixtures::make_dialogue(g, fmt::format("orig{}", i),
                                             {g.triples()[3 * i], g.triples()[3 * i + 1], g.triples()[3 * i + 2]}));
    for (std::size_t i = 0; i < 4; ++i)
        ds.push_back(fixtures::make_dialogue(g, fmt::format("dup{}", i), {g.triples()[12 * i], g.triples()[12 * i + 1]}));
    const FilterConfig cfg;
    const auto once = filter_pipeline(ds, cfg);
    const auto twice = filter_pipeline(once.kept, cfg);
    std::map<std::string, const Dialogue*> by_id;
    for (const auto& d : ds)
        by_id[d.id] = &d;
    const auto embed = hashed_embedder(cfg.text_dimension);
    bool sound = true;
    for (const auto& r : once.report.removed_semantic) {
        const double sim = cosine(embed(*by_id.at(r.removed)).vector, embed(*by_id.at(r.kept)).vector);
        sound = sound && std::abs(sim - r.similarity) <= 1e-12 && sim > cfg.semantic_threshold;
    }
    for (const auto& r : once.report.removed_jaccard) {
        const double sim = jaccard_similarity(by_id.at(r.removed)->subgraph, by_id.at(r.kept)->subgraph);
        sound = sound && sim == r.similarity && sim > cfg.jaccard_threshold;
    }
    const std::size_t second_removed = twice.report.removed_semantic.size() + twice.report.removed_jaccard.size();
    return {once.kept.size() == 16 && second_removed == 0 && sound,
            fmt::format("kept {}, second pass removed {}, removal records recompute above threshold: {}", once.kept.size(),
                        second_removed, sound ? "yes" : "no")};
}

std::vector<kernels::Tokens> tokenize_all(const std::vector<std::string>& texts) {
    std::vector<kernels::Tokens> out;
    for (const auto& t : texts)
        out.push_back(word_tokens(t));
    return out;
}

Outcome metric_identities(const fs::path& root) {
    Outcome out;
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    const auto test = read_dialogues(root / "run_a" / artifact::test, g);
    std::vector<std::string> gold;
    for (const auto& d : test)
        for (const auto& t : d.turns)
            gold.push_back(t.answer);
    const auto self = evaluate_pairs(gold, gold);
    double worst = 0;
    for (double b : self.bleu)
        worst = std::max(worst, std::abs(b - 1.0));
    worst = std::max(worst, std::abs(self.rouge_l - 1.0));

    // Test corpora: every generated answer and the test split, each degraded
    // by word drops and swaps at nine rates and five seeds, plus the smallest
    // corpus where a higher order beats a lower one.
    std::vector<std::pair<std::vector<kernels::Tokens>, std::vector<kernels::Tokens>>> corpora;
    std::vector<std::string> all_answers;
    for (const auto& d : read_dialogues(root / "run_a" / artifact::dialogues, g))
        for (const auto& t : d.turns)
            all_answers.push_back(t.answer);
    for (const auto* source : {&gold, &all_answers}) {
        const auto refs = tokenize_all(*source);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            std::mt19937_64 rng(seed);
            for (int level = 1; level <= 9; ++level) {
                std::bernoulli_distribution drop(0.05 * level), swap(0.05 * level);
                auto cands = refs;
                for (auto& c : cands) {
                    kernels::Tokens next;
                    for (const auto& w : c)
                        if (!drop(rng))
                            next.push_back(swap(rng) ? "other" : w);
                    c = next.empty() ? kernels::Tokens{"other"} : next;
                }
                corpora.emplace_back(std::move(cands), refs);
            }
        }
    }
    corpora.push_back({{{"x"}, {"a", "b"}}, {{"y"}, {"a", "b"}}});
    std::size_t comparisons = 0, inversions = 0;
    for (const auto& [cands, refs] : corpora)
        for (int n = 1; n < 4; ++n) {
            ++comparisons;
            if (bleu(cands, refs, n) < bleu(cands, refs, n + 1))
                ++inversions;
        }
    const double hand = bleu(std::vector<kernels::Tokens>{{"the", "cat", "sat"}},
                             std::vector<kernels::Tokens>{{"the", "cat", "sat", "down"}}, 1);
    out.ok = worst <= 1e-9 && inversions == 0 && std::abs(hand - 0.7165) <= 1e-4;
    out.detail = fmt::format("self-eval max |1-x| {:.1e} over {} pairs, BLEU-k < BLEU-(k+1) in {} of {} comparisons "
                             "on {} corpora, hand BLEU-1 {:.6f}",
                             worst, self.n_pairs, inversions, comparisons, corpora.size(), hand);
    return out;
}

Outcome ablation(const fs::path& root) {
    PipelineConfig cfg;
    cfg.kg_source = root / "kg.tsv";
    cfg.mode = Mode::baseline;
    cfg.output_dir = root / "baseline";
    run_pipeline(cfg);
    std::ifstream graph_in(root / "run_a" / artifact::graph);
    const auto g = read_graph(graph_in, TripleFormat::tsv, artifact::graph);
    const double full = mean_key_entities(root / "run_a" / artifact::dialogues, g);
    const double base = mean_key_entities(root / "baseline" / artifact::dialogues, g);
    return {full > base, fmt::format("mean distinct entities per dialogue: full {:.4f}, baseline {:.4f}", full, base)};
}

} // namespace

int main() {
    spdlog::set_level(spdlog::level::warn);
    fixtures::TempDir scratch("acceptance");
    const fs::path root = scratch.path();

    const std::vector<Criterion> criteria{
        {"modularity-oracle", 5, modularity_oracle},
        {"planted-partition-recovery", 10, planted_recovery},
        {"jaccard-oracle", 5, jaccard_oracle},
        {"walk-invariants", 30, walk_invariants},
        {"end-to-end-mock", 120, [&] { return end_to_end(root); }},
        {"filter-idempotence", 5, filter_fixture},
        {"metric-identities", 5, [&] { return metric_identities(root); },
         "geometric-mean BLEU is not monotone in the order on every corpus"},
        {"ablation-full-vs-baseline", 60, [&] { return ablation(root); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = o.ok && secs < c.budget_seconds;
        failures += ok || !c.known_failure.empty() ? 0 : 1;
        std::cout << fmt::format("{} {:<28} {:7.2f}s (budget {:g}s)  {}{}\n", ok ? "PASS" : "FAIL", c.name, secs,
                                 c.budget_seconds, o.detail,
                                 ok || c.known_failure.empty() ? "" : " [known failure: " + c.known_failure + "]");
    }
    return failures;
}
