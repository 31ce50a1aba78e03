#include "fixtures.hpp"

#include "kgdial/dataset.hpp"
#include "kgdial/error.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cctype>
#include <random>
#include <set>

using namespace kgdial;

namespace {

std::vector<Dialogue> corpus(const KnowledgeGraph& g, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Dialogue> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Triple> ts;
        const std::size_t len = 3 + rng() % 6;
        for (std::size_t k = 0; k < len; ++k)
            ts.push_back(g.triples()[rng() % g.triple_count()]);
        out.push_back(fixtures::make_dialogue(g, "d" + std::to_string(i), ts));
    }
    return out;
}

// ASCII word counter: runs of [A-Za-z0-9_].
std::size_t count_words(const std::string& s) {
    std::size_t n = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        const bool w = std::isalnum(c) || c == '_';
        if (w && !in_word)
            ++n;
        in_word = w;
    }
    return n;
}

std::set<std::string> id_set(const std::vector<Dialogue>& ds) {
    std::set<std::string> out;
    for (const auto& d : ds)
        out.insert(d.id);
    return out;
}

} // namespace

TEST_CASE("split sizes") {
    const SplitRatios r;
    CHECK(split_sizes(9, r) == std::array<std::size_t, 3>{6, 1, 2});
    CHECK(split_sizes(7200, r) == std::array<std::size_t, 3>{4800, 800, 1600});
    for (std::size_t n = 3; n < 200; ++n) {
        const auto s = split_sizes(n, r);
        CHECK(s[0] + s[1] + s[2] == n);
        CHECK(std::abs(static_cast<double>(s[0]) - n * r.train) < 1.0);
        CHECK(std::abs(static_cast<double>(s[1]) - n * r.dev) < 1.0);
        CHECK(std::abs(static_cast<double>(s[2]) - n * r.test) < 1.0);
    }
}

TEST_CASE("ratio validation") {
    SplitRatios r{0.6, 0.1, 0.2};
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r = {0.7, 0.0, 0.3};
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r = {0.6, 0.2, 0.2};
    CHECK_NOTHROW(r.validate());
}

TEST_CASE("split partitions the input deterministically") {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    const auto ds = corpus(g, 45, 1);
    const auto a = split(ds, {}, 42);
    const auto b = split(ds, {}, 42);
    const auto c = split(ds, {}, 43);
    CHECK(a.train.size() == 30);
    CHECK(a.dev.size() == 5);
    CHECK(a.test.size() == 10);
    CHECK(id_set(a.train) == id_set(b.train));
    CHECK(id_set(a.test) == id_set(b.test));
    CHECK(id_set(a.train) != id_set(c.train));
    std::set<std::string> all;
    for (const auto* part : {&a.train, &a.dev, &a.test})
        for (const auto& d : *part)
            CHECK(all.insert(d.id).second);
    CHECK(all == id_set(ds));
}

TEST_CASE("fewer than three dialogues is an error") {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    const auto ds = corpus(g, 2, 1);
    CHECK_THROWS_AS(split(ds, {}, 42), Error);
}

TEST_CASE("stats match an independent count") {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    const auto ds = corpus(g, 10, 3);
    const auto s = compute_split_stats(ds);
    double turns = 0, tokens = 0;
    std::size_t entities = 0;
    for (const auto& d : ds) {
        turns += static_cast<double>(d.turns.size());
        for (const auto& t : d.turns)
            tokens += static_cast<double>(count_words(t.question) + count_words(t.answer));
        std::set<std::uint32_t> e;
        for (const auto& t : d.subgraph.triples()) {
            e.insert(t.head.value);
            e.insert(t.tail.value);
        }
        entities += e.size();
    }
    CHECK(s.total_dialogues == 10);
    CHECK_FALSE(s.empty);
    CHECK(s.avg_turns_per_dialogue == doctest::Approx(turns / 10).epsilon(1e-12));
    CHECK(s.avg_tokens_per_dialogue == doctest::Approx(tokens / 10).epsilon(1e-12));
    CHECK(s.total_key_entities == entities);
    CHECK(s.avg_key_entities_per_dialogue == doctest::Approx(entities / 10.0).epsilon(1e-12));
}

TEST_CASE("one dialogue with eight turns") {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    std::vector<Triple> ts(g.triples().begin(), g.triples().begin() + 8);
    const std::vector<Dialogue> ds{fixtures::make_dialogue(g, "x", ts)};
    const auto s = compute_split_stats(ds);
    CHECK(s.avg_turns_per_dialogue == 8.0);
    CHECK(s.avg_key_entities_per_dialogue == static_cast<double>(ds[0].key_entity_count()));
}

TEST_CASE("empty split is flagged with zeros") {
    const auto s = compute_split_stats({});
    CHECK(s.empty);
    CHECK(s.total_dialogues == 0);
    CHECK(s.avg_turns_per_dialogue == 0.0);
    CHECK(s.avg_tokens_per_dialogue == 0.0);
    CHECK(s.total_key_entities == 0);
}

TEST_CASE("totals are sums over splits and the stats file is recomputable") {
    const auto g = fixtures::build(fixtures::planted_partition().triples);
    const auto ds = corpus(g, 4, 9);
    const auto bundle = split(ds, {}, 42);
    CHECK(bundle.dev.empty());
    const auto st = compute_stats(bundle);
    CHECK(st.dev.empty);
    CHECK(st.total.total_dialogues == 4);
    CHECK(st.total.total_key_entities ==
          st.train.total_key_entities + st.dev.total_key_entities + st.test.total_key_entities);
    const auto fresh = compute_split_stats(ds);
    CHECK(st.total.avg_tokens_per_dialogue == doctest::Approx(fresh.avg_tokens_per_dialogue).epsilon(1e-12));

    fixtures::TempDir dir("stats");
    write_stats(dir.path() / "stats.json", st);
    const auto j = nlohmann::json::parse(fixtures::slurp(dir.path() / "stats.json"));
    CHECK(j["total"]["total_dialogues"] == 4);
    CHECK(j["dev"]["empty"] == true);
}
