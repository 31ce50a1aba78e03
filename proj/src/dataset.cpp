#include "kgdial/dataset.hpp"

#include "kgdial/error.hpp"
#include "kgdial/tokenize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace kgdial {

void SplitRatios::validate() const {
    if (!(train > 0.0 && dev > 0.0 && test > 0.0))
        throw ConfigError("split ratios must be positive");
    if (std::abs(train + dev + test - 1.0) > 1e-9)
        throw ConfigError("split ratios must sum to 1 (got " + std::to_string(train + dev + test) + ")");
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
    const std::array<double, 3> exact{n * ratios.train, n * ratios.dev, n * ratios.test};
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        // Snap values within rounding noise of an integer before flooring.
        const double snapped = std::abs(exact[k] - std::round(exact[k])) < 1e-6 ? std::round(exact[k]) : exact[k];
        sizes[k] = static_cast<std::size_t>(std::floor(snapped));
        remainder[k] = snapped - static_cast<double>(sizes[k]);
        assigned += sizes[k];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned)
        ++sizes[order[k]];
    return sizes;
}

DatasetBundle split(std::span<const Dialogue> dialogues, const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    if (dialogues.size() < 3)
        throw Error("split needs at least 3 dialogues, got " + std::to_string(dialogues.size()));
    std::vector<std::size_t> order(dialogues.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto sizes = split_sizes(dialogues.size(), ratios);
    DatasetBundle bundle;
    bundle.split_seed = seed;
    const std::array<std::vector<Dialogue>*, 3> parts{&bundle.train, &bundle.dev, &bundle.test};
    std::size_t pos = 0;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < sizes[k]; ++i)
            parts[k]->push_back(dialogues[order[pos++]]);
    bundle.stats = compute_stats(bundle);
    return bundle;
}

SplitStats compute_split_stats(std::span<const Dialogue> dialogues) {
    SplitStats s;
    s.total_dialogues = dialogues.size();
    s.empty = dialogues.empty();
    if (s.empty)
        return s;
    std::size_t turns = 0;
    std::size_t tokens = 0;
    for (const Dialogue& d : dialogues) {
        turns += d.turns.size();
        for (const DialogueTurn& t : d.turns)
            tokens += word_count(t.question) + word_count(t.answer);
        s.total_key_entities += d.key_entity_count();
    }
    const auto n = static_cast<double>(dialogues.size());
    s.avg_turns_per_dialogue = static_cast<double>(turns) / n;
    s.avg_tokens_per_dialogue = static_cast<double>(tokens) / n;
    s.avg_key_entities_per_dialogue = static_cast<double>(s.total_key_entities) / n;
    return s;
}

DatasetStats compute_stats(const DatasetBundle& bundle) {
    DatasetStats stats;
    stats.train = compute_split_stats(bundle.train);
    stats.dev = compute_split_stats(bundle.dev);
    stats.test = compute_split_stats(bundle.test);
    std::vector<Dialogue> all;
    all.reserve(bundle.train.size() + bundle.dev.size() + bundle.test.size());
    for (const auto* part : {&bundle.train, &bundle.dev, &bundle.test})
        all.insert(all.end(), part->begin(), part->end());
    stats.total = compute_split_stats(all);
    return stats;
}

namespace {

nlohmann::json to_json(const SplitStats& s) {
    return {{"total_dialogues", s.total_dialogues},
            {"avg_turns_per_dialogue", s.avg_turns_per_dialogue},
            {"avg_tokens_per_dialogue", s.avg_tokens_per_dialogue},
            {"total_key_entities", s.total_key_entities},
            {"avg_key_entities_per_dialogue", s.avg_key_entities_per_dialogue},
            {"empty", s.empty}};
}

} // namespace

void write_stats(const std::filesystem::path& path, const DatasetStats& stats) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    const nlohmann::json j{{"train", to_json(stats.train)},
                           {"dev", to_json(stats.dev)},
                           {"test", to_json(stats.test)},
                           {"total", to_json(stats.total)}};
    out << j.dump(2) << '\n';
}

} // namespace kgdial
