#pragma once

#include "kgdial/dialogue.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace kgdial {

struct SplitRatios {
    double train = 6.0 / 9.0;
    double dev = 1.0 / 9.0;
    double test = 2.0 / 9.0;

    /// Positive and summing to 1 within 1e-9.
    void validate() const;
};

/// Largest-remainder sizes of n * ratio; leftover units go to the largest
/// fractional parts, earlier split on ties.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

struct SplitStats {
    std::size_t total_dialogues = 0;
    double avg_turns_per_dialogue = 0.0;
    double avg_tokens_per_dialogue = 0.0;
    std::size_t total_key_entities = 0;
    double avg_key_entities_per_dialogue = 0.0;
    bool empty = true;
};

struct DatasetStats {
    SplitStats train;
    SplitStats dev;
    SplitStats test;
    SplitStats total;
};

struct DatasetBundle {
    std::vector<Dialogue> train;
    std::vector<Dialogue> dev;
    std::vector<Dialogue> test;
    DatasetStats stats;
    std::uint64_t split_seed = 0;
};

/// Seeded shuffle, then contiguous train/dev/test slices. Throws Error for
/// fewer than 3 dialogues.
DatasetBundle split(std::span<const Dialogue> dialogues, const SplitRatios& ratios, std::uint64_t seed);

/// Tokens are UAX-29 words over all questions and answers; key entities are
/// the distinct entities of each dialogue's subgraph, summed per split.
SplitStats compute_split_stats(std::span<const Dialogue> dialogues);
DatasetStats compute_stats(const DatasetBundle& bundle);

void write_stats(const std::filesystem::path& path, const DatasetStats& stats);

} // namespace kgdial
