#pragma once

#include "kgdial/community.hpp"
#include "kgdial/dataset.hpp"
#include "kgdial/embedding.hpp"
#include "kgdial/filtering.hpp"
#include "kgdial/graph.hpp"
#include "kgdial/provider.hpp"
#include "kgdial/walker.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace kgdial {

/// Ablation variants: which of {partitioning, adaptive walking} are on.
enum class Mode { full, partition_only, argw_only, baseline };

bool uses_partition(Mode m) noexcept;
bool uses_adaptive_walk(Mode m) noexcept;
std::string_view to_string(Mode m) noexcept;
Mode parse_mode(std::string_view name);

struct PipelineConfig {
    std::filesystem::path kg_source;
    TripleFormat kg_format = TripleFormat::tsv;
    std::filesystem::path output_dir = "out";
    /// Precomputed entity vectors; replaces the GraphSAGE pass when set.
    std::optional<std::filesystem::path> entity_embeddings;
    EmbeddingConfig embedding;
    PartitionConfig partition;
    WalkConfig walk;
    ProviderConfig provider;
    FilterConfig filter;
    SplitRatios split;
    std::uint64_t split_seed = 42;
    Mode mode = Mode::full;
    std::size_t walks_per_community = 4;
    std::size_t whole_graph_walks = 16;
    /// 0 keeps the OpenMP default.
    int workers = 0;

    void validate() const;

    /// Unknown keys are rejected. Missing keys keep their defaults.
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    /// SHA-256 of the settings that influence artifacts (output_dir and
    /// workers excluded).
    std::string hash() const;
};

namespace artifact {
inline constexpr const char* graph = "graph.tsv";
inline constexpr const char* graph_stats = "graph_stats.json";
inline constexpr const char* embeddings = "embeddings.jsonl";
inline constexpr const char* partition = "partition.jsonl";
inline constexpr const char* walks = "walks.jsonl";
inline constexpr const char* dialogues = "dialogues.jsonl";
inline constexpr const char* filtered = "filtered.jsonl";
inline constexpr const char* filter_report = "filter_report.jsonl";
inline constexpr const char* train = "train.jsonl";
inline constexpr const char* dev = "dev.jsonl";
inline constexpr const char* test = "test.jsonl";
inline constexpr const char* stats = "stats.json";
inline constexpr const char* manifest = "manifest.json";
} // namespace artifact

/// Each stage reads its inputs from cfg.output_dir, writes its artifacts
/// there and records itself in manifest.json. A missing upstream artifact
/// raises StageError naming it; provider failures surface as ProviderError.
void stage_ingest(const PipelineConfig& cfg);
/// Embeddings always; partition.jsonl only in partitioning modes.
void stage_partition(const PipelineConfig& cfg);
void stage_walk(const PipelineConfig& cfg);
void stage_generate(const PipelineConfig& cfg);
void stage_filter(const PipelineConfig& cfg);
void stage_split(const PipelineConfig& cfg);
void stage_stats(const PipelineConfig& cfg);

/// All stages in order.
void run_pipeline(const PipelineConfig& cfg);

/// 0 success, 1 config error, 2 stage failure, 3 provider failure.
int exit_code_for(const std::exception& e) noexcept;

} // namespace kgdial
