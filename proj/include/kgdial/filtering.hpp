#pragma once

#include "kgdial/dialogue.hpp"
#include "kgdial/embedding.hpp"
#include "kgdial/kernels.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace kgdial {

enum class KeepPolicy { more_entities_then_earlier };

struct FilterConfig {
    double semantic_threshold = 0.92;
    double jaccard_threshold = 0.5;
    KeepPolicy keep_policy = KeepPolicy::more_entities_then_earlier;
    bool subgraph_first = false;
    std::size_t text_dimension = 256;
    /// Optional JSONL of externally computed dialogue vectors keyed by id.
    std::optional<std::filesystem::path> text_embeddings;

    void validate() const;
};

struct Removal {
    std::string removed;
    std::string kept;
    double similarity = 0.0;
};

struct FilterReport {
    std::size_t input_count = 0;
    std::size_t kept_count = 0;
    std::vector<Removal> removed_semantic;
    std::vector<Removal> removed_jaccard;
    std::vector<std::string> unembeddable;
    std::vector<std::string> empty_subgraph;
};

/// Questions and answers of every turn, one per line.
std::string dialogue_text(const Dialogue& d);

using DialogueEmbedder = std::function<TextEmbedding(const Dialogue&)>;

/// Hashed bag-of-words over dialogue_text.
DialogueEmbedder hashed_embedder(std::size_t dimension);
/// Looks vectors up by dialogue id; unknown ids are unembeddable.
DialogueEmbedder lookup_embedder(std::unordered_map<std::string, TextEmbedding> vectors);

/// Survivor order: more distinct key entities first, then earlier position.
std::vector<std::size_t> survivor_order(std::span<const Dialogue> dialogues, KeepPolicy policy);

struct FilterResult {
    std::vector<Dialogue> kept; // input order
    FilterReport report;
};

/// A dialogue is dropped when its cosine to an already kept one exceeds
/// `threshold`. Unembeddable dialogues are kept and flagged.
FilterResult semantic_filter(std::span<const Dialogue> dialogues, const DialogueEmbedder& embed, double threshold,
                             KeepPolicy policy = KeepPolicy::more_entities_then_earlier,
                             Execution exec = Execution::parallel);

/// Same resolution on subgraph Jaccard > tau. Dialogues with an empty
/// subgraph are kept and flagged.
FilterResult subgraph_filter(std::span<const Dialogue> dialogues, double tau,
                             KeepPolicy policy = KeepPolicy::more_entities_then_earlier,
                             Execution exec = Execution::parallel);

FilterResult filter_pipeline(std::span<const Dialogue> dialogues, const FilterConfig& cfg,
                             Execution exec = Execution::parallel);

/// One summary record, then one record per removal or flag.
void write_filter_report(const std::filesystem::path& path, const FilterReport& report);

} // namespace kgdial
