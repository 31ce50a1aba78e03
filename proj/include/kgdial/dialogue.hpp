#pragma once

#include "kgdial/graph.hpp"
#include "kgdial/kernels.hpp"
#include "kgdial/provider.hpp"
#include "kgdial/walker.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kgdial {

struct DialogueTurn {
    std::size_t index = 0; // 1-based
    std::string question;
    std::string answer;
    WalkStep question_plan;
    std::vector<EntityId> answer_entities;
};

struct Provenance {
    std::string config_hash;
    std::string provider;
};

struct Dialogue {
    std::string id;
    std::uint32_t community = 0;
    std::vector<DialogueTurn> turns;
    Subgraph subgraph;
    Provenance provenance;

    explicit Dialogue(const KnowledgeGraph& g) : subgraph(g) {}

    /// Distinct entities grounded in the dialogue's subgraph.
    std::size_t key_entity_count() const noexcept { return subgraph.entities().size(); }
};

using History = std::vector<std::pair<std::string, std::string>>;

/// Instruction block of the generation prompt.
extern const std::string_view kPromptInstruction;

/// "Q1: ..\nA1: .." oldest first; "(none)" when empty. A trailing question
/// without an answer is emitted as a lone "Q{t}:" line.
std::string serialize_history(const History& history, std::string_view pending_question = {});

/// "head —relation→ tail" plus " (related: x)" per expansion.
std::string serialize_path(std::span<const PathEdge> path);

/// Path edge for a walk step, in KG triple orientation.
PathEdge path_edge(const KnowledgeGraph& g, const WalkStep& step);

GenerationRequest make_request(Role role, std::string history, std::vector<PathEdge> path);

/// Byte-exact instantiation of the generation prompt template.
std::string render_prompt(const GenerationRequest& request);

/// Question request, then answer request (whose history carries the new
/// question). Responses are trimmed; transport errors are retried by the
/// provider client. Throws GenerationError on empty output.
DialogueTurn generate_turn(const Agents& agents, const KnowledgeGraph& g, const WalkStep& step,
                           const History& history, const ProviderConfig& cfg);

/// One turn per step. Requires >= 3 steps. A failing turn aborts with a
/// diagnostic that carries the partial transcript.
Dialogue generate_dialogue(const Agents& agents, const KnowledgeGraph& g, const WalkPlan& plan,
                           const ProviderConfig& cfg, const std::string& config_hash);

/// Dialogues for all plans, in plan order. Turns inside one dialogue stay
/// sequential; dialogues run concurrently under Execution::parallel.
std::vector<Dialogue> generate_dialogues(const Agents& agents, const KnowledgeGraph& g,
                                         std::span<const WalkPlan> plans, const ProviderConfig& cfg,
                                         const std::string& config_hash, Execution exec = Execution::parallel);

void write_dialogues(const std::filesystem::path& path, std::span<const Dialogue> dialogues);
std::vector<Dialogue> read_dialogues(const std::filesystem::path& path, const KnowledgeGraph& g);

std::string dialogue_to_json_line(const Dialogue& d);
Dialogue dialogue_from_json_line(std::string_view line, const KnowledgeGraph& g);

} // namespace kgdial
