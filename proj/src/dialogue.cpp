#include "kgdial/dialogue.hpp"

#include "kgdial/error.hpp"
#include "kgdial/serialize.hpp"
#include "kgdial/tokenize.hpp"

#include <exception>
#include <fstream>

#include <nlohmann/json.hpp>

namespace kgdial {

const std::string_view kPromptInstruction =
    "You are an expert in the NLP field. I would appreciate your assistance with a data generation task. "
    "Based on the provided historical dialogue information and the subgraph query path (or answer entity) "
    "for the next round of dialogue, please generate the corresponding natural language question (or natural "
    "language answer). The generated questions (or answers) should be concise, clear, and no longer than 30 "
    "characters.";

std::string serialize_history(const History& history, std::string_view pending_question) {
    std::string out;
    std::size_t t = 0;
    for (const auto& [q, a] : history) {
        ++t;
        out += "Q" + std::to_string(t) + ": " + q + "\n";
        out += "A" + std::to_string(t) + ": " + a + "\n";
    }
    if (!pending_question.empty())
        out += "Q" + std::to_string(t + 1) + ": " + std::string(pending_question) + "\n";
    if (out.empty())
        return "(none)";
    out.pop_back();
    return out;
}

std::string serialize_path(std::span<const PathEdge> path) {
    std::string out;
    for (const PathEdge& e : path) {
        if (!out.empty())
            out += "\n";
        out += e.head + " —" + e.relation + "→ " + e.tail;
        for (const auto& r : e.related)
            out += " (related: " + r + ")";
    }
    return out;
}

PathEdge path_edge(const KnowledgeGraph& g, const WalkStep& step) {
    PathEdge edge{g.label(step.triple.head), g.label(step.triple.relation), g.label(step.triple.tail), {}};
    for (const Expansion& x : step.expansions)
        edge.related.push_back(g.label(x.entity));
    return edge;
}

GenerationRequest make_request(Role role, std::string history, std::vector<PathEdge> path) {
    GenerationRequest req;
    req.instruction = std::string(kPromptInstruction);
    req.history = std::move(history);
    req.path_or_entity = serialize_path(path);
    req.role = role;
    req.path = std::move(path);
    return req;
}

std::string render_prompt(const GenerationRequest& request) {
    if (request.history.empty() || request.path_or_entity.empty())
        throw Error("render_prompt: history and path must be serialized before rendering");
    std::string out;
    out += "Instruction:\n";
    out += request.instruction;
    out += "\n\nOutput Format:\n";
    out += "Directly output the generated natural language question (natural language answer).\n\n";
    out += "Here is the dialogue history:\n";
    out += request.history;
    out += "\nHere is the subgraph query path (the entities related to the question and answer):\n";
    out += request.path_or_entity;
    out += "\nOutput:\n";
    return out;
}

namespace {

std::string checked(std::string raw) {
    std::string text = trim(raw);
    if (text.empty())
        throw GenerationError("empty generation");
    return text;
}

} // namespace

DialogueTurn generate_turn(const Agents& agents, const KnowledgeGraph& g, const WalkStep& step,
                           const History& history, const ProviderConfig& /*cfg*/) {
    const PathEdge edge = path_edge(g, step);

    DialogueTurn turn;
    turn.index = history.size() + 1;
    turn.question_plan = step;
    turn.question = checked(agents.question->complete(make_request(Role::question, serialize_history(history), {edge})));
    turn.answer = checked(
        agents.answer->complete(make_request(Role::answer, serialize_history(history, turn.question), {edge})));
    turn.answer_entities.push_back(step.next);
    for (const Expansion& x : step.expansions)
        turn.answer_entities.push_back(x.entity);
    return turn;
}

Dialogue generate_dialogue(const Agents& agents, const KnowledgeGraph& g, const WalkPlan& plan,
                           const ProviderConfig& cfg, const std::string& config_hash) {
    if (plan.steps.size() < 3)
        throw Error("generate_dialogue: plan " + plan.id + " has " + std::to_string(plan.steps.size()) +
                    " step(s); at least 3 are required");
    Dialogue d(g);
    d.id = plan.id;
    d.community = plan.community;
    d.provenance = {config_hash, agents.question->name()};

    History history;
    for (const WalkStep& step : plan.steps) {
        try {
            DialogueTurn turn = generate_turn(agents, g, step, history, cfg);
            history.emplace_back(turn.question, turn.answer);
            d.turns.push_back(std::move(turn));
        } catch (const Error& e) {
            const std::string diagnostic = "dialogue " + plan.id + " turn " + std::to_string(history.size() + 1) +
                                           " (" + serialize_path(std::vector{path_edge(g, step)}) + "): " +
                                           e.what() + "\npartial transcript:\n" + serialize_history(history);
            if (dynamic_cast<const ProviderError*>(&e))
                throw ProviderError(diagnostic);
            throw GenerationError(diagnostic);
        }
    }
    const auto triples = plan.triples();
    d.subgraph = induced_subgraph(g, triples);
    return d;
}

std::vector<Dialogue> generate_dialogues(const Agents& agents, const KnowledgeGraph& g,
                                         std::span<const WalkPlan> plans, const ProviderConfig& cfg,
                                         const std::string& config_hash, Execution exec) {
    std::vector<std::optional<Dialogue>> slots(plans.size());
    std::vector<std::exception_ptr> errors(plans.size());
    auto run = [&](std::size_t i) {
        try {
            slots[i].emplace(generate_dialogue(agents, g, plans[i], cfg, config_hash));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const auto n = static_cast<std::int64_t>(plans.size());
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < n; ++i)
            run(static_cast<std::size_t>(i));
    } else {
        for (std::int64_t i = 0; i < n; ++i)
            run(static_cast<std::size_t>(i));
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<Dialogue> out;
    out.reserve(slots.size());
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

std::string dialogue_to_json_line(const Dialogue& d) {
    const KnowledgeGraph& g = d.subgraph.parent();
    nlohmann::json turns = nlohmann::json::array();
    for (const DialogueTurn& t : d.turns) {
        nlohmann::json grounded = nlohmann::json::array();
        for (EntityId e : t.answer_entities)
            grounded.push_back(g.label(e));
        turns.push_back({{"index", t.index},
                         {"question", t.question},
                         {"answer", t.answer},
                         {"plan", json::step(g, t.question_plan)},
                         {"answer_entities", grounded}});
    }
    nlohmann::json entities = nlohmann::json::array();
    for (EntityId e : d.subgraph.entities())
        entities.push_back(g.label(e));
    nlohmann::json triples = nlohmann::json::array();
    for (const Triple& t : d.subgraph.triples())
        triples.push_back(json::triple(g, t));
    nlohmann::json record{{"id", d.id},
                          {"community", d.community},
                          {"turns", turns},
                          {"entities", entities},
                          {"triples", triples},
                          {"provenance", {{"config_hash", d.provenance.config_hash}, {"provider", d.provenance.provider}}}};
    return record.dump();
}

namespace {

Dialogue dialogue_from_json(const nlohmann::json& j, const KnowledgeGraph& g) {
    Dialogue d(g);
    d.id = j.at("id").get<std::string>();
    d.community = j.at("community").get<std::uint32_t>();
    for (const auto& t : j.at("turns")) {
        DialogueTurn turn;
        turn.index = t.at("index").get<std::size_t>();
        turn.question = t.at("question").get<std::string>();
        turn.answer = t.at("answer").get<std::string>();
        turn.question_plan = json::step(g, t.at("plan"));
        for (const auto& e : t.at("answer_entities"))
            turn.answer_entities.push_back(g.entity(e.get<std::string>()));
        d.turns.push_back(std::move(turn));
    }
    std::vector<Triple> triples;
    for (const auto& t : j.at("triples"))
        triples.push_back(json::triple(g, t));
    d.subgraph = induced_subgraph(g, triples);
    const auto& prov = j.at("provenance");
    d.provenance = {prov.at("config_hash").get<std::string>(), prov.at("provider").get<std::string>()};
    return d;
}

} // namespace

Dialogue dialogue_from_json_line(std::string_view line, const KnowledgeGraph& g) {
    return dialogue_from_json(nlohmann::json::parse(line), g);
}

void write_dialogues(const std::filesystem::path& path, std::span<const Dialogue> dialogues) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path.string());
    for (const Dialogue& d : dialogues)
        out << dialogue_to_json_line(d) << '\n';
}

std::vector<Dialogue> read_dialogues(const std::filesystem::path& path, const KnowledgeGraph& g) {
    std::vector<Dialogue> out;
    json::for_each_record(path, [&](const nlohmann::json& j, std::size_t) { out.push_back(dialogue_from_json(j, g)); });
    return out;
}

} // namespace kgdial
