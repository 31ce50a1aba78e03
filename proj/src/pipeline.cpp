#include "kgdial/pipeline.hpp"

#include "kgdial/dialogue.hpp"
#include "kgdial/error.hpp"
#include "kgdial/hashing.hpp"
#include "kgdial/serialize.hpp"

#include <chrono>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

namespace kgdial {

bool uses_partition(Mode m) noexcept { return m == Mode::full || m == Mode::partition_only; }
bool uses_adaptive_walk(Mode m) noexcept { return m == Mode::full || m == Mode::argw_only; }

std::string_view to_string(Mode m) noexcept {
    switch (m) {
    case Mode::full: return "full";
    case Mode::partition_only: return "partition_only";
    case Mode::argw_only: return "argw_only";
    case Mode::baseline: return "baseline";
    }
    return "full";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::full, Mode::partition_only, Mode::argw_only, Mode::baseline})
        if (to_string(m) == name)
            return m;
    throw ConfigError("unknown mode '" + std::string(name) + "' (full, partition_only, argw_only, baseline)");
}

void PipelineConfig::validate() const {
    if (kg_source.empty())
        throw ConfigError("kg_source is required");
    if (output_dir.empty())
        throw ConfigError("output_dir is required");
    if (walks_per_community == 0 || whole_graph_walks == 0)
        throw ConfigError("walks_per_community and whole_graph_walks must be > 0");
    if (workers < 0)
        throw ConfigError("workers must be >= 0");
    embedding.validate();
    partition.validate();
    walk.validate();
    provider.validate();
    filter.validate();
    split.validate();
}

namespace {

/// Reads known keys from one JSON object and rejects the rest.
class Section {
public:
    Section(const nlohmann::json& j, std::string name) : j_(j), name_(std::move(name)) {
        if (!j_.is_object())
            throw ConfigError(name_ + " must be an object");
    }

    template <class T>
    void read(const char* key, T& field) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end())
            return;
        try {
            field = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path(key) + " has the wrong type");
        }
    }

    template <class T, class Parse>
    void read_as(const char* key, T& field, Parse parse) {
        std::string text;
        const bool present = j_.contains(key);
        read(key, text);
        if (present)
            field = parse(text);
    }

    void read_path(const char* key, std::filesystem::path& field) {
        read_as(key, field, [](const std::string& s) { return std::filesystem::path(s); });
    }

    void read_optional_path(const char* key, std::optional<std::filesystem::path>& field) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null())
            return;
        if (!it->is_string())
            throw ConfigError(path(key) + " must be a string");
        field = it->get<std::string>();
    }

    Section sub(const char* key) {
        seen_.insert(key);
        static const nlohmann::json empty = nlohmann::json::object();
        auto it = j_.find(key);
        return Section(it == j_.end() ? empty : *it, path(key));
    }

    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key))
                throw ConfigError("unknown config key " + path(key.c_str()));
    }

private:
    std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

    const nlohmann::json& j_;
    std::string name_;
    std::set<std::string> seen_;
};

SeedPolicy parse_seed_policy(const std::string& s) {
    if (s == "highest_degree")
        return SeedPolicy::highest_degree;
    if (s == "random_seeded")
        return SeedPolicy::random_seeded;
    throw ConfigError("walk.seed_policy must be highest_degree or random_seeded");
}

ProviderKind parse_provider(const std::string& s) {
    if (s == "mock")
        return ProviderKind::mock;
    if (s == "http_llm")
        return ProviderKind::http_llm;
    throw ConfigError("provider.provider must be mock or http_llm");
}

KeepPolicy parse_keep_policy(const std::string& s) {
    if (s == "more_entities_then_earlier")
        return KeepPolicy::more_entities_then_earlier;
    throw ConfigError("filter.keep_policy must be more_entities_then_earlier");
}

TripleFormat parse_format(const std::string& s) {
    try {
        return parse_triple_format(s);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    Section root(j, "");
    root.read_path("kg_source", cfg.kg_source);
    root.read_as("kg_format", cfg.kg_format, parse_format);
    root.read_path("output_dir", cfg.output_dir);
    root.read_optional_path("entity_embeddings", cfg.entity_embeddings);
    root.read_as("mode", cfg.mode, [](const std::string& s) { return parse_mode(s); });
    root.read("walks_per_community", cfg.walks_per_community);
    root.read("whole_graph_walks", cfg.whole_graph_walks);
    root.read("workers", cfg.workers);

    auto emb = root.sub("embedding");
    emb.read("dimension", cfg.embedding.dimension);
    emb.read("layers", cfg.embedding.layers);
    emb.read("seed", cfg.embedding.seed);
    emb.finish();

    auto part = root.sub("partition");
    part.read("theta", cfg.partition.theta);
    part.read("use_embedding_weights", cfg.partition.use_embedding_weights);
    part.read("min_community_size", cfg.partition.min_community_size);
    part.read("max_passes", cfg.partition.max_passes);
    part.read("epsilon", cfg.partition.epsilon);
    part.read("weight_floor", cfg.partition.weight_floor);
    part.finish();

    auto walk = root.sub("walk");
    walk.read("turns", cfg.walk.turns);
    walk.read("alpha", cfg.walk.alpha);
    walk.read("beta", cfg.walk.beta);
    walk.read("gamma", cfg.walk.gamma);
    walk.read("sigma", cfg.walk.sigma);
    walk.read("max_expansions", cfg.walk.max_expansions);
    walk.read_as("seed_policy", cfg.walk.seed_policy, parse_seed_policy);
    walk.read("seed", cfg.walk.seed);
    walk.read("min_steps", cfg.walk.min_steps);
    walk.finish();

    auto prov = root.sub("provider");
    prov.read_as("provider", cfg.provider.provider, parse_provider);
    prov.read("endpoint", cfg.provider.endpoint);
    prov.read("model_name", cfg.provider.model_name);
    prov.read("answer_endpoint", cfg.provider.answer_endpoint);
    prov.read("answer_model_name", cfg.provider.answer_model_name);
    std::int64_t timeout_ms = cfg.provider.timeout.count();
    prov.read("timeout_ms", timeout_ms);
    cfg.provider.timeout = std::chrono::milliseconds(timeout_ms);
    prov.read("max_retries", cfg.provider.max_retries);
    prov.read("rate_limit", cfg.provider.rate_limit);
    prov.read("length_limit", cfg.provider.length_limit);
    prov.read("api_key_env", cfg.provider.api_key_env);
    prov.read("seed", cfg.provider.seed);
    prov.finish();

    auto filt = root.sub("filter");
    filt.read("semantic_threshold", cfg.filter.semantic_threshold);
    filt.read("jaccard_threshold", cfg.filter.jaccard_threshold);
    filt.read_as("keep_policy", cfg.filter.keep_policy, parse_keep_policy);
    filt.read("subgraph_first", cfg.filter.subgraph_first);
    filt.read("text_dimension", cfg.filter.text_dimension);
    filt.read_optional_path("text_embeddings", cfg.filter.text_embeddings);
    filt.finish();

    auto sp = root.sub("split");
    sp.read("train", cfg.split.train);
    sp.read("dev", cfg.split.dev);
    sp.read("test", cfg.split.test);
    sp.read("seed", cfg.split_seed);
    sp.finish();

    root.finish();
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded())
        throw ConfigError("config " + path.string() + " is not valid JSON");
    return from_json(j);
}

nlohmann::json PipelineConfig::to_json() const {
    auto opt = [](const std::optional<std::filesystem::path>& p) -> nlohmann::json {
        return p ? nlohmann::json(p->string()) : nlohmann::json(nullptr);
    };
    return {
        {"kg_source", kg_source.string()},
        {"kg_format", kg_format == TripleFormat::tsv ? "tsv" : "jsonl"},
        {"output_dir", output_dir.string()},
        {"entity_embeddings", opt(entity_embeddings)},
        {"mode", std::string(to_string(mode))},
        {"walks_per_community", walks_per_community},
        {"whole_graph_walks", whole_graph_walks},
        {"workers", workers},
        {"embedding", {{"dimension", embedding.dimension}, {"layers", embedding.layers}, {"seed", embedding.seed}}},
        {"partition",
         {{"theta", partition.theta},
          {"use_embedding_weights", partition.use_embedding_weights},
          {"min_community_size", partition.min_community_size},
          {"max_passes", partition.max_passes},
          {"epsilon", partition.epsilon},
          {"weight_floor", partition.weight_floor}}},
        {"walk",
         {{"turns", walk.turns},
          {"alpha", walk.alpha},
          {"beta", walk.beta},
          {"gamma", walk.gamma},
          {"sigma", walk.sigma},
          {"max_expansions", walk.max_expansions},
          {"seed_policy", walk.seed_policy == SeedPolicy::highest_degree ? "highest_degree" : "random_seeded"},
          {"seed", walk.seed},
          {"min_steps", walk.min_steps}}},
        {"provider",
         {{"provider", provider.provider == ProviderKind::mock ? "mock" : "http_llm"},
          {"endpoint", provider.endpoint},
          {"model_name", provider.model_name},
          {"answer_endpoint", provider.answer_endpoint},
          {"answer_model_name", provider.answer_model_name},
          {"timeout_ms", provider.timeout.count()},
          {"max_retries", provider.max_retries},
          {"rate_limit", provider.rate_limit},
          {"length_limit", provider.length_limit},
          {"api_key_env", provider.api_key_env},
          {"seed", provider.seed}}},
        {"filter",
         {{"semantic_threshold", filter.semantic_threshold},
          {"jaccard_threshold", filter.jaccard_threshold},
          {"keep_policy", "more_entities_then_earlier"},
          {"subgraph_first", filter.subgraph_first},
          {"text_dimension", filter.text_dimension},
          {"text_embeddings", opt(filter.text_embeddings)}}},
        {"split", {{"train", split.train}, {"dev", split.dev}, {"test", split.test}, {"seed", split_seed}}},
    };
}

std::string PipelineConfig::hash() const {
    auto j = to_json();
    j.erase("output_dir");
    j.erase("workers");
    return sha256_hex(j.dump());
}

namespace {

std::filesystem::path at(const PipelineConfig& cfg, const char* name) { return cfg.output_dir / name; }

std::filesystem::path require(const PipelineConfig& cfg, const char* stage, const char* name, const char* what) {
    auto path = at(cfg, name);
    if (!std::filesystem::exists(path))
        throw StageError(stage, std::string("missing ") + what + ": " + path.string());
    return path;
}

KnowledgeGraph load_ingested(const PipelineConfig& cfg, const char* stage) {
    return load_graph(require(cfg, stage, artifact::graph, "ingested graph"), TripleFormat::tsv);
}

void update_manifest(const PipelineConfig& cfg, const char* stage, double seconds, bool skipped,
                     const std::vector<const char*>& written) {
    const auto path = at(cfg, artifact::manifest);
    nlohmann::json m = nlohmann::json::object();
    if (std::ifstream in(path); in) {
        m = nlohmann::json::parse(in, nullptr, false);
        if (m.is_discarded() || !m.is_object() || m.value("config_hash", "") != cfg.hash())
            m = nlohmann::json::object();
    }
    m["config_hash"] = cfg.hash();
    m["mode"] = std::string(to_string(cfg.mode));
    m["seeds"] = {{"embedding", cfg.embedding.seed},
                  {"walk", cfg.walk.seed},
                  {"provider", cfg.provider.seed},
                  {"split", cfg.split_seed}};
    m["stages"][stage] = {{"seconds", seconds}, {"skipped", skipped}};
    for (const char* name : written)
        m["artifacts"][name] = sha256_file(at(cfg, name));
    std::ofstream out(path);
    out << m.dump(2) << '\n';
}

/// Runs `body`, maps failures to the stage, records timing.
using StageResult = std::pair<bool, std::vector<const char*>>;

template <class Body>
void run_stage(const PipelineConfig& cfg, const char* stage, Body body) {
    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    const auto start = std::chrono::steady_clock::now();
    bool skipped = false;
    std::vector<const char*> written;
    try {
        std::tie(skipped, written) = body();
    } catch (const ConfigError&) {
        throw;
    } catch (const StageError&) {
        throw;
    } catch (const ProviderError& e) {
        throw ProviderError(std::string(stage) + ": " + e.what());
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    update_manifest(cfg, stage, elapsed.count(), skipped, written);
    spdlog::info("{}: done in {:.3f}s{}", stage, elapsed.count(), skipped ? " (skipped)" : "");
}



std::vector<Dialogue> read_stage_dialogues(const PipelineConfig& cfg, const char* stage, const char* name,
                                           const char* what, const KnowledgeGraph& g) {
    return read_dialogues(require(cfg, stage, name, what), g);
}

} // namespace

void stage_ingest(const PipelineConfig& cfg) {
    run_stage(cfg, "ingest", [&]() -> StageResult {
        const auto g = load_graph(cfg.kg_source, cfg.kg_format);
        {
            std::ofstream out(at(cfg, artifact::graph));
            write_graph_tsv(g, out);
        }
        const auto s = g.stats();
        std::ofstream out(at(cfg, artifact::graph_stats));
        out << nlohmann::json{{"entities", s.entities},
                              {"relations", s.relations},
                              {"triples", s.triples},
                              {"self_loops", s.self_loops},
                              {"duplicate_records", s.duplicate_records}}
                   .dump(2)
            << '\n';
        return {false, {artifact::graph, artifact::graph_stats}};
    });
}

void stage_partition(const PipelineConfig& cfg) {
    run_stage(cfg, "partition", [&]() -> StageResult {
        const auto g = load_ingested(cfg, "partition");
        const auto emb = cfg.entity_embeddings
                             ? load_entity_embeddings(*cfg.entity_embeddings, g, cfg.embedding.dimension)
                             : embed_graph(g, cfg.embedding);
        write_entity_embeddings(at(cfg, artifact::embeddings), g, emb);
        if (!uses_partition(cfg.mode)) {
            std::filesystem::remove(at(cfg, artifact::partition));
            return {true, {artifact::embeddings}};
        }
        const auto p = partition_graph(g, emb, cfg.partition);
        write_partition(at(cfg, artifact::partition), g, p);
        return {false, {artifact::embeddings, artifact::partition}};
    });
}

void stage_walk(const PipelineConfig& cfg) {
    run_stage(cfg, "walk", [&]() -> StageResult {
        const auto g = load_ingested(cfg, "walk");
        const auto emb = load_entity_embeddings(require(cfg, "walk", artifact::embeddings, "entity embeddings"), g,
                                                cfg.embedding.dimension);
        WalkConfig wc = cfg.walk;
        wc.strategy = uses_adaptive_walk(cfg.mode) ? WalkStrategy::adaptive : WalkStrategy::uniform_random;
        std::vector<WalkPlan> plans;
        if (uses_partition(cfg.mode)) {
            const auto p = read_partition(require(cfg, "walk", artifact::partition, "partition"), g);
            plans = plan_walks(g, emb, p, wc, cfg.walks_per_community);
        } else {
            plans = plan_walks(g, emb, single_community(g), wc, cfg.whole_graph_walks);
        }
        write_walk_plans(at(cfg, artifact::walks), g, plans);
        spdlog::info("walk: {} plans", plans.size());
        return {false, {artifact::walks}};
    });
}

void stage_generate(const PipelineConfig& cfg) {
    run_stage(cfg, "generate", [&]() -> StageResult {
        const auto walks = require(cfg, "generate", artifact::walks, "walk plans");
        const auto g = load_ingested(cfg, "generate");
        const auto plans = read_walk_plans(walks, g);
        const auto agents = make_agents(cfg.provider);
        const auto dialogues = generate_dialogues(agents, g, plans, cfg.provider, cfg.hash());
        write_dialogues(at(cfg, artifact::dialogues), dialogues);
        return {false, {artifact::dialogues}};
    });
}

void stage_filter(const PipelineConfig& cfg) {
    run_stage(cfg, "filter", [&]() -> StageResult {
        const auto g = load_ingested(cfg, "filter");
        const auto dialogues = read_stage_dialogues(cfg, "filter", artifact::dialogues, "dialogues", g);
        const auto result = filter_pipeline(dialogues, cfg.filter);
        write_dialogues(at(cfg, artifact::filtered), result.kept);
        write_filter_report(at(cfg, artifact::filter_report), result.report);
        spdlog::info("filter: kept {} of {}", result.report.kept_count, result.report.input_count);
        return {false, {artifact::filtered, artifact::filter_report}};
    });
}

void stage_split(const PipelineConfig& cfg) {
    run_stage(cfg, "split", [&]() -> StageResult {
        const auto g = load_ingested(cfg, "split");
        const auto dialogues = read_stage_dialogues(cfg, "split", artifact::filtered, "filtered dialogues", g);
        const auto bundle = split(dialogues, cfg.split, cfg.split_seed);
        write_dialogues(at(cfg, artifact::train), bundle.train);
        write_dialogues(at(cfg, artifact::dev), bundle.dev);
        write_dialogues(at(cfg, artifact::test), bundle.test);
        return {false, {artifact::train, artifact::dev, artifact::test}};
    });
}

void stage_stats(const PipelineConfig& cfg) {
    run_stage(cfg, "stats", [&]() -> StageResult {
        const auto g = load_ingested(cfg, "stats");
        DatasetBundle bundle;
        bundle.split_seed = cfg.split_seed;
        bundle.train = read_stage_dialogues(cfg, "stats", artifact::train, "train split", g);
        bundle.dev = read_stage_dialogues(cfg, "stats", artifact::dev, "dev split", g);
        bundle.test = read_stage_dialogues(cfg, "stats", artifact::test, "test split", g);
        write_stats(at(cfg, artifact::stats), compute_stats(bundle));
        return {false, {artifact::stats}};
    });
}

void run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    stage_ingest(cfg);
    stage_partition(cfg);
    stage_walk(cfg);
    stage_generate(cfg);
    stage_filter(cfg);
    stage_split(cfg);
    stage_stats(cfg);
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e))
        return 1;
    if (dynamic_cast<const ProviderError*>(&e))
        return 3;
    return 2;
}

} // namespace kgdial
