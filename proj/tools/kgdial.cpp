// kgdial: knowledge graph to multi-turn dialogue dataset.
//
//   kgdial --config run.json run
//   kgdial --config run.json --mode baseline --out out/base walk
//   kgdial eval --outputs answers.jsonl --test out/test.jsonl

#include "kgdial/error.hpp"
#include "kgdial/metrics.hpp"
#include "kgdial/pipeline.hpp"

#include <functional>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/spdlog.h>

namespace {

struct Overrides {
    std::string config;
    std::string kg;
    std::string format;
    std::string out;
    std::string mode;
    std::string provider;
    std::string model;
    std::string endpoint;
    int workers = -1;
};

kgdial::PipelineConfig resolve(const Overrides& o) {
    kgdial::PipelineConfig cfg = o.config.empty() ? kgdial::PipelineConfig{} : kgdial::PipelineConfig::load(o.config);
    if (!o.kg.empty())
        cfg.kg_source = o.kg;
    if (!o.format.empty())
        cfg.kg_format = kgdial::parse_triple_format(o.format);
    if (!o.out.empty())
        cfg.output_dir = o.out;
    if (!o.mode.empty())
        cfg.mode = kgdial::parse_mode(o.mode);
    if (!o.provider.empty())
        cfg.provider.provider = o.provider == "mock" ? kgdial::ProviderKind::mock : kgdial::ProviderKind::http_llm;
    if (!o.model.empty())
        cfg.provider.model_name = o.model;
    if (!o.endpoint.empty())
        cfg.provider.endpoint = o.endpoint;
    if (o.workers >= 0)
        cfg.workers = o.workers;
    cfg.validate();
    if (cfg.workers > 0)
        omp_set_num_threads(cfg.workers);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge graph to multi-turn dialogue dataset pipeline"};
    app.require_subcommand(1);
    Overrides o;
    bool verbose = false;
    app.add_option("-c,--config", o.config, "JSON pipeline config");
    app.add_option("--kg", o.kg, "Triple file (overrides kg_source)");
    app.add_option("--format", o.format, "Triple file format")->check(CLI::IsMember({"tsv", "jsonl"}));
    app.add_option("-o,--out", o.out, "Output directory");
    app.add_option("--mode", o.mode, "Ablation mode")
        ->check(CLI::IsMember({"full", "partition_only", "argw_only", "baseline"}));
    app.add_option("--provider", o.provider, "Generation provider")->check(CLI::IsMember({"mock", "http_llm"}));
    app.add_option("--model", o.model, "Model name for http_llm");
    app.add_option("--endpoint", o.endpoint, "Chat-completions URL for http_llm");
    app.add_option("-j,--workers", o.workers, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
    app.add_flag("-v,--verbose", verbose, "Log stage progress");

    const std::map<std::string, std::pair<std::string, std::function<void(const kgdial::PipelineConfig&)>>> stages{
        {"run", {"All stages in order", kgdial::run_pipeline}},
        {"ingest", {"Load and normalize the triple file", kgdial::stage_ingest}},
        {"partition", {"Embed entities and detect communities", kgdial::stage_partition}},
        {"walk", {"Plan entity-relation walks", kgdial::stage_walk}},
        {"generate", {"Generate dialogues from walk plans", kgdial::stage_generate}},
        {"filter", {"Semantic and subgraph deduplication", kgdial::stage_filter}},
        {"split", {"Train/dev/test split", kgdial::stage_split}},
        {"stats", {"Dataset statistics", kgdial::stage_stats}},
    };
    for (const auto& [name, entry] : stages)
        app.add_subcommand(name, entry.first);

    std::string outputs_path, test_path;
    auto* eval = app.add_subcommand("eval", "Score model answers against a test split");
    eval->add_option("--outputs", outputs_path, "JSONL {dialogue_id, turn, answer}")->required()->check(CLI::ExistingFile);
    eval->add_option("--test", test_path, "Test split JSONL")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        if (eval->parsed()) {
            std::cout << kgdial::format_report(kgdial::evaluate_run(outputs_path, test_path));
            return 0;
        }
        const auto cfg = resolve(o);
        for (const auto& [name, entry] : stages)
            if (app.got_subcommand(name))
                entry.second(cfg);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kgdial::exit_code_for(e);
    }
}
