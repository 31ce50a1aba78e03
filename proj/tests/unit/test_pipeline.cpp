#include "fixtures.hpp"

#include "kgdial/error.hpp"
#include "kgdial/hashing.hpp"
#include "kgdial/pipeline.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>

#include <sys/wait.h>

using namespace kgdial;
namespace fs = std::filesystem;

namespace {

PipelineConfig planted_config(const fs::path& dir) {
    fixtures::write_tsv(dir / "kg.tsv", fixtures::planted_partition().triples);
    PipelineConfig cfg;
    cfg.kg_source = dir / "kg.tsv";
    cfg.output_dir = dir / "out";
    return cfg;
}

std::vector<std::string> artifact_names() {
    return {artifact::graph,    artifact::embeddings, artifact::walks,         artifact::dialogues,
            artifact::filtered, artifact::filter_report, artifact::train, artifact::dev,
            artifact::test,     artifact::stats};
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string("\"") + KGDIAL_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing rejects unknown keys and bad values") {
    CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"walk":{"turnz":8}})")), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"colour":1})")), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"walk":{"turns":"eight"}})")), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::from_json(nlohmann::json::parse(R"({"mode":"turbo"})")), ConfigError);

    auto cfg = PipelineConfig::from_json(
        nlohmann::json::parse(R"({"kg_source":"kg.tsv","split":{"train":0.6,"dev":0.1,"test":0.2}})"));
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.split = {};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("config json round trip and hash") {
    PipelineConfig cfg;
    cfg.kg_source = "kg.tsv";
    cfg.walk.turns = 6;
    cfg.mode = Mode::argw_only;
    const auto back = PipelineConfig::from_json(cfg.to_json());
    CHECK(back.to_json() == cfg.to_json());
    CHECK(back.hash() == cfg.hash());
    auto moved = cfg;
    moved.output_dir = "elsewhere";
    moved.workers = 3;
    CHECK(moved.hash() == cfg.hash());
    auto changed = cfg;
    changed.walk.seed = 7;
    CHECK(changed.hash() != cfg.hash());
}

TEST_CASE("mode matrix") {
    CHECK(uses_partition(Mode::full));
    CHECK(uses_adaptive_walk(Mode::full));
    CHECK(uses_partition(Mode::partition_only));
    CHECK_FALSE(uses_adaptive_walk(Mode::partition_only));
    CHECK_FALSE(uses_partition(Mode::argw_only));
    CHECK(uses_adaptive_walk(Mode::argw_only));
    CHECK_FALSE(uses_partition(Mode::baseline));
    CHECK_FALSE(uses_adaptive_walk(Mode::baseline));
    for (Mode m : {Mode::full, Mode::partition_only, Mode::argw_only, Mode::baseline})
        CHECK(parse_mode(to_string(m)) == m);
}

TEST_CASE("staged run equals a monolithic run") {
    fixtures::TempDir dir("pipe");
    auto cfg = planted_config(dir.path());
    cfg.output_dir = dir.path() / "mono";
    run_pipeline(cfg);
    cfg.output_dir = dir.path() / "staged";
    stage_ingest(cfg);
    stage_partition(cfg);
    stage_walk(cfg);
    stage_generate(cfg);
    stage_filter(cfg);
    stage_split(cfg);
    stage_stats(cfg);
    for (const auto& name : artifact_names()) {
        CAPTURE(name);
        CHECK(sha256_file(dir.path() / "mono" / name) == sha256_file(dir.path() / "staged" / name));
    }
    const auto manifest = nlohmann::json::parse(fixtures::slurp(dir.path() / "staged" / artifact::manifest));
    CHECK(manifest["config_hash"] == cfg.hash());
    CHECK(manifest["mode"] == "full");
    for (const char* stage : {"ingest", "partition", "walk", "generate", "filter", "split", "stats"})
        CHECK(manifest["stages"].contains(stage));
    CHECK(manifest["artifacts"][artifact::train] ==
          sha256_file(dir.path() / "staged" / artifact::train));
}

TEST_CASE("whole-graph modes skip partitioning") {
    fixtures::TempDir dir("pipe");
    auto cfg = planted_config(dir.path());
    cfg.mode = Mode::baseline;
    run_pipeline(cfg);
    CHECK_FALSE(fs::exists(cfg.output_dir / artifact::partition));
    CHECK(fs::exists(cfg.output_dir / artifact::test));
    const auto manifest = nlohmann::json::parse(fixtures::slurp(cfg.output_dir / artifact::manifest));
    CHECK(manifest["mode"] == "baseline");
    CHECK(manifest["stages"]["partition"]["skipped"] == true);
}

TEST_CASE("missing upstream artifacts name the stage") {
    fixtures::TempDir dir("pipe");
    auto cfg = planted_config(dir.path());
    try {
        stage_generate(cfg);
        FAIL("expected StageError");
    } catch (const StageError& e) {
        CHECK(e.stage() == "generate");
        CHECK(std::string(e.what()).find("missing walk plans") != std::string::npos);
    }
    CHECK(exit_code_for(StageError("walk", "x")) == 2);
    CHECK(exit_code_for(ConfigError("x")) == 1);
    CHECK(exit_code_for(ProviderError("x")) == 3);
}

TEST_CASE("unreachable provider fails the generate stage with exit code three") {
    fixtures::TempDir dir("pipe");
    auto cfg = planted_config(dir.path());
    stage_ingest(cfg);
    stage_partition(cfg);
    stage_walk(cfg);
    cfg.provider.provider = ProviderKind::http_llm;
    cfg.provider.endpoint = "http://127.0.0.1:9/v1/chat/completions";
    cfg.provider.max_retries = 0;
    cfg.provider.timeout = std::chrono::milliseconds(300);
    try {
        stage_generate(cfg);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(exit_code_for(e) == 3);
        CHECK(std::string(e.what()).rfind("generate", 0) == 0);
    }
}

TEST_CASE("cli exit codes and outputs") {
    fixtures::TempDir dir("cli");
    fixtures::write_tsv(dir.path() / "kg.tsv", fixtures::planted_partition().triples);
    const auto kg = (dir.path() / "kg.tsv").string();
    const auto out = (dir.path() / "out").string();
    const auto log = dir.path() / "log.txt";

    CHECK(run_cli("--kg \"" + kg + "\" -o \"" + out + "\" run", log) == 0);
    CHECK(fs::exists(fs::path(out) / artifact::stats));

    std::ofstream(dir.path() / "bad.json") << R"({"split":{"train":0.6,"dev":0.1,"test":0.2}})";
    CHECK(run_cli("-c \"" + (dir.path() / "bad.json").string() + "\" --kg \"" + kg + "\" run", log) == 1);
    CHECK(fixtures::slurp(log).find("error:") != std::string::npos);

    CHECK(run_cli("--kg \"" + kg + "\" -o \"" + (dir.path() / "fresh").string() + "\" generate", log) == 2);
    CHECK(fixtures::slurp(log).find("missing walk plans") != std::string::npos);

    CHECK(run_cli("--bogus run", log) == 1);

    {
        std::ofstream answers(dir.path() / "answers.jsonl");
        std::ifstream test(fs::path(out) / artifact::test);
        for (std::string line; std::getline(test, line);) {
            const auto d = nlohmann::json::parse(line);
            for (const auto& t : d["turns"])
                answers << nlohmann::json{{"dialogue_id", d["id"]}, {"turn", t["index"]}, {"answer", t["answer"]}}
                               .dump()
                        << '\n';
        }
    }
    CHECK(run_cli("eval --outputs \"" + (dir.path() / "answers.jsonl").string() + "\" --test \"" +
                      (fs::path(out) / artifact::test).string() + "\"",
                  log) == 0);
    CHECK(fixtures::slurp(log).find("1.000    1.000    1.000    1.000    1.000") != std::string::npos);
}
