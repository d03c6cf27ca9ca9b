#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "novelgraph/pipeline.hpp"
#include "synthetic.hpp"

using namespace novelgraph;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
}

// Every regular file in `dir`, by relative name.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
    return out;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(NOVELGRAPH_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

PipelineConfig synthetic_config(const std::string& name, std::size_t count = 80) {
    const auto dir = fixtures::scratch_dir(name);
    return PipelineConfig::load(fixtures::write_synthetic_run(dir, count, 11, R"({"k": 4, "seed": 3})"));
}

}  // namespace

TEST(Config, RejectsUnknownKeysAndBadValues) {
    const fs::path base = "/tmp";
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["a"], "colour": 1})"), base), ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["a"], "clustering": {"kk": 2}})"), base),
                 ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": []})"), base), ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["a"], "clustering": {"k": 0}})"), base),
                 ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["a"], "clustering": {"algorithm": "x"}})"), base),
                 ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["a"], "embedding": {"provider": "ftp://x"}})"), base),
                 ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["a"], "classifier": {"tau": -1}})"), base),
                 ConfigError);
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse("[1]"), base), ConfigError);
    EXPECT_THROW(parse_stage("tokenize"), ConfigError);

    const auto c = PipelineConfig::from_json(nlohmann::json::parse(R"({"inputs": ["books/a.txt"]})"), "/data/run");
    EXPECT_EQ(c.inputs[0], fs::path("/data/run/books/a.txt"));
    EXPECT_EQ(c.output_dir, fs::path("/data/run"));
    EXPECT_EQ(c.tau, 0.35);
    // The stored copy omits output_dir and re-reads to the same configuration.
    const auto stored = c.to_json();
    EXPECT_FALSE(stored.contains("output_dir"));
    EXPECT_EQ(PipelineConfig::from_json(nlohmann::json::parse(stored.dump()), "/elsewhere").to_json().dump(), stored.dump());
}

TEST(Run, DeterministicOutputDirectories) {
    auto config = synthetic_config("determinism");
    const auto a = config.output_dir.parent_path() / "a";
    const auto b = config.output_dir.parent_path() / "b";
    config.output_dir = a;
    const auto ra = run(config);
    config.output_dir = b;
    const auto rb = run(config);
    EXPECT_EQ(ra.run_id, rb.run_id);
    const auto sa = snapshot(a);
    EXPECT_EQ(sa, snapshot(b));
    for (const auto* name : {artifact::config, artifact::sentences, artifact::aliases, artifact::canonical,
                             artifact::instances, artifact::embeddings, artifact::assignment, artifact::clusters,
                             artifact::diagnostics, artifact::labels, artifact::labels_tsv, artifact::graph,
                             artifact::triples, artifact::dot, artifact::report}) {
        EXPECT_TRUE(sa.count(name)) << name;
    }
}

TEST(Run, ReportMatchesStatsAndSummaryLine) {
    const auto config = synthetic_config("stats", 40);
    const auto report = run(config);
    EXPECT_EQ(report.sentences, 40u);
    EXPECT_EQ(report.relational_sentences, 40u);
    EXPECT_EQ(report.characters, 8u);
    EXPECT_EQ(report.clusters, 4u);
    EXPECT_EQ(report.summary_line(), "40 suitable sentences out of 40, grouped in 4 clusters");
    EXPECT_EQ(report.total_weight + report.noise, report.instances);
    EXPECT_EQ(stats(config.output_dir).to_json().dump(), report.to_json().dump());
    EXPECT_EQ(read_file(config.output_dir / artifact::report), report.to_json().dump(2) + "\n");
}

TEST(Run, ResumeFromEachStageReproducesArtifacts) {
    auto config = synthetic_config("resume", 40);
    run(config);
    const auto reference = snapshot(config.output_dir);
    for (const auto* stage : {"entities", "relations", "embeddings", "clustering", "labeling", "kg"}) {
        RunOptions options;
        options.from_stage = parse_stage(stage);
        run(config, options);
        EXPECT_EQ(snapshot(config.output_dir), reference) << stage;
    }
    // A different k from the clustering stage changes only what follows.
    config.clustering.k = 2;
    RunOptions options;
    options.from_stage = Stage::clustering;
    const auto report = run(config, options);
    EXPECT_EQ(report.clusters, 2u);
    const auto after = snapshot(config.output_dir);
    EXPECT_EQ(after.at(artifact::embeddings), reference.at(artifact::embeddings));
    EXPECT_NE(after.at(artifact::assignment), reference.at(artifact::assignment));
}

TEST(Run, ResumeWithoutArtifactsFails) {
    auto config = synthetic_config("missing", 8);
    RunOptions options;
    options.from_stage = Stage::kg;
    try {
        run(config, options);
        FAIL() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), Stage::kg);
        EXPECT_FALSE(e.provider_failure());
        EXPECT_NE(std::string(e.what()).find("missing artifact"), std::string::npos);
    }
    EXPECT_THROW(stats(config.output_dir), ArtifactError);
}

TEST(Run, NoRelationalSentencesIsACleanEmptyRun) {
    const auto dir = fixtures::scratch_dir("empty");
    write(dir / "quiet.txt", "The rain fell all night. Nobody came to the door.\n\nAlice slept.\n");
    write(dir / "config.json", R"({"inputs": ["quiet.txt"], "output_dir": "out", "clustering": {"k": 3}})");
    const auto report = run(PipelineConfig::load(dir / "config.json"));
    EXPECT_EQ(report.sentences, 3u);
    EXPECT_EQ(report.instances, 0u);
    EXPECT_EQ(report.clusters, 0u);
    EXPECT_EQ(report.edges, 0u);
    EXPECT_TRUE(report.components.empty());
    ASSERT_FALSE(report.warnings.empty());
    EXPECT_NE(report.warnings[0].find("no relational sentences"), std::string::npos);
    EXPECT_EQ(read_file(dir / "out" / artifact::triples), "subject\trelation\tobject\tweight\n");
    EXPECT_EQ(stats(dir / "out").to_json().dump(), report.to_json().dump());
}

TEST(Run, DisjointStoriesGiveTwoComponents) {
    const auto report = run(PipelineConfig::load(fixtures::write_two_story_run(fixtures::scratch_dir("two"))));
    EXPECT_EQ(report.documents, 2u);
    ASSERT_EQ(report.components.size(), 2u);
    EXPECT_EQ(report.components[0].size() + report.components[1].size(), report.characters);
}

TEST(Run, KClampedToDistinctEmbeddings) {
    const auto dir = fixtures::scratch_dir("clamp");
    write(dir / "story.txt", "Alice smiled at Bruno. Bruno smiled at Alice. Alice looked at Bruno.\n");
    write(dir / "config.json", R"({"inputs": ["story.txt"], "output_dir": "out", "clustering": {"k": 50}})");
    const auto report = run(PipelineConfig::load(dir / "config.json"));
    EXPECT_LE(report.clusters, 3u);
    EXPECT_EQ(report.diagnostics.requested_k, 50u);
    bool warned = false;
    for (const auto& w : report.warnings) warned |= w.find("exceeds") != std::string::npos;
    EXPECT_TRUE(warned);
}

TEST(Run, ProviderFailureNamesStageAndKeepsEarlierArtifacts) {
    auto config = synthetic_config("provider-fail", 20);
    config.embedding = ProviderSpec::parse(std::string("process:") + FAKE_PROVIDER_PATH + " --die-after 0");
    config.embedding.timeout = std::chrono::milliseconds(2000);
    try {
        run(config);
        FAIL() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), Stage::embeddings);
        EXPECT_TRUE(e.provider_failure());
    }
    EXPECT_TRUE(fs::exists(config.output_dir / artifact::instances));
    EXPECT_FALSE(fs::exists(config.output_dir / artifact::embeddings));
}

TEST(Run, ProcessProviderMatchesBuiltin) {
    auto config = synthetic_config("process", 24);
    const auto builtin = run(config);
    const auto reference = snapshot(config.output_dir);
    config.embedding = ProviderSpec::parse(std::string("process:") + FAKE_PROVIDER_PATH + " --dim 256");
    config.batch_size = 5;
    run(config);
    const auto wire = snapshot(config.output_dir);
    EXPECT_EQ(wire.at(artifact::embeddings), reference.at(artifact::embeddings));
    EXPECT_EQ(wire.at(artifact::graph), reference.at(artifact::graph));
}

TEST(Cli, ExitCodes) {
    const auto dir = fixtures::scratch_dir("cli");
    const auto config = fixtures::write_synthetic_run(dir, 20, 2, R"({"k": 3})");
    EXPECT_EQ(cli("extract " + config.string()), 0);
    EXPECT_EQ(cli("stats " + (dir / "out").string()), 0);
    EXPECT_EQ(cli("stats --json " + (dir / "out").string()), 0);
    EXPECT_EQ(cli("extract " + config.string() + " --from-stage labeling --k 2"), 0);

    // Configuration problems.
    EXPECT_EQ(cli("extract " + (dir / "absent.json").string()), 1);
    EXPECT_EQ(cli("extract " + config.string() + " --algorithm spectral"), 1);
    EXPECT_EQ(cli("extract " + config.string() + " --from-stage tokenize"), 1);
    EXPECT_EQ(cli("nonsense"), 1);
    write(dir / "bad.json", R"({"inputs": ["story.txt"], "extra": true})");
    EXPECT_EQ(cli("extract " + (dir / "bad.json").string()), 1);

    // Stage failures.
    write(dir / "missing.json", R"({"inputs": ["nowhere.txt"], "output_dir": "m"})");
    EXPECT_EQ(cli("extract " + (dir / "missing.json").string()), 2);
    EXPECT_EQ(cli("extract " + config.string() + " --out " + (dir / "fresh").string() + " --from-stage kg"), 2);

    // Provider failures.
    EXPECT_EQ(cli("extract " + config.string() + " --out " + (dir / "p").string() + " --provider 'process:" +
                  FAKE_PROVIDER_PATH + " --die-after 0'"),
              3);
    EXPECT_EQ(cli("extract " + config.string() + " --out " + (dir / "q").string() +
                  " --provider 'process:/nonexistent/provider'"),
              3);
}

TEST(Cli, StatsMatchesExtractJson) {
    const auto dir = fixtures::scratch_dir("cli-json");
    const auto config = fixtures::write_synthetic_run(dir, 16, 5, R"({"k": 2})");
    const auto ex = dir / "extract.json";
    const auto st = dir / "stats.json";
    ASSERT_EQ(std::system((std::string(NOVELGRAPH_CLI_PATH) + " extract --json " + config.string() + " > " + ex.string()).c_str()), 0);
    ASSERT_EQ(std::system((std::string(NOVELGRAPH_CLI_PATH) + " stats --json " + (dir / "out").string() + " > " + st.string()).c_str()), 0);
    EXPECT_EQ(read_file(ex), read_file(st));
    EXPECT_EQ(nlohmann::json::parse(read_file(ex))["summary"], "16 suitable sentences out of 16, grouped in 2 clusters");
}
