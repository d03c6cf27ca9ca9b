// novelgraph: command-line front end for the extraction pipeline and the
// annotation service.
#include <csignal>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "novelgraph/pipeline.hpp"
#include "novelgraph/service.hpp"

namespace {

using namespace novelgraph;

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kStageFailure = 2;
constexpr int kProviderFailure = 3;

void print_report(const RunReport& r, bool as_json) {
    if (as_json) {
        std::cout << r.to_json().dump(2) << '\n';
        return;
    }
    std::cout << r.summary_line() << '\n'
              << "  documents:            " << r.documents << '\n'
              << "  characters:           " << r.characters << '\n'
              << "  symmetric sentences:  " << r.symmetric_sentences << '\n'
              << "  relational instances: " << r.instances << '\n'
              << "  clusters (" << r.algorithm << ", " << r.metric << "): " << r.clusters << '\n'
              << "  singleton fraction:   " << r.singleton_fraction << '\n'
              << "  noise:                " << r.noise << '\n';
    if (r.diagnostics.silhouette) std::cout << "  silhouette:           " << *r.diagnostics.silhouette << '\n';
    if (const auto& sel = r.diagnostics.selection) {
        std::cout << "  k selection:";
        for (std::size_t i = 0; i < sel->grid.size(); ++i) std::cout << " k=" << sel->grid[i] << ":" << sel->scores[i];
        std::cout << (sel->monotone ? " (monotone)" : "") << '\n';
    }
    for (const auto& p : r.diagnostics.sweep) {
        std::cout << "  eps " << p.eps << ": " << p.clusters << " clusters, " << p.singleton_clusters << " singletons, largest "
                  << p.largest_cluster << ", noise " << p.noise << '\n';
    }
    std::cout << "  labels:               " << r.labeled_clusters << " labeled, " << r.unlabeled_clusters << " unlabeled\n"
              << "  graph:                " << r.edges << " edges, weight " << r.total_weight << ", "
              << r.components.size() << " components\n";
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

AnnotationService* g_service = nullptr;

void handle_signal(int) {
    if (g_service != nullptr) g_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Character relation knowledge graphs from novels"};
    app.require_subcommand(1);

    auto* extract = app.add_subcommand("extract", "Run the pipeline described by a configuration file");
    std::string config_file;
    std::optional<std::size_t> k;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> algorithm, metric, provider, from_stage, out;
    bool json_report = false;
    extract->add_option("config", config_file, "Pipeline configuration (JSON)")->required();
    extract->add_option("--k", k, "Number of k-means clusters");
    extract->add_option("--seed", seed, "Random seed");
    extract->add_option("--algorithm", algorithm, "kmeans or dbscan");
    extract->add_option("--metric", metric, "cosine or euclidean");
    extract->add_option("--provider", provider, "Embedding provider: builtin[:dim], process:<cmd> or http://...");
    extract->add_option("--from-stage", from_stage, "Resume at corpus|entities|relations|embeddings|clustering|labeling|kg");
    extract->add_option("--out", out, "Output directory");
    extract->add_flag("--json", json_report, "Print the report as JSON");

    auto* stats_cmd = app.add_subcommand("stats", "Summarize a finished run");
    std::string run_dir;
    stats_cmd->add_option("run", run_dir, "Run directory")->required();
    stats_cmd->add_flag("--json", json_report, "Print the report as JSON");

    auto* serve = app.add_subcommand("serve", "Serve a run for annotation");
    std::string host = "127.0.0.1";
    int port = 8080;
    std::optional<std::string> ui_dir;
    std::optional<double> tau;
    serve->add_option("run", run_dir, "Run directory")->required();
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port");
    serve->add_option("--ui", ui_dir, "Directory with the review UI bundle");
    serve->add_option("--tau", tau, "Classifier distance threshold");
    serve->add_option("--provider", provider, "Embedding provider for /classify");

    auto* classify = app.add_subcommand("classify", "Classify a sentence against a run's clusters and annotations");
    std::string sentence;
    classify->add_option("run", run_dir, "Run directory")->required();
    classify->add_option("text", sentence, "Canonicalized sentence")->required();
    classify->add_option("--tau", tau, "Classifier distance threshold");
    classify->add_option("--provider", provider, "Embedding provider");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*extract) {
            PipelineConfig config;
            RunOptions options;
            try {
                config = PipelineConfig::load(config_file);
                if (k) config.clustering.k = *k;
                if (seed) config.clustering.seed = *seed;
                if (algorithm) config.clustering.algorithm = parse_algorithm(*algorithm);
                if (metric) config.clustering.metric = parse_metric(*metric);
                if (provider) config.embedding = ProviderSpec::parse(*provider);
                if (out) config.output_dir = std::filesystem::absolute(*out);
                if (from_stage) options.from_stage = parse_stage(*from_stage);
                config.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
            print_report(run(config, options), json_report);
            return kOk;
        }
        if (*stats_cmd) {
            print_report(stats(run_dir), json_report);
            return kOk;
        }
        AnnotationService::Options options;
        if (ui_dir) options.ui_dir = *ui_dir;
        if (tau) options.tau = *tau;
        try {
            if (provider) options.embedding = ProviderSpec::parse(*provider);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        AnnotationService service(run_dir, options);
        if (*serve) {
            g_service = &service;
            std::signal(SIGINT, handle_signal);
            std::signal(SIGTERM, handle_signal);
            std::cerr << "serving run " << service.run_id() << " on http://" << host << ":" << port << '\n';
            service.listen(host, port);
            return kOk;
        }
        std::cout << service.classify(sentence).dump(2) << '\n';
        return kOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const StageError& e) {
        std::cerr << "stage failure: " << e.what() << '\n';
        return e.provider_failure() ? kProviderFailure : kStageFailure;
    } catch (const ProviderError& e) {
        std::cerr << "provider failure: " << e.what() << '\n';
        return kProviderFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kStageFailure;
    }
}
