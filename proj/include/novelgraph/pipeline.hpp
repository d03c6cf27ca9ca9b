#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "novelgraph/clustering.hpp"
#include "novelgraph/corpus.hpp"
#include "novelgraph/entities.hpp"
#include "novelgraph/kg.hpp"
#include "novelgraph/labeling.hpp"
#include "novelgraph/provider.hpp"
#include "novelgraph/relations.hpp"

namespace novelgraph {

enum class Stage { corpus, entities, relations, embeddings, clustering, labeling, kg };

std::string to_string(Stage stage);
Stage parse_stage(std::string_view name);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StageError : public std::runtime_error {
public:
    StageError(Stage stage, const std::string& what, bool provider_failure)
        : std::runtime_error(to_string(stage) + ": " + what), stage_(stage), provider_failure_(provider_failure) {}
    Stage stage() const { return stage_; }
    bool provider_failure() const { return provider_failure_; }

private:
    Stage stage_;
    bool provider_failure_;
};

// A run directory lacks a file a later step needs.
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ClusteringConfig {
    Algorithm algorithm = Algorithm::kmeans;
    std::size_t k = 200;
    double eps = 0.3;
    std::size_t min_pts = 2;
    Metric metric = Metric::cosine;
    std::uint64_t seed = 0;
    std::vector<std::size_t> k_grid;   // silhouette selection when non-empty
    std::vector<double> eps_sweep;     // DBSCAN diagnostic sweep when non-empty
    std::size_t sweep_min_pts = 1;
};

struct PipelineConfig {
    std::vector<std::filesystem::path> inputs;  // absolute
    DealiasConfig dealias;
    std::optional<std::filesystem::path> alias_overrides;
    std::optional<std::filesystem::path> gazetteer;
    std::optional<ProviderSpec> tagger;
    ProviderSpec embedding;
    std::optional<std::filesystem::path> embedding_cache;
    std::size_t batch_size = 64;
    ClusteringConfig clustering;
    std::optional<ProviderSpec> summarizer;
    double tau = 0.35;
    std::filesystem::path output_dir;

    // Relative paths resolve against `base_dir`. A missing output_dir means
    // `base_dir` itself. Throws ConfigError.
    static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static PipelineConfig load(const std::filesystem::path& file);

    // Throws ConfigError.
    void validate() const;

    // Everything except output_dir, so the copy stored in a run directory
    // re-runs into that same directory.
    nlohmann::ordered_json to_json() const;
};

struct ClusteringDiagnostics {
    std::size_t distinct_points = 0;
    std::size_t requested_k = 0;
    std::optional<KSelection> selection;
    bool selection_used = false;
    std::vector<SweepPoint> sweep;
    std::optional<double> silhouette;

    nlohmann::ordered_json to_json() const;
    static ClusteringDiagnostics from_json(const nlohmann::json& j);
};

struct RunReport {
    std::string run_id;
    std::size_t documents = 0;
    std::size_t sentences = 0;
    std::size_t characters = 0;
    std::size_t relational_sentences = 0;
    std::size_t symmetric_sentences = 0;
    std::size_t instances = 0;  // after symmetric expansion
    std::size_t embedding_dim = 0;
    std::string algorithm;
    std::string metric;
    std::size_t clusters = 0;
    std::size_t singleton_clusters = 0;
    double singleton_fraction = 0.0;
    std::size_t noise = 0;
    ClusteringDiagnostics diagnostics;
    std::size_t labeled_clusters = 0;
    std::size_t unlabeled_clusters = 0;
    std::size_t edges = 0;
    std::size_t total_weight = 0;
    std::vector<std::vector<std::string>> components;
    std::vector<std::string> warnings;

    // "N suitable sentences out of M, grouped in K clusters"
    std::string summary_line() const;
    nlohmann::ordered_json to_json() const;
};

struct RunOptions {
    std::optional<Stage> from_stage;  // earlier stages are read back from output_dir
};

// Runs the configured stages, writing every artifact into output_dir.
// Throws StageError naming the failing stage; files written so far stay.
RunReport run(const PipelineConfig& config, const RunOptions& options = {});

// Recomputes the report of a finished run from its artifacts.
// Throws ArtifactError when something is missing.
RunReport stats(const std::filesystem::path& run_dir);

// Artifact file names inside a run directory.
namespace artifact {
inline constexpr const char* config = "config.json";
inline constexpr const char* sentences = "sentences.tsv";
inline constexpr const char* aliases = "aliases.json";
inline constexpr const char* canonical = "canonical.tsv";
inline constexpr const char* instances = "instances.jsonl";
inline constexpr const char* embeddings = "embeddings.jsonl";
inline constexpr const char* assignment = "assignment.json";
inline constexpr const char* clusters = "clusters.json";
inline constexpr const char* diagnostics = "diagnostics.json";
inline constexpr const char* labels = "labels.json";
inline constexpr const char* labels_tsv = "labels.tsv";
inline constexpr const char* graph = "graph.json";
inline constexpr const char* triples = "triples.tsv";
inline constexpr const char* dot = "graph.dot";
inline constexpr const char* report = "report.json";
}  // namespace artifact

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

nlohmann::ordered_json clusters_to_json(const ClusterSet& clusters);
ClusterSet clusters_from_json(const nlohmann::json& j);

nlohmann::ordered_json summaries_to_json(std::span<const ClusterSummary> summaries, std::span<const RelationLabel> labels);
void summaries_from_json(const nlohmann::json& j, std::vector<ClusterSummary>& summaries, std::vector<RelationLabel>& labels);

}  // namespace novelgraph
