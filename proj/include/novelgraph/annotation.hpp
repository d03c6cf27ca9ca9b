#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "novelgraph/clustering.hpp"
#include "novelgraph/embeddings.hpp"
#include "novelgraph/labeling.hpp"

namespace novelgraph {

enum class AnnotationStatus { pending, validated, edited, rejected };
enum class Decision { validate, edit, reject };

std::string to_string(AnnotationStatus status);
AnnotationStatus parse_status(std::string_view name);
Decision parse_decision(std::string_view name);

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Annotation {
    std::size_t cluster_id = 0;
    AnnotationStatus status = AnnotationStatus::pending;
    std::string final_label;  // automatic label until a decision says otherwise
    std::string note;
    std::string timestamp;    // ISO 8601 UTC, empty while pending
    std::uint64_t version = 0;

    nlohmann::ordered_json to_json() const;
    static Annotation from_json(const nlohmann::json& j);
};

struct AnnotateResult {
    Annotation annotation;
    bool conflict = false;  // expected_version was stale; the write still won
    std::uint64_t previous_version = 0;
};

// Append-only log plus a compacted snapshot, both JSON, under `dir`.
// Writes are serialized; every write appends to the log and then replaces
// the snapshot atomically.
class AnnotationStore {
public:
    using Clock = std::function<std::string()>;

    AnnotationStore(std::filesystem::path dir, std::string run_id, std::map<std::size_t, std::string> automatic_labels,
                    Clock clock = {});

    Annotation get(std::size_t cluster_id) const;
    std::vector<Annotation> all() const;

    // Throws NotFoundError for unknown clusters and std::invalid_argument for
    // an edit without a usable label. Editing to the automatic label counts
    // as validation.
    AnnotateResult annotate(std::size_t cluster_id, Decision decision, std::optional<std::string> label = {},
                            std::string note = {}, std::optional<std::uint64_t> expected_version = {});

    // Increments on every write.
    std::uint64_t generation() const;
    const std::string& run_id() const { return run_id_; }

    std::filesystem::path log_path() const { return dir_ / "annotations.log.jsonl"; }
    std::filesystem::path snapshot_path() const { return dir_ / "annotations.json"; }
    std::string snapshot() const;

private:
    void load();
    void write_snapshot() const;

    std::filesystem::path dir_;
    std::string run_id_;
    std::map<std::size_t, std::string> automatic_;
    std::map<std::size_t, Annotation> current_;
    Clock clock_;
    std::uint64_t generation_ = 0;
    mutable std::mutex mutex_;
};

std::string utc_timestamp();

struct Classification {
    std::string label;
    std::string source;  // "validated" or "automatic"
    double distance = 0.0;
    std::size_t cluster_id = 0;
};

// Nearest validated (or edited) centroid within tau wins; otherwise the
// nearest non-rejected cluster's automatic label.
class RelationClassifier {
public:
    struct Entry {
        std::size_t cluster_id = 0;
        Vector centroid;
        std::string automatic_label;
        std::string final_label;
        bool validated = false;
    };

    RelationClassifier() = default;
    RelationClassifier(std::vector<Entry> entries, Metric metric, double tau);

    static RelationClassifier build(const ClusterSet& clusters, std::span<const RelationLabel> labels,
                                    std::span<const Annotation> annotations, Metric metric, double tau);

    // Throws std::runtime_error when no cluster is usable.
    Classification classify(const Vector& v) const;

    const std::vector<Entry>& entries() const { return entries_; }
    double tau() const { return tau_; }

private:
    std::vector<Entry> entries_;
    Metric metric_ = Metric::cosine;
    double tau_ = 0.35;
};

}  // namespace novelgraph
