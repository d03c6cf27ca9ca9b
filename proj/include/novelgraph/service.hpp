#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "novelgraph/annotation.hpp"
#include "novelgraph/embeddings.hpp"
#include "novelgraph/kg.hpp"
#include "novelgraph/pipeline.hpp"

namespace httplib {
class Server;
}

namespace novelgraph {

// Review backend over one finished run. Cluster artifacts are read once and
// never change; only annotations mutate.
class AnnotationService {
public:
    struct Options {
        std::optional<std::filesystem::path> ui_dir;
        std::optional<std::filesystem::path> annotations_dir;  // default <run>/annotations
        std::optional<ProviderSpec> embedding;                 // default: the run's own provider
        std::optional<double> tau;                             // default: the run's configured tau
        std::size_t page_size = 20;
        AnnotationStore::Clock clock;
    };

    explicit AnnotationService(const std::filesystem::path& run_dir) : AnnotationService(run_dir, Options()) {}
    AnnotationService(const std::filesystem::path& run_dir, Options options);
    ~AnnotationService();

    const std::string& run_id() const { return run_id_; }

    // status filter, sort "cluster_id" or "size", 1-based page.
    nlohmann::ordered_json list_clusters(std::optional<AnnotationStatus> status, const std::string& sort,
                                         std::size_t page) const;
    nlohmann::ordered_json cluster(std::size_t cluster_id) const;
    nlohmann::ordered_json annotate(std::size_t cluster_id, const nlohmann::json& body);
    nlohmann::ordered_json classify(const std::string& text);
    nlohmann::ordered_json report() const;
    nlohmann::ordered_json aliases() const;
    std::string graph(GraphFormat format) const;

    AnnotationStore& store() { return *store_; }

    // Routes all endpoints on `server` (static UI included when configured).
    void mount(httplib::Server& server);

    // Blocks until stop().
    void listen(const std::string& host, int port);
    // Binds an ephemeral port and serves from a background thread.
    int start_background(const std::string& host = "127.0.0.1");
    void stop();

private:
    std::shared_ptr<const RelationClassifier> current_classifier();
    nlohmann::ordered_json view(const RelationCluster& c, bool with_members) const;

    std::filesystem::path run_dir_;
    Options options_;
    std::string run_id_;
    PipelineConfig config_;
    nlohmann::json report_;
    AliasTable aliases_;
    ClusterSet clusters_;
    std::vector<RelationalInstance> instances_;
    InstanceIndex index_;
    std::vector<ClusterSummary> summaries_;
    std::vector<RelationLabel> labels_;
    KnowledgeGraph graph_;
    std::unique_ptr<AnnotationStore> store_;

    std::mutex classifier_mutex_;
    std::shared_ptr<const RelationClassifier> classifier_;
    std::uint64_t classifier_generation_ = ~std::uint64_t{0};

    std::mutex embed_mutex_;
    std::unique_ptr<EmbeddingProvider> embedder_;

    std::unique_ptr<httplib::Server> server_;
    std::unique_ptr<std::thread> thread_;
};

}  // namespace novelgraph
