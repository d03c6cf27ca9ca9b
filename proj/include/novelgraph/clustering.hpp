#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "novelgraph/density.hpp"
#include "novelgraph/embeddings.hpp"

namespace novelgraph {

enum class Algorithm { kmeans, dbscan };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct ClusterAssignment {
    std::vector<int> labels;  // per input point: cluster index or kNoise
    std::size_t k = 0;        // non-noise clusters, indexed 0..k-1 by first appearance
    Algorithm algorithm = Algorithm::kmeans;
    Metric metric = Metric::euclidean;
    std::uint64_t seed = 0;

    // k-means only: objective after every update step, and iteration count.
    std::vector<double> objective_trace;
    std::size_t iterations = 0;

    std::size_t noise_count() const;
    std::vector<std::size_t> cluster_sizes() const;
};

// Lloyd iterations from k-means++ seeding until the assignment is a fixed
// point or 300 iterations. With the cosine metric points are L2-normalized
// and clustered on the sphere. Throws std::invalid_argument when k is 0 or
// exceeds the number of distinct points.
ClusterAssignment kmeans(std::span<const Vector> points, std::size_t k, Metric metric, std::uint64_t seed);

ClusterAssignment dbscan(std::span<const Vector> points, double eps, std::size_t min_pts, Metric metric);

// Mean silhouette over non-noise points using the assignment's metric;
// singleton-cluster points score 0. Throws std::invalid_argument with fewer
// than two non-noise clusters.
double silhouette(std::span<const Vector> points, const ClusterAssignment& assignment);

struct KSelection {
    std::size_t k = 0;
    std::vector<std::size_t> grid;   // sorted, unique
    std::vector<double> scores;      // silhouette per grid entry
    bool monotone = false;           // strictly increasing or decreasing over >= 3 entries
};

KSelection select_k(std::span<const Vector> points, std::span<const std::size_t> k_grid, Metric metric,
                    std::uint64_t seed);

struct RelationCluster {
    std::size_t cluster_id = 0;
    std::vector<std::string> members;  // instance ids in input order
    Vector centroid;                   // arithmetic mean of member vectors
    std::string medoid;                // member nearest the centroid
};

struct ClusterSet {
    std::vector<RelationCluster> clusters;
    std::vector<std::string> noise;
};

ClusterSet build_clusters(const ClusterAssignment& assignment, std::span<const EmbeddedSentence> embedded);

struct SweepPoint {
    double eps = 0.0;
    std::size_t clusters = 0;
    std::size_t singleton_clusters = 0;
    std::size_t largest_cluster = 0;
    std::size_t noise = 0;
    double singleton_fraction = 0.0;  // singleton clusters / clusters (0 when none)
};

double singleton_fraction(const ClusterAssignment& assignment);

// DBSCAN at every eps, reporting how cluster structure degenerates.
std::vector<SweepPoint> dbscan_sweep(std::span<const Vector> points, std::span<const double> eps_values,
                                     std::size_t min_pts, Metric metric);

// {algorithm, metric, k, seed, labels:{instance_id: cluster}}; noise is -1.
nlohmann::ordered_json assignment_to_json(const ClusterAssignment& assignment, std::span<const std::string> ids);
// Labels come back in the order of `ids`.
ClusterAssignment assignment_from_json(const nlohmann::json& j, std::span<const std::string> ids);

}  // namespace novelgraph
