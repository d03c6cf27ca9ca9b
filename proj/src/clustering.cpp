#include "novelgraph/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace novelgraph {

std::string to_string(Algorithm algorithm) { return algorithm == Algorithm::dbscan ? "dbscan" : "kmeans"; }

Algorithm parse_algorithm(std::string_view name) {
    if (name == "kmeans") return Algorithm::kmeans;
    if (name == "dbscan") return Algorithm::dbscan;
    throw std::invalid_argument("unknown clustering algorithm: " + std::string(name));
}

std::size_t ClusterAssignment::noise_count() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
    std::vector<std::size_t> sizes(k, 0);
    for (const int l : labels) {
        if (l != kNoise) ++sizes[static_cast<std::size_t>(l)];
    }
    return sizes;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Uniform in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t distinct_count(std::span<const std::vector<double>> points) {
    std::set<std::vector<double>> seen(points.begin(), points.end());
    return seen.size();
}

void check_dims(std::span<const Vector> points) {
    for (const auto& p : points) {
        if (p.dim() != points.front().dim()) throw std::invalid_argument("points have differing dimensions");
    }
}

// Renumbers clusters by first appearance so labels are canonical.
std::size_t relabel_by_appearance(std::vector<int>& labels) {
    std::map<int, int> remap;
    for (int& l : labels) {
        if (l == kNoise) continue;
        const auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
        l = it->second;
    }
    return remap.size();
}

std::vector<std::vector<double>> distance_matrix(std::span<const Vector> points, Metric metric) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            d[i][j] = d[j][i] = distance(metric, points[i], points[j]);
        }
    }
    return d;
}

ClusterAssignment dbscan_on_matrix(const std::vector<std::vector<double>>& d, double eps, std::size_t min_pts,
                                   Metric metric) {
    ClusterAssignment out;
    out.algorithm = Algorithm::dbscan;
    out.metric = metric;
    out.labels = density_cluster(d.size(), [&](std::size_t i, std::size_t j) { return d[i][j]; }, eps, min_pts);
    out.k = relabel_by_appearance(out.labels);
    return out;
}

}  // namespace

ClusterAssignment kmeans(std::span<const Vector> points, std::size_t k, Metric metric, std::uint64_t seed) {
    if (k == 0) throw std::invalid_argument("k must be positive");
    check_dims(points);
    std::vector<std::vector<double>> pts;
    pts.reserve(points.size());
    for (const auto& p : points) pts.push_back(metric == Metric::cosine ? normalized(p).values : p.values);
    if (k > distinct_count(pts))
        throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the number of distinct points");

    const std::size_t n = pts.size();
    std::mt19937_64 rng(seed);

    // k-means++ seeding.
    std::vector<std::vector<double>> centers;
    centers.push_back(pts[std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)))]);
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(pts[i], centers[0]);
    while (centers.size() < k) {
        double total = 0.0;
        for (const double d : nearest) total += d;
        const double target = uniform01(rng) * total;
        double cumulative = 0.0;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (nearest[i] <= 0.0) continue;
            cumulative += nearest[i];
            pick = i;
            if (cumulative > target) break;
        }
        centers.push_back(pts[pick]);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(pts[i], centers.back()));
    }

    ClusterAssignment out;
    out.algorithm = Algorithm::kmeans;
    out.metric = metric;
    out.seed = seed;
    out.k = k;
    std::vector<int> labels(n, -1);
    const std::size_t dim = pts.front().size();

    for (std::size_t iter = 1; iter <= 300; ++iter) {
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(pts[i], centers[c]);
                if (d < best) {
                    best = d;
                    next[i] = static_cast<int>(c);
                }
            }
        }

        // Empty clusters take the farthest point of the largest cluster.
        std::vector<std::size_t> sizes(k, 0);
        for (const int l : next) ++sizes[static_cast<std::size_t>(l)];
        for (std::size_t e = 0; e < k; ++e) {
            if (sizes[e] != 0) continue;
            const auto largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (next[i] != static_cast<int>(largest)) continue;
                const double d = squared_distance(pts[i], centers[largest]);
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            next[far] = static_cast<int>(e);
            --sizes[largest];
            sizes[e] = 1;
            centers[e] = pts[far];
        }

        const bool changed = next != labels;
        labels = std::move(next);

        for (auto& c : centers) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = centers[static_cast<std::size_t>(labels[i])];
            for (std::size_t d = 0; d < dim; ++d) c[d] += pts[i][d];
        }
        for (std::size_t c = 0; c < k; ++c) {
            for (double& x : centers[c]) x /= static_cast<double>(sizes[c]);
        }
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) objective += squared_distance(pts[i], centers[static_cast<std::size_t>(labels[i])]);
        out.objective_trace.push_back(objective);
        out.iterations = iter;
        if (!changed) break;
    }

    out.labels = std::move(labels);
    relabel_by_appearance(out.labels);
    return out;
}

ClusterAssignment dbscan(std::span<const Vector> points, double eps, std::size_t min_pts, Metric metric) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("min_pts must be at least 1");
    check_dims(points);
    return dbscan_on_matrix(distance_matrix(points, metric), eps, min_pts, metric);
}

double silhouette(std::span<const Vector> points, const ClusterAssignment& assignment) {
    if (points.size() != assignment.labels.size()) throw std::invalid_argument("assignment does not cover the points");
    if (assignment.k < 2) throw std::invalid_argument("silhouette needs at least two clusters");
    const auto sizes = assignment.cluster_sizes();
    const auto d = distance_matrix(points, assignment.metric);
    const auto& labels = assignment.labels;

    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (labels[i] == kNoise) continue;
        ++counted;
        const auto own = static_cast<std::size_t>(labels[i]);
        if (sizes[own] == 1) continue;
        std::vector<double> sums(assignment.k, 0.0);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i || labels[j] == kNoise) continue;
            sums[static_cast<std::size_t>(labels[j])] += d[i][j];
        }
        const double a = sums[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < assignment.k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

KSelection select_k(std::span<const Vector> points, std::span<const std::size_t> k_grid, Metric metric,
                    std::uint64_t seed) {
    if (k_grid.empty()) throw std::invalid_argument("k grid is empty");
    KSelection out;
    out.grid.assign(k_grid.begin(), k_grid.end());
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());
    if (out.grid.front() < 2) throw std::invalid_argument("k grid values must be at least 2");

    double best = -std::numeric_limits<double>::infinity();
    for (const std::size_t k : out.grid) {
        const double score = silhouette(points, kmeans(points, k, metric, seed));
        out.scores.push_back(score);
        if (score > best) {
            best = score;
            out.k = k;
        }
    }
    if (out.scores.size() >= 3) {
        bool up = true;
        bool down = true;
        for (std::size_t i = 1; i < out.scores.size(); ++i) {
            up = up && out.scores[i] > out.scores[i - 1];
            down = down && out.scores[i] < out.scores[i - 1];
        }
        out.monotone = up || down;
    }
    return out;
}

ClusterSet build_clusters(const ClusterAssignment& assignment, std::span<const EmbeddedSentence> embedded) {
    if (embedded.size() != assignment.labels.size())
        throw std::invalid_argument("assignment does not cover the embedded sentences");
    ClusterSet out;
    out.clusters.resize(assignment.k);
    std::vector<std::vector<std::size_t>> members(assignment.k);
    for (std::size_t i = 0; i < embedded.size(); ++i) {
        const int l = assignment.labels[i];
        if (l == kNoise) {
            out.noise.push_back(embedded[i].instance_id);
        } else {
            members[static_cast<std::size_t>(l)].push_back(i);
        }
    }
    for (std::size_t c = 0; c < assignment.k; ++c) {
        auto& cluster = out.clusters[c];
        cluster.cluster_id = c;
        if (members[c].empty()) continue;
        const std::size_t dim = embedded[members[c].front()].vector.dim();
        cluster.centroid = Vector(dim);
        for (const auto i : members[c]) {
            cluster.members.push_back(embedded[i].instance_id);
            for (std::size_t d = 0; d < dim; ++d) cluster.centroid.values[d] += embedded[i].vector.values[d];
        }
        for (double& x : cluster.centroid.values) x /= static_cast<double>(members[c].size());

        const bool use_cosine = assignment.metric == Metric::cosine && norm(cluster.centroid) > 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (const auto i : members[c]) {
            const auto& v = embedded[i].vector;
            const double d = use_cosine && norm(v) > 0.0 ? cosine_distance(v, cluster.centroid)
                                                         : euclidean_distance(v, cluster.centroid);
            if (d < best) {
                best = d;
                cluster.medoid = embedded[i].instance_id;
            }
        }
    }
    return out;
}

double singleton_fraction(const ClusterAssignment& assignment) {
    if (assignment.k == 0) return 0.0;
    const auto sizes = assignment.cluster_sizes();
    const auto singles = std::count(sizes.begin(), sizes.end(), std::size_t{1});
    return static_cast<double>(singles) / static_cast<double>(assignment.k);
}

std::vector<SweepPoint> dbscan_sweep(std::span<const Vector> points, std::span<const double> eps_values,
                                     std::size_t min_pts, Metric metric) {
    check_dims(points);
    const auto d = distance_matrix(points, metric);
    std::vector<SweepPoint> out;
    for (const double eps : eps_values) {
        if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
        const auto a = dbscan_on_matrix(d, eps, min_pts, metric);
        const auto sizes = a.cluster_sizes();
        SweepPoint p;
        p.eps = eps;
        p.clusters = a.k;
        p.singleton_clusters = static_cast<std::size_t>(std::count(sizes.begin(), sizes.end(), std::size_t{1}));
        p.largest_cluster = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
        p.noise = a.noise_count();
        p.singleton_fraction = singleton_fraction(a);
        out.push_back(p);
    }
    return out;
}

nlohmann::ordered_json assignment_to_json(const ClusterAssignment& assignment, std::span<const std::string> ids) {
    if (ids.size() != assignment.labels.size()) throw std::invalid_argument("ids do not match assignment labels");
    nlohmann::ordered_json j;
    j["algorithm"] = to_string(assignment.algorithm);
    j["metric"] = to_string(assignment.metric);
    j["k"] = assignment.k;
    j["seed"] = assignment.seed;
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) labels[ids[i]] = assignment.labels[i];
    j["labels"] = labels;
    return j;
}

ClusterAssignment assignment_from_json(const nlohmann::json& j, std::span<const std::string> ids) {
    ClusterAssignment a;
    a.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    a.metric = parse_metric(j.at("metric").get<std::string>());
    a.k = j.at("k").get<std::size_t>();
    a.seed = j.at("seed").get<std::uint64_t>();
    const auto& labels = j.at("labels");
    for (const auto& id : ids) {
        if (!labels.contains(id)) throw std::invalid_argument("assignment has no label for " + id);
        const int l = labels[id].get<int>();
        if (l != kNoise && (l < 0 || static_cast<std::size_t>(l) >= a.k))
            throw std::invalid_argument("assignment label out of range for " + id);
        a.labels.push_back(l);
    }
    return a;
}

}  // namespace novelgraph
