#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "novelgraph/clustering.hpp"
#include "novelgraph/density.hpp"
#include "oracles.hpp"

using namespace novelgraph;

namespace {

std::vector<Vector> to_vectors(const std::vector<oracle::Point>& points) {
    std::vector<Vector> out;
    for (const auto& p : points) out.emplace_back(p);
    return out;
}

std::vector<oracle::Point> blobs(std::mt19937_64& rng, const std::vector<oracle::Point>& centers, std::size_t per_blob,
                                 double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<oracle::Point> out;
    for (std::size_t i = 0; i < per_blob; ++i) {
        for (const auto& c : centers) {
            // Rejection sample inside the radius.
            oracle::Point p;
            do {
                p = c;
                for (auto& x : p) x += radius * u(rng);
            } while (oracle::euclid(p, c) > radius);
            out.push_back(p);
        }
    }
    return out;
}

std::set<std::set<std::size_t>> partition_of(const std::vector<int>& labels, const std::vector<std::size_t>& original) {
    std::map<int, std::set<std::size_t>> groups;
    std::set<std::set<std::size_t>> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) out.insert({original[i] + 100000});  // noise kept distinct
        else groups[labels[i]].insert(original[i]);
    }
    for (auto& [_, g] : groups) out.insert(g);
    return out;
}

std::vector<oracle::Point> collinear(std::size_t n) {
    std::vector<oracle::Point> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back({static_cast<double>(i), 0.0});
    return out;
}

}  // namespace

TEST(KMeans, SingleClusterAndOnePerPoint) {
    const auto points = to_vectors({{0, 0}, {2, 0}, {0, 4}, {5, 5}});
    const auto one = kmeans(points, 1, Metric::euclidean, 0);
    EXPECT_EQ(one.k, 1u);
    EXPECT_EQ(one.labels, (std::vector<int>{0, 0, 0, 0}));
    const auto clusters = build_clusters(one, std::vector<EmbeddedSentence>{{"a", points[0]}, {"b", points[1]}, {"c", points[2]}, {"d", points[3]}});
    EXPECT_EQ(clusters.clusters[0].centroid, Vector({1.75, 2.25}));
    const auto each = kmeans(points, 4, Metric::euclidean, 0);
    EXPECT_EQ(each.labels, (std::vector<int>{0, 1, 2, 3}));
}

TEST(KMeans, Errors) {
    const auto points = to_vectors({{0, 0}, {0, 0}, {1, 1}});
    EXPECT_THROW(kmeans(points, 0, Metric::euclidean, 0), std::invalid_argument);
    EXPECT_THROW(kmeans(points, 3, Metric::euclidean, 0), std::invalid_argument);
    EXPECT_NO_THROW(kmeans(points, 2, Metric::euclidean, 0));
    EXPECT_THROW(kmeans(to_vectors({{0, 0}, {1}}), 1, Metric::euclidean, 0), std::invalid_argument);
}

TEST(KMeans, RecoversOptimalTwoPartition) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> where(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double radius = 1.0;
        oracle::Point a{where(rng), where(rng)}, b;
        do {
            b = {where(rng), where(rng)};
        } while (oracle::euclid(a, b) < 10.0 * radius);
        const auto points = blobs(rng, {a, b}, 5, radius);
        const auto expected = oracle::best_two_partition(points);
        const auto got = kmeans(to_vectors(points), 2, Metric::euclidean, static_cast<std::uint64_t>(trial));
        EXPECT_EQ(oracle::canonical_labels(got.labels), expected) << "trial " << trial;
    }
}

TEST(KMeans, ObjectiveNeverIncreases) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vector> points;
        for (int i = 0; i < 80; ++i) points.push_back(Vector({g(rng), g(rng), g(rng)}));
        for (auto metric : {Metric::euclidean, Metric::cosine}) {
            const auto a = kmeans(points, 6, metric, static_cast<std::uint64_t>(trial));
            ASSERT_FALSE(a.objective_trace.empty());
            for (std::size_t i = 1; i < a.objective_trace.size(); ++i)
                EXPECT_LE(a.objective_trace[i], a.objective_trace[i - 1] + 1e-12);
            EXPECT_LE(a.iterations, 300u);
        }
    }
}

TEST(KMeans, DeterministicPerSeed) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g;
    std::vector<Vector> points;
    std::vector<std::string> ids;
    for (int i = 0; i < 60; ++i) {
        points.push_back(Vector({g(rng), g(rng)}));
        ids.push_back("p" + std::to_string(i));
    }
    const auto a = kmeans(points, 5, Metric::cosine, 42);
    const auto b = kmeans(points, 5, Metric::cosine, 42);
    EXPECT_EQ(assignment_to_json(a, ids).dump(), assignment_to_json(b, ids).dump());
    EXPECT_EQ(a.objective_trace, b.objective_trace);
    // Labels are numbered by first appearance.
    EXPECT_EQ(a.labels, oracle::canonical_labels(a.labels));
}

TEST(KMeans, CosineClustersByDirection) {
    // Same directions at very different magnitudes.
    const auto points = to_vectors({{1, 0.1}, {100, 9}, {0.1, 1}, {8, 90}, {5, 0.4}, {0.3, 7}});
    const auto a = kmeans(points, 2, Metric::cosine, 3);
    EXPECT_EQ(a.labels, (std::vector<int>{0, 0, 1, 1, 0, 1}));
}

TEST(DBSCAN, TrivialCases) {
    const auto same = to_vectors({{1, 1}, {1, 1}, {1, 1}});
    const auto one = dbscan(same, 0.1, 2, Metric::euclidean);
    EXPECT_EQ(one.labels, (std::vector<int>{0, 0, 0}));
    EXPECT_EQ(one.noise_count(), 0u);
    const auto spread = to_vectors({{0, 0}, {3, 0}, {0, 3}});
    const auto none = dbscan(spread, 1.0, 2, Metric::euclidean);
    EXPECT_EQ(none.labels, (std::vector<int>{kNoise, kNoise, kNoise}));
    EXPECT_EQ(none.k, 0u);
    EXPECT_THROW(dbscan(spread, 0.0, 2, Metric::euclidean), std::invalid_argument);
    EXPECT_THROW(dbscan(spread, 1.0, 0, Metric::euclidean), std::invalid_argument);
}

TEST(DBSCAN, MatchesReachabilityOracle) {
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<oracle::Point> points;
        for (std::size_t i = 0; i < n; ++i) points.push_back({u(rng), u(rng)});
        const double eps = 0.5 + u(rng) / 3.0;
        const std::size_t min_pts = 1 + rng() % 4;
        std::vector<std::vector<double>> dist(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) dist[i][j] = oracle::euclid(points[i], points[j]);
        }
        const auto got = dbscan(to_vectors(points), eps, min_pts, Metric::euclidean);
        ASSERT_EQ(got.labels, oracle::canonical_labels(oracle::density_labels(dist, eps, min_pts))) << "trial " << trial;
    }
}

TEST(DBSCAN, PermutationInvariantOnTieFreeInput) {
    // Two dense chains far apart plus one outlier: no border point is shared.
    std::vector<oracle::Point> points{{0, 0}, {0.5, 0}, {1.0, 0}, {1.5, 0}, {20, 0}, {20.5, 0}, {21, 0}, {50, 50}};
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    const auto reference = partition_of(dbscan(to_vectors(points), 0.6, 2, Metric::euclidean).labels, order);
    std::mt19937_64 rng(9);
    for (int t = 0; t < 20; ++t) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<oracle::Point> shuffled;
        for (auto i : order) shuffled.push_back(points[i]);
        EXPECT_EQ(partition_of(dbscan(to_vectors(shuffled), 0.6, 2, Metric::euclidean).labels, order), reference);
    }
}

TEST(Silhouette, HandComputedFourPoints) {
    const auto points = to_vectors({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
    ClusterAssignment a;
    a.labels = {0, 0, 1, 1};
    a.k = 2;
    a.metric = Metric::euclidean;
    // a = 1, b = (10 + sqrt(101)) / 2 for every point.
    EXPECT_NEAR(silhouette(points, a), 0.90024875775821944, 1e-12);
    EXPECT_NEAR(silhouette(points, a), 1.0 - 2.0 / (10.0 + std::sqrt(101.0)), 1e-12);
}

TEST(Silhouette, Errors) {
    const auto points = to_vectors({{0, 0}, {1, 1}});
    ClusterAssignment a;
    a.labels = {0, 0};
    a.k = 1;
    EXPECT_THROW(silhouette(points, a), std::invalid_argument);
}

TEST(Silhouette, MatchesFormulaOracle) {
    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng() % 20;
        const int k = 2 + static_cast<int>(rng() % 3);
        std::vector<oracle::Point> points;
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            points.push_back({u(rng), u(rng), u(rng)});
            labels[i] = i < static_cast<std::size_t>(k) ? static_cast<int>(i) : static_cast<int>(rng() % (k + 1)) - 1;
        }
        for (auto metric : {Metric::euclidean, Metric::cosine}) {
            ClusterAssignment a;
            a.labels = labels;
            a.k = static_cast<std::size_t>(k);
            a.metric = metric;
            const auto d = metric == Metric::euclidean ? oracle::euclid : oracle::cosine;
            EXPECT_NEAR(silhouette(to_vectors(points), a), oracle::silhouette(points, labels, d), 1e-9);
        }
    }
}

TEST(Silhouette, SeparatedBlobsAndDuplicates) {
    std::mt19937_64 rng(4);
    const auto points = blobs(rng, {{0, 0}, {100, 100}}, 10, 1.0);
    const auto a = kmeans(to_vectors(points), 2, Metric::euclidean, 0);
    EXPECT_GT(silhouette(to_vectors(points), a), 0.9);

    // Each cluster collapsed to one location: score 1, unchanged by duplication.
    auto stacked = to_vectors({{0, 0}, {0, 0}, {0, 0}, {5, 5}, {5, 5}, {9, 0}, {9, 0}});
    ClusterAssignment s;
    s.labels = {0, 0, 0, 1, 1, 2, 2};
    s.k = 3;
    const double before = silhouette(stacked, s);
    EXPECT_EQ(before, 1.0);
    const auto n = stacked.size();
    for (std::size_t i = 0; i < n; ++i) {
        stacked.push_back(stacked[i]);
        s.labels.push_back(s.labels[i]);
    }
    EXPECT_EQ(silhouette(stacked, s), before);
}

TEST(SelectK, GridAndBlobs) {
    std::mt19937_64 rng(5);
    const auto three = to_vectors(blobs(rng, {{0, 0}, {30, 0}, {0, 30}}, 6, 1.0));
    const std::size_t only_two[] = {2};
    EXPECT_EQ(select_k(three, only_two, Metric::euclidean, 0).k, 2u);
    const std::size_t grid[] = {4, 2, 3, 3};
    const auto sel = select_k(three, grid, Metric::euclidean, 0);
    EXPECT_EQ(sel.k, 3u);
    EXPECT_EQ(sel.grid, (std::vector<std::size_t>{2, 3, 4}));
    EXPECT_FALSE(sel.monotone);
    for (std::size_t i = 0; i < sel.grid.size(); ++i) {
        const auto a = kmeans(three, sel.grid[i], Metric::euclidean, 0);
        const auto pts = [&] {
            std::vector<oracle::Point> p;
            for (const auto& v : three) p.push_back(v.values);
            return p;
        }();
        EXPECT_NEAR(sel.scores[i], oracle::silhouette(pts, a.labels, oracle::euclid), 1e-9);
    }
    EXPECT_THROW(select_k(three, std::span<const std::size_t>{}, Metric::euclidean, 0), std::invalid_argument);
}

TEST(SelectK, CollinearIsMonotone) {
    const auto raw = collinear(12);
    const auto points = to_vectors(raw);
    const std::size_t grid[] = {2, 3, 4, 5, 6};
    const auto sel = select_k(points, grid, Metric::euclidean, 0);
    ASSERT_EQ(sel.scores.size(), 5u);
    for (std::size_t i = 0; i < sel.grid.size(); ++i) {
        const auto a = kmeans(points, sel.grid[i], Metric::euclidean, 0);
        EXPECT_NEAR(sel.scores[i], oracle::silhouette(raw, a.labels, oracle::euclid), 1e-9);
    }
    for (std::size_t i = 1; i < sel.scores.size(); ++i) EXPECT_LT(sel.scores[i], sel.scores[i - 1]);
    EXPECT_TRUE(sel.monotone);
    EXPECT_EQ(sel.k, 2u);
}

TEST(BuildClusters, CentroidMedoidAndNoise) {
    ClusterAssignment single;
    single.labels = {0};
    single.k = 1;
    const std::vector<EmbeddedSentence> one{{"only", Vector({3, 4})}};
    const auto s = build_clusters(single, one);
    EXPECT_EQ(s.clusters[0].medoid, "only");

    ClusterAssignment pair;
    pair.labels = {0, kNoise, 0};
    pair.k = 1;
    const std::vector<EmbeddedSentence> three{{"a", Vector({0, 0})}, {"n", Vector({9, 9})}, {"b", Vector({2, 4})}};
    const auto p = build_clusters(pair, three);
    ASSERT_EQ(p.clusters.size(), 1u);
    EXPECT_EQ(p.clusters[0].centroid, Vector({1, 2}));
    EXPECT_EQ(p.clusters[0].members, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(p.noise, (std::vector<std::string>{"n"}));
}

TEST(BuildClusters, MedoidMatchesExhaustiveScan) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    for (auto metric : {Metric::euclidean, Metric::cosine}) {
        for (int trial = 0; trial < 25; ++trial) {
            std::vector<EmbeddedSentence> six;
            oracle::Point mean(4, 0.0);
            for (int i = 0; i < 6; ++i) {
                oracle::Point p{g(rng), g(rng), g(rng), g(rng)};
                for (int k = 0; k < 4; ++k) mean[k] += p[k] / 6.0;
                six.push_back({"m" + std::to_string(i), Vector(p)});
            }
            ClusterAssignment a;
            a.labels.assign(6, 0);
            a.k = 1;
            a.metric = metric;
            const auto c = build_clusters(a, six).clusters.front();
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < 6; ++i) {
                const double d = metric == Metric::euclidean ? oracle::euclid(six[i].vector.values, mean)
                                                             : oracle::cosine(six[i].vector.values, mean);
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            EXPECT_EQ(c.medoid, six[best].instance_id);
            for (int k = 0; k < 4; ++k) EXPECT_NEAR(c.centroid.values[k], mean[k], 1e-12);
        }
    }
}

TEST(Sweep, SingletonFractionFallsThenCollapses) {
    const auto points = to_vectors(collinear(10));
    const double eps[] = {0.5, 1.0, 20.0};
    const auto sweep = dbscan_sweep(points, eps, 1, Metric::euclidean);
    ASSERT_EQ(sweep.size(), 3u);
    EXPECT_EQ(sweep[0].clusters, 10u);
    EXPECT_EQ(sweep[0].singleton_fraction, 1.0);
    EXPECT_EQ(sweep[1].clusters, 1u);
    EXPECT_EQ(sweep[1].largest_cluster, 10u);
    EXPECT_EQ(sweep[2].singleton_clusters, 0u);
}

TEST(AssignmentJson, RoundTrip) {
    ClusterAssignment a;
    a.labels = {1, kNoise, 0, 1};
    a.k = 2;
    a.algorithm = Algorithm::dbscan;
    a.metric = Metric::cosine;
    a.seed = 9;
    const std::vector<std::string> ids{"x", "y", "z", "w"};
    const auto j = assignment_to_json(a, ids);
    EXPECT_EQ(j["algorithm"], "dbscan");
    EXPECT_EQ(j["labels"]["y"], -1);
    const auto back = assignment_from_json(j, ids);
    EXPECT_EQ(back.labels, a.labels);
    EXPECT_EQ(back.k, 2u);
    EXPECT_EQ(back.metric, Metric::cosine);
    EXPECT_EQ(assignment_to_json(back, ids).dump(), j.dump());
    const std::vector<std::string> missing{"x", "y", "z", "v"};
    EXPECT_THROW(assignment_from_json(j, missing), std::invalid_argument);
    EXPECT_EQ(parse_algorithm("kmeans"), Algorithm::kmeans);
    EXPECT_THROW(parse_algorithm("spectral"), std::invalid_argument);
}
