#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace novelgraph {

inline constexpr int kNoise = -1;

// Classic DBSCAN over an arbitrary pairwise distance. Points are visited in
// index order, so clusters are numbered by their lowest-index core point and a
// border point belongs to the first cluster that reaches it. A point's own
// neighbourhood includes itself; neighbours are within distance <= eps.
template <class Distance>
std::vector<int> density_cluster(std::size_t n, Distance&& distance, double eps, std::size_t min_pts) {
    constexpr int kUnvisited = -2;
    std::vector<int> labels(n, kUnvisited);

    auto region = [&](std::size_t p) {
        std::vector<std::size_t> out;
        for (std::size_t q = 0; q < n; ++q) {
            if (q == p || distance(p, q) <= eps) out.push_back(q);
        }
        return out;
    };

    int next_cluster = 0;
    for (std::size_t p = 0; p < n; ++p) {
        if (labels[p] != kUnvisited) continue;
        auto neighbours = region(p);
        if (neighbours.size() < min_pts) {
            labels[p] = kNoise;
            continue;
        }
        const int cluster = next_cluster++;
        labels[p] = cluster;
        std::deque<std::size_t> frontier(neighbours.begin(), neighbours.end());
        while (!frontier.empty()) {
            const std::size_t q = frontier.front();
            frontier.pop_front();
            if (labels[q] == kNoise) labels[q] = cluster;
            if (labels[q] != kUnvisited) continue;
            labels[q] = cluster;
            auto reach = region(q);
            if (reach.size() >= min_pts) frontier.insert(frontier.end(), reach.begin(), reach.end());
        }
    }
    return labels;
}

}  // namespace novelgraph
