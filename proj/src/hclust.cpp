/*
 Copyright 2026 The koopclust Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "koopclust/hclust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>

namespace koopclust::hclust {

ClusterAssignment::ClusterAssignment(std::vector<Cluster> clusters, std::size_t n_items)
    : clusters_(std::move(clusters)), label_(n_items, n_items) {
    std::size_t covered = 0;
    for (Cluster& c : clusters_) {
        if (c.empty()) {
            throw std::invalid_argument("clusters must be non-empty");
        }
        std::sort(c.begin(), c.end());
        covered += c.size();
    }
    if (covered != n_items) {
        throw std::invalid_argument("clusters do not partition the index set");
    }
    for (std::size_t i = 0; i < clusters_.size(); ++i) {
        for (std::size_t item : clusters_[i]) {
            if (item >= n_items || label_[item] != n_items) {
                throw std::invalid_argument("clusters overlap or reference an out-of-range index");
            }
            label_[item] = i;
        }
    }
}

ClusterAssignment ClusterAssignment::singletons(std::size_t n) {
    std::vector<Cluster> c(n);
    for (std::size_t i = 0; i < n; ++i) {
        c[i] = {i};
    }
    return ClusterAssignment(std::move(c), n);
}

Matrix pairwise_euclidean(const Matrix& vectors) {
    const Eigen::Index n = vectors.rows();
    if (n < 1) {
        throw std::invalid_argument("need at least one vector");
    }
    // Row access on a column-major matrix is strided; work on the transpose.
    const Matrix cols = vectors.transpose();
    Matrix dist = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double d = (cols.col(i) - cols.col(j)).norm();
            dist(i, j) = d;
            dist(j, i) = d;
        }
    }
    return dist;
}

Dendrogram single_linkage(const Matrix& dist) {
    const auto n = static_cast<std::size_t>(dist.rows());
    if (dist.rows() != dist.cols()) {
        throw std::invalid_argument("distance matrix must be square");
    }
    if (!dist.allFinite() || dist != dist.transpose() || (dist.diagonal().array() != 0.0).any()) {
        throw std::invalid_argument("distance matrix must be finite, symmetric and zero on the diagonal");
    }
    Dendrogram dendro;
    dendro.n_leaves = n;
    if (n < 2) {
        return dendro;
    }

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // Slot s holds the active cluster with id ids[s]; a merge reuses the slot
    // of its first operand. d is kept as a dense working copy.
    Matrix d = dist;
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::vector<bool> active(n, true);

    // Nearest active neighbour of each slot: smallest distance, then smallest id.
    std::vector<std::size_t> nn(n, n);
    std::vector<double> nn_dist(n, kInf);
    const auto refresh = [&](std::size_t s) {
        nn[s] = n;
        nn_dist[s] = kInf;
        for (std::size_t t = 0; t < n; ++t) {
            if (t == s || !active[t]) {
                continue;
            }
            const double v = d(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
            if (v < nn_dist[s] || (v == nn_dist[s] && (nn[s] == n || ids[t] < ids[nn[s]]))) {
                nn[s] = t;
                nn_dist[s] = v;
            }
        }
    };
    for (std::size_t s = 0; s < n; ++s) {
        refresh(s);
    }

    dendro.merges.reserve(n - 1);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        // Global choice keyed by (distance, smaller id, larger id).
        std::size_t best = n;
        std::tuple<double, std::size_t, std::size_t> best_key{kInf, n + m, n + m};
        for (std::size_t s = 0; s < n; ++s) {
            if (!active[s] || nn[s] == n) {
                continue;
            }
            const std::size_t a = std::min(ids[s], ids[nn[s]]);
            const std::size_t b = std::max(ids[s], ids[nn[s]]);
            const std::tuple<double, std::size_t, std::size_t> key{nn_dist[s], a, b};
            if (best == n || key < best_key) {
                best = s;
                best_key = key;
            }
        }
        const std::size_t s1 = best;
        const std::size_t s2 = nn[best];
        const auto [distance, id_a, id_b] = best_key;
        const std::size_t new_id = n + m;
        dendro.merges.push_back({id_a, id_b, distance, new_id});

        // Merged cluster lives in s1; s2 retires.
        active[s2] = false;
        ids[s1] = new_id;
        const auto i1 = static_cast<Eigen::Index>(s1);
        const auto i2 = static_cast<Eigen::Index>(s2);
        for (std::size_t t = 0; t < n; ++t) {
            if (!active[t] || t == s1) {
                continue;
            }
            const auto it = static_cast<Eigen::Index>(t);
            const double v = std::min(d(i1, it), d(i2, it));
            d(i1, it) = v;
            d(it, i1) = v;
        }
        // The merged distance never drops below a neighbour's current
        // nearest distance, so only slots that pointed at the merged pair (or
        // now tie with the higher-id merged cluster) need a rescan.
        for (std::size_t t = 0; t < n; ++t) {
            if (active[t] && t != s1 && (nn[t] == s1 || nn[t] == s2)) {
                refresh(t);
            }
        }
        refresh(s1);
    }
    return dendro;
}

ClusterAssignment cut(const Dendrogram& dendro, std::size_t k) {
    const std::size_t n = dendro.n_leaves;
    if (k < 1 || k > n) {
        throw std::out_of_range("cluster count " + std::to_string(k) + " outside [1, " +
                                std::to_string(n) + "]");
    }
    if (dendro.merges.size() + 1 != n) {
        throw std::invalid_argument("dendrogram must contain n_leaves - 1 merges");
    }
    // Union-find over the first n - k merges.
    std::vector<std::size_t> parent(2 * n - 1);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t m = 0; m < n - k; ++m) {
        const Merge& mg = dendro.merges[m];
        parent[find(mg.cluster_a)] = mg.new_cluster;
        parent[find(mg.cluster_b)] = mg.new_cluster;
    }
    std::vector<Cluster> clusters;
    std::vector<std::size_t> slot(2 * n - 1, n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = find(i);
        if (slot[root] == n) {
            slot[root] = clusters.size();
            clusters.emplace_back();
        }
        clusters[slot[root]].push_back(i);
    }
    return ClusterAssignment(std::move(clusters), n);
}

nlohmann::json Dendrogram::to_json() const {
    nlohmann::json merges_json = nlohmann::json::array();
    for (const Merge& m : merges) {
        merges_json.push_back({{"a", m.cluster_a}, {"b", m.cluster_b}, {"distance", m.distance},
                               {"id", m.new_cluster}});
    }
    return {{"n_leaves", n_leaves}, {"merges", merges_json}};
}

Dendrogram Dendrogram::from_json(const nlohmann::json& j) {
    Dendrogram d;
    d.n_leaves = j.at("n_leaves").get<std::size_t>();
    for (const auto& m : j.at("merges")) {
        d.merges.push_back({m.at("a").get<std::size_t>(), m.at("b").get<std::size_t>(),
                            m.at("distance").get<double>(), m.at("id").get<std::size_t>()});
    }
    return d;
}

}  // namespace koopclust::hclust
