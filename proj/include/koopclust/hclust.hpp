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

#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "koopclust/types.hpp"

namespace koopclust::hclust {

// One agglomeration. Leaves carry ids 0..n-1; the merge at position m creates
// cluster n + m.
struct Merge {
    std::size_t cluster_a = 0;  // smaller id
    std::size_t cluster_b = 0;
    double distance = 0.0;
    std::size_t new_cluster = 0;

    friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
    std::vector<Merge> merges;
    std::size_t n_leaves = 0;

    nlohmann::json to_json() const;
    static Dendrogram from_json(const nlohmann::json& j);
};

using Cluster = std::vector<std::size_t>;

// Disjoint, covering, non-empty index sets, each sorted ascending. Cluster
// order is the order given at construction.
class ClusterAssignment {
public:
    ClusterAssignment() = default;

    // Validates the partition of 0..n_items-1 and sorts each cluster.
    ClusterAssignment(std::vector<Cluster> clusters, std::size_t n_items);

    std::size_t size() const { return clusters_.size(); }
    std::size_t n_items() const { return label_.size(); }
    const std::vector<Cluster>& clusters() const { return clusters_; }
    const Cluster& operator[](std::size_t i) const { return clusters_[i]; }

    // Cluster position of every item.
    const std::vector<std::size_t>& labels() const { return label_; }

    static ClusterAssignment singletons(std::size_t n);

private:
    std::vector<Cluster> clusters_;
    std::vector<std::size_t> label_;
};

// Euclidean distances between the rows of `vectors`.
Matrix pairwise_euclidean(const Matrix& vectors);

// Agglomerates with the single-linkage update d([AB], C) = min(d(A,C), d(B,C)).
// Among equal distances the pair with the smallest (then second-smallest)
// cluster id is merged first. `dist` must be square, symmetric, zero-diagonal.
Dendrogram single_linkage(const Matrix& dist);

// Undoes the last k - 1 merges and returns the k resulting clusters, ordered
// by smallest member.
ClusterAssignment cut(const Dendrogram& dendro, std::size_t k);

}  // namespace koopclust::hclust
