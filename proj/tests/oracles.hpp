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

// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. Each one recomputes a quantity from its definition
// without reusing library code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "koopclust/hclust.hpp"
#include "koopclust/types.hpp"

namespace oracle {

using koopclust::Matrix;
using koopclust::Vector;

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            m(i, j) = u(rng);
        }
    }
    return m;
}

inline Matrix loop_distances(const Matrix& v) {
    const Eigen::Index n = v.rows();
    Matrix d(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < v.cols(); ++k) {
                const double diff = v(i, k) - v(j, k);
                s += diff * diff;
            }
            d(i, j) = std::sqrt(s);
        }
    }
    return d;
}

// Re-scans every pair of live clusters at each step, taking the inter-cluster
// distance as the minimum over member pairs of the original matrix.
inline koopclust::hclust::Dendrogram naive_single_linkage(const Matrix& dist) {
    const auto n = static_cast<std::size_t>(dist.rows());
    koopclust::hclust::Dendrogram dendro;
    dendro.n_leaves = n;
    std::vector<std::vector<std::size_t>> members(n);
    std::vector<std::size_t> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        members[i] = {i};
        ids[i] = i;
    }
    std::size_t next_id = n;
    while (members.size() > 1) {
        std::tuple<double, std::size_t, std::size_t> best{std::numeric_limits<double>::infinity(), 0, 0};
        std::size_t best_p = 0;
        std::size_t best_q = 0;
        bool found = false;
        for (std::size_t p = 0; p < members.size(); ++p) {
            for (std::size_t q = p + 1; q < members.size(); ++q) {
                double d = std::numeric_limits<double>::infinity();
                for (std::size_t a : members[p]) {
                    for (std::size_t b : members[q]) {
                        d = std::min(d, dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
                    }
                }
                const std::tuple<double, std::size_t, std::size_t> key{d, std::min(ids[p], ids[q]),
                                                                       std::max(ids[p], ids[q])};
                if (!found || key < best) {
                    found = true;
                    best = key;
                    best_p = p;
                    best_q = q;
                }
            }
        }
        dendro.merges.push_back({std::get<1>(best), std::get<2>(best), std::get<0>(best), next_id});
        members[best_p].insert(members[best_p].end(), members[best_q].begin(), members[best_q].end());
        ids[best_p] = next_id++;
        members.erase(members.begin() + static_cast<std::ptrdiff_t>(best_q));
        ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(best_q));
    }
    return dendro;
}

inline Matrix loop_block_average(const Matrix& k, const std::vector<std::vector<std::size_t>>& rows,
                                 const std::vector<std::vector<std::size_t>>& cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            double s = 0.0;
            for (std::size_t r : rows[i]) {
                for (std::size_t c : cols[j]) {
                    s += k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
                }
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                s / static_cast<double>(rows[i].size() * cols[j].size());
        }
    }
    return out;
}

// Random partition of 0..n-1 into exactly k non-empty groups.
inline std::vector<std::vector<std::size_t>> random_partition(std::mt19937_64& rng, std::size_t n,
                                                              std::size_t k) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t i = 0; i < k; ++i) {
        groups[i].push_back(perm[i]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, k - 1);
    for (std::size_t i = k; i < n; ++i) {
        groups[pick(rng)].push_back(perm[i]);
    }
    return groups;
}

// Group label per index.
inline std::vector<std::size_t> labels_of(const std::vector<std::vector<std::size_t>>& groups, std::size_t n) {
    std::vector<std::size_t> label(n);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t i : groups[g]) {
            label[i] = g;
        }
    }
    return label;
}

// K with K(r, c) = B(label_r(r), label_c(c)): rows inside a row group are
// identical, and so are columns inside a column group.
inline Matrix planted_block_matrix(const Matrix& blocks, const std::vector<std::vector<std::size_t>>& rows,
                                   const std::vector<std::vector<std::size_t>>& cols, std::size_t n) {
    const auto lr = labels_of(rows, n);
    const auto lc = labels_of(cols, n);
    Matrix k(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            k(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                blocks(static_cast<Eigen::Index>(lr[r]), static_cast<Eigen::Index>(lc[c]));
        }
    }
    return k;
}

// sqrt of the sum of the n - r smallest eigenvalues of K^T K.
inline double tail_norm_from_eigen(const Matrix& k, std::size_t r) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k.transpose() * k);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    double s = 0.0;
    for (std::size_t i = r; i < ev.size(); ++i) {
        s += std::max(ev[i], 0.0);
    }
    return std::sqrt(s);
}

}  // namespace oracle
