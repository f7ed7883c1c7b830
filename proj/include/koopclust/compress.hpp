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
#include <cstdint>
#include <filesystem>

#include "koopclust/dictionary.hpp"
#include "koopclust/edmd.hpp"
#include "koopclust/hclust.hpp"
#include "koopclust/rollout.hpp"
#include "koopclust/types.hpp"

namespace koopclust::compress {

// K' (N x M) of block averages, the recovery matrix R (M x N) and the two
// square operators built from them: K'_A = K' R (N x N) evolves the
// after-action dictionary, K'_B = R K' (M x M) the before-action one.
struct CompressedKoopman {
    Matrix k_prime;
    hclust::ClusterAssignment row_clusters;
    hclust::ClusterAssignment col_clusters;
    IndexMatrix recovery;
    Matrix k_a;
    Matrix k_b;

    double ratio_row = 1.0;
    double ratio_col = 1.0;
    std::uint64_t source_hash = 0;

    std::size_t dimension() const { return row_clusters.n_items(); }
    std::size_t rows() const { return row_clusters.size(); }
    std::size_t cols() const { return col_clusters.size(); }
};

enum class Evolution {
    after,   // psi'_A <- K'_A psi'_A, the default
    before,  // psi'_B <- K'_B psi'_B
};

// K'_ij = mean of K over row cluster i x column cluster j.
Matrix compress_matrix(const Matrix& k, const hclust::ClusterAssignment& row_clusters,
                       const hclust::ClusterAssignment& col_clusters);

// R_ji = |C^c_j intersect C^r_i|.
IndexMatrix build_recovery(const hclust::ClusterAssignment& row_clusters,
                           const hclust::ClusterAssignment& col_clusters);

// Mean of psi over each row cluster (length N).
Vector compress_dict_after(const Vector& psi, const hclust::ClusterAssignment& row_clusters);

// Sum of psi over each column cluster (length M).
Vector compress_dict_before(const Vector& psi, const hclust::ClusterAssignment& col_clusters);

// Inverse of the after-action compression under the within-cluster equality
// assumption: every original index takes its cluster's value.
Vector expand_after(const Vector& compressed, const hclust::ClusterAssignment& row_clusters);

// Before-action readout: every original index takes its column cluster's
// value divided by the cluster size.
Vector expand_before(const Vector& compressed, const hclust::ClusterAssignment& col_clusters);

// Builds K', R, K'_A and K'_B for given clusterings of a square K.
CompressedKoopman assemble(const Matrix& k, hclust::ClusterAssignment row_clusters,
                           hclust::ClusterAssignment col_clusters);

// Cluster count for a size ratio: floor(ratio * D), clamped to [1, D]. This
// reproduces the 800 / 600 / 400 / 300 / 200 sizes reported for D = 1001.
std::size_t cluster_count(double ratio, std::size_t dimension);

// Clusters the rows and columns of K once; compressions at different ratios
// then only cut the two dendrograms.
class Compressor {
public:
    explicit Compressor(const edmd::KoopmanMatrix& km);

    CompressedKoopman compress(double ratio_row, double ratio_col) const;

    const hclust::Dendrogram& row_dendrogram() const { return row_dendro_; }
    const hclust::Dendrogram& col_dendrogram() const { return col_dendro_; }
    const Matrix& source() const { return k_; }

private:
    Matrix k_;
    std::uint64_t source_hash_;
    hclust::Dendrogram row_dendro_;
    hclust::Dendrogram col_dendro_;
};

CompressedKoopman compress(const edmd::KoopmanMatrix& km, double ratio_row, double ratio_col);

// Encodes psi(initial) in the compressed coordinates of `mode`, iterates the
// matching square operator and decodes each iterate by expansion to the full
// dictionary followed by the degree-1 readout.
Rollout rollout(const CompressedKoopman& ck, const Dictionary& dict,
                const cartpole::State& initial, std::size_t steps,
                Evolution mode = Evolution::after);

// As above, starting from a full dictionary vector instead of a state.
Rollout rollout(const CompressedKoopman& ck, const Vector& psi, std::size_t steps,
                Evolution mode = Evolution::after);

// Elements stored by the proposed method: N x N for K'_A.
std::size_t element_count(const CompressedKoopman& ck);

// Directory layout: k_prime.bin plus compressed.json holding shape, clusters
// and provenance. R, K'_A and K'_B are rebuilt on load.
void save(const CompressedKoopman& ck, const std::filesystem::path& dir);
CompressedKoopman load(const std::filesystem::path& dir);

}  // namespace koopclust::compress
