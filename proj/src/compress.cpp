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

#include "koopclust/compress.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "koopclust/hash.hpp"
#include "koopclust/io.hpp"

namespace koopclust::compress {

namespace {

using hclust::ClusterAssignment;

void require_partition_of(const ClusterAssignment& c, Eigen::Index n, const char* what) {
    if (static_cast<Eigen::Index>(c.n_items()) != n) {
        throw std::invalid_argument(std::string(what) + " clusters do not cover the matrix index set");
    }
}

void check_ratio(double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw std::invalid_argument("compression ratio must lie in (0, 1]");
    }
}

}  // namespace

Matrix compress_matrix(const Matrix& k, const ClusterAssignment& row_clusters,
                       const ClusterAssignment& col_clusters) {
    require_partition_of(row_clusters, k.rows(), "row");
    require_partition_of(col_clusters, k.cols(), "column");
    const auto n = static_cast<Eigen::Index>(row_clusters.size());
    const auto m = static_cast<Eigen::Index>(col_clusters.size());

    Matrix col_sums = Matrix::Zero(k.rows(), m);
    for (Eigen::Index j = 0; j < m; ++j) {
        for (std::size_t c : col_clusters[static_cast<std::size_t>(j)]) {
            col_sums.col(j) += k.col(static_cast<Eigen::Index>(c));
        }
    }
    Matrix out = Matrix::Zero(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& members = row_clusters[static_cast<std::size_t>(i)];
        for (std::size_t r : members) {
            out.row(i) += col_sums.row(static_cast<Eigen::Index>(r));
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            out(i, j) /= static_cast<double>(members.size() *
                                             col_clusters[static_cast<std::size_t>(j)].size());
        }
    }
    return out;
}

IndexMatrix build_recovery(const ClusterAssignment& row_clusters,
                           const ClusterAssignment& col_clusters) {
    if (row_clusters.n_items() != col_clusters.n_items()) {
        throw std::invalid_argument("row and column clusters partition different index sets");
    }
    IndexMatrix r = IndexMatrix::Zero(static_cast<Eigen::Index>(col_clusters.size()),
                                      static_cast<Eigen::Index>(row_clusters.size()));
    const auto& row_label = row_clusters.labels();
    const auto& col_label = col_clusters.labels();
    for (std::size_t d = 0; d < row_label.size(); ++d) {
        ++r(static_cast<Eigen::Index>(col_label[d]), static_cast<Eigen::Index>(row_label[d]));
    }
    return r;
}

Vector compress_dict_after(const Vector& psi, const ClusterAssignment& row_clusters) {
    require_partition_of(row_clusters, psi.size(), "row");
    Vector out(static_cast<Eigen::Index>(row_clusters.size()));
    for (std::size_t i = 0; i < row_clusters.size(); ++i) {
        double sum = 0.0;
        for (std::size_t d : row_clusters[i]) {
            sum += psi[static_cast<Eigen::Index>(d)];
        }
        out[static_cast<Eigen::Index>(i)] = sum / static_cast<double>(row_clusters[i].size());
    }
    return out;
}

Vector compress_dict_before(const Vector& psi, const ClusterAssignment& col_clusters) {
    require_partition_of(col_clusters, psi.size(), "column");
    Vector out(static_cast<Eigen::Index>(col_clusters.size()));
    for (std::size_t j = 0; j < col_clusters.size(); ++j) {
        double sum = 0.0;
        for (std::size_t d : col_clusters[j]) {
            sum += psi[static_cast<Eigen::Index>(d)];
        }
        out[static_cast<Eigen::Index>(j)] = sum;
    }
    return out;
}

Vector expand_after(const Vector& compressed, const ClusterAssignment& row_clusters) {
    const auto& label = row_clusters.labels();
    Vector out(static_cast<Eigen::Index>(label.size()));
    for (std::size_t d = 0; d < label.size(); ++d) {
        out[static_cast<Eigen::Index>(d)] = compressed[static_cast<Eigen::Index>(label[d])];
    }
    return out;
}

Vector expand_before(const Vector& compressed, const ClusterAssignment& col_clusters) {
    const auto& label = col_clusters.labels();
    Vector out(static_cast<Eigen::Index>(label.size()));
    for (std::size_t d = 0; d < label.size(); ++d) {
        const std::size_t j = label[d];
        out[static_cast<Eigen::Index>(d)] = compressed[static_cast<Eigen::Index>(j)] /
                                            static_cast<double>(col_clusters[j].size());
    }
    return out;
}

CompressedKoopman assemble(const Matrix& k, ClusterAssignment row_clusters,
                           ClusterAssignment col_clusters) {
    if (k.rows() != k.cols()) {
        throw std::invalid_argument("Koopman matrix must be square");
    }
    CompressedKoopman ck;
    ck.k_prime = compress_matrix(k, row_clusters, col_clusters);
    ck.recovery = build_recovery(row_clusters, col_clusters);
    const Matrix r = ck.recovery.cast<double>();
    ck.k_a.noalias() = ck.k_prime * r;
    ck.k_b.noalias() = r * ck.k_prime;
    ck.row_clusters = std::move(row_clusters);
    ck.col_clusters = std::move(col_clusters);
    const auto d = static_cast<double>(k.rows());
    ck.ratio_row = static_cast<double>(ck.rows()) / d;
    ck.ratio_col = static_cast<double>(ck.cols()) / d;
    return ck;
}

std::size_t cluster_count(double ratio, std::size_t dimension) {
    check_ratio(ratio);
    // The epsilon absorbs representation error such as 0.29 * 100 = 28.999...
    const auto n = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(dimension) + 1e-9));
    return std::clamp<std::size_t>(n, 1, dimension);
}

Compressor::Compressor(const edmd::KoopmanMatrix& km) : k_(km.k) {
    if (k_.rows() != k_.cols() || k_.rows() < 1) {
        throw std::invalid_argument("Koopman matrix must be square and non-empty");
    }
    if (!k_.allFinite()) {
        throw std::invalid_argument("Koopman matrix has non-finite entries");
    }
    Fnv1a h;
    h.add(k_);
    source_hash_ = h.value();
    row_dendro_ = hclust::single_linkage(hclust::pairwise_euclidean(k_));
    col_dendro_ = hclust::single_linkage(hclust::pairwise_euclidean(k_.transpose()));
}

CompressedKoopman Compressor::compress(double ratio_row, double ratio_col) const {
    const auto d = static_cast<std::size_t>(k_.rows());
    CompressedKoopman ck = assemble(k_, hclust::cut(row_dendro_, cluster_count(ratio_row, d)),
                                    hclust::cut(col_dendro_, cluster_count(ratio_col, d)));
    ck.ratio_row = ratio_row;
    ck.ratio_col = ratio_col;
    ck.source_hash = source_hash_;
    return ck;
}

CompressedKoopman compress(const edmd::KoopmanMatrix& km, double ratio_row, double ratio_col) {
    check_ratio(ratio_row);
    check_ratio(ratio_col);
    return Compressor(km).compress(ratio_row, ratio_col);
}

Rollout rollout(const CompressedKoopman& ck, const Vector& psi, std::size_t steps, Evolution mode) {
    if (steps < 1) {
        throw std::invalid_argument("rollout needs at least one step");
    }
    if (static_cast<std::size_t>(psi.size()) != ck.dimension()) {
        throw std::invalid_argument("initial vector and compressed model sizes differ");
    }
    if (mode == Evolution::after) {
        return iterate_linear(
            compress_dict_after(psi, ck.row_clusters), steps,
            [&](const Vector& in, Vector& out) { out.noalias() = ck.k_a * in; },
            [&](const Vector& v) { return read_linear(expand_after(v, ck.row_clusters)); });
    }
    return iterate_linear(
        compress_dict_before(psi, ck.col_clusters), steps,
        [&](const Vector& in, Vector& out) { out.noalias() = ck.k_b * in; },
        [&](const Vector& v) { return read_linear(expand_before(v, ck.col_clusters)); });
}

Rollout rollout(const CompressedKoopman& ck, const Dictionary& dict,
                const cartpole::State& initial, std::size_t steps, Evolution mode) {
    if (dict.size() != ck.dimension()) {
        throw std::invalid_argument("compressed model and dictionary sizes differ");
    }
    return rollout(ck, dict.evaluate(initial), steps, mode);
}

std::size_t element_count(const CompressedKoopman& ck) {
    return ck.rows() * ck.rows();
}

void save(const CompressedKoopman& ck, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_matrix(dir / "k_prime.bin", ck.k_prime);
    io::write_json(dir / "compressed.json",
                   {{"dimension", ck.dimension()},
                    {"rows", ck.rows()},
                    {"cols", ck.cols()},
                    {"ratio_row", ck.ratio_row},
                    {"ratio_col", ck.ratio_col},
                    {"linkage", "single"},
                    {"distance", "euclidean"},
                    {"source_hash", hex_hash(ck.source_hash)},
                    {"row_clusters", ck.row_clusters.clusters()},
                    {"col_clusters", ck.col_clusters.clusters()}});
}

CompressedKoopman load(const std::filesystem::path& dir) {
    const auto meta = io::read_json(dir / "compressed.json");
    const auto d = meta.at("dimension").get<std::size_t>();
    ClusterAssignment rows(meta.at("row_clusters").get<std::vector<hclust::Cluster>>(), d);
    ClusterAssignment cols(meta.at("col_clusters").get<std::vector<hclust::Cluster>>(), d);

    CompressedKoopman ck;
    ck.k_prime = io::read_matrix(dir / "k_prime.bin", static_cast<Eigen::Index>(rows.size()),
                                 static_cast<Eigen::Index>(cols.size()));
    ck.recovery = build_recovery(rows, cols);
    const Matrix r = ck.recovery.cast<double>();
    ck.k_a.noalias() = ck.k_prime * r;
    ck.k_b.noalias() = r * ck.k_prime;
    ck.row_clusters = std::move(rows);
    ck.col_clusters = std::move(cols);
    ck.ratio_row = meta.at("ratio_row").get<double>();
    ck.ratio_col = meta.at("ratio_col").get<double>();
    ck.source_hash = std::stoull(meta.at("source_hash").get<std::string>(), nullptr, 16);
    return ck;
}

}  // namespace koopclust::compress
