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

#include "koopclust/edmd.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "koopclust/io.hpp"

namespace koopclust::edmd {

namespace {

void fill_columns(const Dictionary& dict, const std::vector<cartpole::State>& states, Matrix& out) {
    out.resize(static_cast<Eigen::Index>(dict.size()), static_cast<Eigen::Index>(states.size()));
    for (std::size_t j = 0; j < states.size(); ++j) {
        const auto a = states[j].as_array();
        auto col = out.col(static_cast<Eigen::Index>(j));
        dict.evaluate_into(a, col);
        for (Eigen::Index d = 0; d < col.size(); ++d) {
            if (!std::isfinite(col[d])) {
                throw NumericalError("non-finite dictionary value at pair " + std::to_string(j) +
                                         ", entry " + std::to_string(d),
                                     j);
            }
        }
    }
}

}  // namespace

DataMatrices build_data_matrices(const Dictionary& dict, const cartpole::SnapshotPairs& pairs) {
    if (pairs.size() < 1) {
        throw std::invalid_argument("EDMD needs at least one snapshot pair");
    }
    if (pairs.before.size() != pairs.after.size()) {
        throw std::invalid_argument("snapshot pair sequences differ in length");
    }
    DataMatrices data;
    fill_columns(dict, pairs.before, data.psi_x1);
    fill_columns(dict, pairs.after, data.psi_x2);
    return data;
}

KoopmanMatrix estimate(const DataMatrices& data, double svd_tolerance, std::uint64_t dict_id) {
    const Matrix& x1 = data.psi_x1;
    const Matrix& x2 = data.psi_x2;
    if (x1.cols() < 1 || x1.cols() != x2.cols() || x1.rows() != x2.rows()) {
        throw std::invalid_argument("data matrices must share a non-empty D x s shape");
    }
    if (!(svd_tolerance >= 0.0)) {
        throw std::invalid_argument("svd tolerance must be non-negative");
    }
    if (x1.cwiseAbs().maxCoeff() == 0.0) {
        throw std::invalid_argument("degenerate input: Psi(X1) is identically zero");
    }

    // Decompose Psi(X1)^T = U S V^T (s x D, thin), so Psi(X1)^+ = U S^+ V^T.
    // Working on the tall transpose keeps U at s x min(s, D).
    Eigen::BDCSVD<Matrix> svd(x1.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sigma = svd.singularValues();
    const double cutoff = svd_tolerance * sigma[0];
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma[rank] > cutoff) {
        ++rank;
    }

    const auto u = svd.matrixU().leftCols(rank);
    const auto v = svd.matrixV().leftCols(rank);
    Matrix projected = x2 * u;  // D x rank
    projected *= sigma.head(rank).cwiseInverse().asDiagonal();

    KoopmanMatrix km;
    km.k.noalias() = projected * v.transpose();
    km.dict_id = dict_id;
    km.svd_tolerance = svd_tolerance;
    if (!km.k.allFinite()) {
        throw NumericalError("Koopman estimate contains non-finite entries", 0);
    }
    return km;
}

double residual(const DataMatrices& data, const Matrix& k) {
    return (data.psi_x2 - k * data.psi_x1).norm();
}

Rollout rollout(const KoopmanMatrix& km, const Vector& psi, std::size_t steps) {
    if (psi.size() != km.dimension()) {
        throw std::invalid_argument("initial vector and Koopman matrix sizes differ");
    }
    return iterate_linear(
        psi, steps, [&](const Vector& in, Vector& out) { out.noalias() = km.k * in; },
        [](const Vector& v) { return read_linear(v); });
}

Rollout rollout(const KoopmanMatrix& km, const Dictionary& dict, const cartpole::State& initial,
                std::size_t steps) {
    if (static_cast<std::size_t>(km.dimension()) != dict.size()) {
        throw std::invalid_argument("Koopman matrix and dictionary sizes differ");
    }
    return rollout(km, dict.evaluate(initial), steps);
}

void save(const KoopmanMatrix& km, const std::filesystem::path& bin_path) {
    io::write_matrix(bin_path, km.k);
    io::write_json(io::sidecar_path(bin_path), {{"dimension", km.dimension()},
                                                {"dictionary_hash", hex_hash(km.dict_id)},
                                                {"svd_tolerance", km.svd_tolerance}});
}

KoopmanMatrix load(const std::filesystem::path& bin_path) {
    const auto meta = io::read_json(io::sidecar_path(bin_path));
    const auto d = meta.at("dimension").get<Eigen::Index>();
    KoopmanMatrix km;
    km.k = io::read_matrix(bin_path, d, d);
    km.dict_id = std::stoull(meta.at("dictionary_hash").get<std::string>(), nullptr, 16);
    km.svd_tolerance = meta.at("svd_tolerance").get<double>();
    return km;
}

}  // namespace koopclust::edmd
