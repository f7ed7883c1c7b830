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

#include <cstdint>
#include <filesystem>

#include "koopclust/cartpole.hpp"
#include "koopclust/dictionary.hpp"
#include "koopclust/rollout.hpp"
#include "koopclust/types.hpp"

namespace koopclust::edmd {

// Psi(X1) and Psi(X2): one column per snapshot pair.
struct DataMatrices {
    Matrix psi_x1;
    Matrix psi_x2;

    Eigen::Index samples() const { return psi_x1.cols(); }
};

struct KoopmanMatrix {
    Matrix k;
    std::uint64_t dict_id = 0;
    double svd_tolerance = 0.0;

    Eigen::Index dimension() const { return k.rows(); }
};

inline constexpr double kDefaultSvdTolerance = 1e-10;

// Throws NumericalError carrying the pair index when a dictionary value
// overflows; the message names the entry as well.
DataMatrices build_data_matrices(const Dictionary& dict, const cartpole::SnapshotPairs& pairs);

// Minimum-norm least-squares K = Psi(X2) Psi(X1)^+, with singular values of
// Psi(X1) below svd_tolerance * sigma_max treated as zero.
KoopmanMatrix estimate(const DataMatrices& data, double svd_tolerance = kDefaultSvdTolerance,
                       std::uint64_t dict_id = 0);

// ||Psi(X2) - K Psi(X1)||_F.
double residual(const DataMatrices& data, const Matrix& k);

// Iterates psi <- K psi from psi(initial) and reads the degree-1 entries.
Rollout rollout(const KoopmanMatrix& km, const Dictionary& dict, const cartpole::State& initial,
                std::size_t steps);
Rollout rollout(const KoopmanMatrix& km, const Vector& psi, std::size_t steps);

// Row-major float64 payload plus a JSON sidecar with dimension, dictionary
// hash and tolerance.
void save(const KoopmanMatrix& km, const std::filesystem::path& bin_path);
KoopmanMatrix load(const std::filesystem::path& bin_path);

}  // namespace koopclust::edmd
