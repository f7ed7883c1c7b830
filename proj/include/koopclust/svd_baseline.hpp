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
#include <filesystem>

#include "koopclust/dictionary.hpp"
#include "koopclust/edmd.hpp"
#include "koopclust/rollout.hpp"
#include "koopclust/types.hpp"

namespace koopclust::svd_baseline {

// Rank-r truncation K ~ (U_r S_r) V_r^T kept as two D x r / r x D factors.
struct SvdFactors {
    Matrix u_sigma;  // D x r
    Matrix v_t;      // r x D
    std::uint64_t dict_id = 0;

    std::size_t rank() const { return static_cast<std::size_t>(u_sigma.cols()); }
    std::size_t dimension() const { return static_cast<std::size_t>(u_sigma.rows()); }
    Matrix reconstruct() const { return u_sigma * v_t; }
};

// Keeps the r largest singular triplets. Throws std::out_of_range unless
// 1 <= r <= D.
SvdFactors truncate(const edmd::KoopmanMatrix& km, std::size_t rank);
SvdFactors truncate(const Matrix& k, std::size_t rank);

// Truncations at several ranks sharing one decomposition of K.
class Truncator {
public:
    explicit Truncator(const edmd::KoopmanMatrix& km);

    SvdFactors truncate(std::size_t rank) const;
    const Vector& singular_values() const { return sigma_; }

private:
    Matrix u_;
    Vector sigma_;
    Matrix v_;
    std::uint64_t dict_id_;
};

// psi <- u_sigma (v_t psi) per step; the D x D product is never formed.
Rollout rollout_svd(const SvdFactors& f, const Dictionary& dict, const cartpole::State& initial,
                    std::size_t steps);

// 2 * D * r, the entries of both stored factors.
std::size_t element_count(std::size_t dimension, std::size_t rank);

// u_sigma.bin and v_t.bin (row-major float64) plus svd.json.
void save(const SvdFactors& f, const std::filesystem::path& dir);
SvdFactors load(const std::filesystem::path& dir);

}  // namespace koopclust::svd_baseline
