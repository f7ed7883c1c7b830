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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "koopclust/cartpole.hpp"
#include "koopclust/types.hpp"

namespace koopclust {

using MultiIndex = std::vector<int>;

// Monomial observables of total degree <= max_degree in state_dim variables,
// graded by degree and, within a degree, ordered by descending exponent tuple
// so the leading entries read 1, x, theta, x_dot, theta_dot, x^2, x*theta, ...
class Dictionary {
public:
    static constexpr std::size_t kDefaultSizeCap = 1'000'000;

    static Dictionary build(std::size_t state_dim, int max_degree,
                            std::size_t size_cap = kDefaultSizeCap);

    std::size_t size() const { return entries_.size(); }
    std::size_t state_dim() const { return state_dim_; }
    int max_degree() const { return max_degree_; }
    const std::vector<MultiIndex>& entries() const { return entries_; }

    // Position of the degree-1 monomial of `variable`; throws when
    // max_degree is zero.
    std::size_t linear_index(std::size_t variable) const;

    // Position of an exponent tuple, or size() when absent.
    std::size_t find(const MultiIndex& exponents) const;

    // psi(state). Throws NumericalError naming the first non-finite entry.
    Vector evaluate(std::span<const double> state) const;
    Vector evaluate(const cartpole::State& state) const;

    // Writes psi(state) into out (resized if needed) without the finiteness check.
    void evaluate_into(std::span<const double> state, Eigen::Ref<Vector> out) const;

    // FNV-1a over (state_dim, max_degree, entries); identifies the basis a
    // Koopman matrix acts on.
    std::uint64_t hash() const;

    nlohmann::json to_json() const;
    static Dictionary from_json(const nlohmann::json& j);

private:
    Dictionary(std::size_t state_dim, int max_degree, std::vector<MultiIndex> entries);

    std::size_t state_dim_ = 0;
    int max_degree_ = 0;
    std::vector<MultiIndex> entries_;
};

// C(n + p, p), saturating at SIZE_MAX.
std::size_t dictionary_size(std::size_t state_dim, int max_degree);

std::string hex_hash(std::uint64_t h);

}  // namespace koopclust
