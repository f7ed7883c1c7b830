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
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "koopclust/cartpole.hpp"

namespace koopclust {

// Raised for invalid or unknown configuration keys.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetConfig {
    std::size_t n_train_traj = 100;
    std::size_t n_eval_traj = 100;
    std::uint64_t seed = 1;
    std::uint64_t eval_seed = 2;
    double noise = cartpole::kDefaultNoise;
};

struct MemoryMatch {
    double ratio = 0.0;
    std::size_t rank = 0;
};

struct BenchConfig {
    std::vector<double> ratios{1.0, 0.8, 0.6, 0.4, 0.2};
    std::size_t n_steps = 10'000;
    std::size_t warmup_steps = 500;
    std::size_t batches = 5;
};

struct ExperimentConfig {
    cartpole::Params cartpole;
    std::size_t state_dim = 4;
    std::size_t max_degree = 10;
    DatasetConfig dataset;
    double svd_tolerance = 1e-4;
    // Evaluated at equal row and column ratio.
    std::vector<double> ratios{1.0, 0.8, 0.6, 0.4, 0.3, 0.2};
    std::vector<std::size_t> svd_ranks{300, 200, 100, 50, 20};
    std::vector<MemoryMatch> memory_matched{{0.2, 20}, {0.3, 50}};
    std::size_t horizon = 100;
    BenchConfig bench;
    std::string out_dir = "koopclust_out";

    nlohmann::json to_json() const;

    // Keys absent from `j` keep their defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const nlohmann::json& j);

    // Throws ConfigError naming the first violated constraint.
    void validate() const;

    std::size_t dictionary_dimension() const;

    // Every (row, col) pair with a stored compressed artifact: the diagonal of
    // `ratios` plus the bench grid, sorted and deduplicated.
    std::vector<std::pair<double, double>> compressed_pairs() const;

    // Content hashes over the config sections each stage depends on.
    std::uint64_t data_hash() const;
    std::uint64_t model_hash() const;
};

// Applies `dotted.key=value` to a config document. The value is parsed as
// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

}  // namespace koopclust
