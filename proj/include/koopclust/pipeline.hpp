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
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "koopclust/config.hpp"
#include "koopclust/eval.hpp"

namespace koopclust::pipeline {

// A required artifact is missing, unreadable, or was produced under a
// different configuration.
class ArtifactError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Layout under out_dir:
//   data/{train.csv, eval.csv, manifest.json}
//   model/{dictionary.json, koopman.bin, koopman.json, manifest.json}
//   compressed/{manifest.json, row_dendrogram.json, col_dendrogram.json, ratio_R_C/}
//   svd/{manifest.json, svd_rank_r/}
//   reports/{accuracy.csv, accuracy_summary.json, sizes.csv, timing.csv,
//            timing_detail.csv, report.md}
struct Paths {
    std::filesystem::path root;
    explicit Paths(std::filesystem::path out_dir) : root(std::move(out_dir)) {}
    std::filesystem::path data() const { return root / "data"; }
    std::filesystem::path model() const { return root / "model"; }
    std::filesystem::path compressed() const { return root / "compressed"; }
    std::filesystem::path svd() const { return root / "svd"; }
    std::filesystem::path reports() const { return root / "reports"; }
};

struct GenerateResult {
    std::size_t train_pairs = 0;
    std::size_t eval_pairs = 0;
};

struct TrainResult {
    std::size_t dimension = 0;
    double residual = 0.0;
    std::size_t samples = 0;
};

struct CompressEntry {
    double ratio_row = 0.0;
    double ratio_col = 0.0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t elements = 0;
};

struct CompressResult {
    std::vector<CompressEntry> compressed;
    std::vector<std::size_t> svd_ranks;
};

struct EvaluateResult {
    std::vector<eval::AccuracyReport> reports;
    eval::SizeReport sizes;
};

struct BenchEntry {
    double ratio_row = 0.0;
    double ratio_col = 0.0;
    eval::TimingReport timing;
};

struct BenchResult {
    eval::TimingReport uncompressed;
    std::vector<BenchEntry> grid;
};

// Each stage reads its inputs from out_dir, checks that they were produced
// under the same configuration, writes its outputs and logs a short summary.
GenerateResult generate(const ExperimentConfig& config, std::ostream& log);
TrainResult train(const ExperimentConfig& config, std::ostream& log);
CompressResult compress(const ExperimentConfig& config, std::ostream& log);
EvaluateResult evaluate(const ExperimentConfig& config, std::ostream& log);
BenchResult bench(const ExperimentConfig& config, std::ostream& log);
// Renders report.md from the evaluate and bench outputs and returns it.
std::string report(const ExperimentConfig& config, std::ostream& log);

// generate, train, compress, evaluate, bench and report in order.
void run_all(const ExperimentConfig& config, std::ostream& log);

// Dataset CSVs written by generate.
std::vector<cartpole::Trajectory> load_trajectories(const ExperimentConfig& config, bool eval_split);

}  // namespace koopclust::pipeline
