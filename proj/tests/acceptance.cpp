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

// Acceptance runner: checks criteria 1-12 and prints one PASS/FAIL line per
// criterion. Exits 0 once every criterion has been evaluated; --strict also
// exits 1 when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "CLI11.hpp"
#include "koopclust/cartpole.hpp"
#include "koopclust/compress.hpp"
#include "koopclust/config.hpp"
#include "koopclust/dictionary.hpp"
#include "koopclust/edmd.hpp"
#include "koopclust/eval.hpp"
#include "koopclust/hclust.hpp"
#include "koopclust/io.hpp"
#include "koopclust/pipeline.hpp"
#include "koopclust/svd_baseline.hpp"
#include "oracles.hpp"

namespace {

using namespace koopclust;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned tolerances.
constexpr double kDictionarySeconds = 1.0;
constexpr double kNoCompressionGap = 1e-9;
constexpr std::size_t kNoCompressionTrajectories = 10;
constexpr std::size_t kNoCompressionSteps = 100;
constexpr std::size_t kPlantedDimension = 60;
constexpr std::size_t kPlantedSteps = 50;
constexpr double kPlantedGap = 1e-9;
constexpr std::size_t kClusteringInstances = 200;
constexpr std::size_t kClusteringMaxN = 30;
constexpr double kEdmdEntryError = 1e-6;
constexpr std::size_t kSvdSize = 50;
constexpr double kSvdRelative = 1e-8;
constexpr std::size_t kMinTimedSteps = 10'000;
constexpr double kMinSpeedup = 3.0;
constexpr double kAccuracyFactor = 2.0;
constexpr double kPipelineMinutes = 30.0;
constexpr std::size_t kTheta = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    std::string name;
    std::function<Outcome()> check;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

double max_state_gap(const Rollout& a, const Rollout& b) {
    if (a.states.size() != b.states.size() || a.diverged_at || b.diverged_at) {
        return std::numeric_limits<double>::infinity();
    }
    double gap = 0.0;
    for (std::size_t t = 0; t < a.states.size(); ++t) {
        const auto x = a.states[t].as_array();
        const auto y = b.states[t].as_array();
        for (std::size_t c = 0; c < x.size(); ++c) {
            gap = std::max(gap, std::abs(x[c] - y[c]));
        }
    }
    return gap;
}

// Full default pipeline into a scratch directory; criteria 3, 4 and 9-12
// read its outputs.
struct PipelineRun {
    ExperimentConfig config;
    std::optional<pipeline::EvaluateResult> evaluated;
    std::optional<pipeline::BenchResult> benched;
    double seconds = 0.0;
    std::string error;
};

PipelineRun run_pipeline(const fs::path& out_dir, std::ostream& log) {
    PipelineRun run;
    run.config.out_dir = out_dir.string();
    const auto t0 = Clock::now();
    try {
        pipeline::generate(run.config, log);
        pipeline::train(run.config, log);
        pipeline::compress(run.config, log);
        run.evaluated = pipeline::evaluate(run.config, log);
        run.benched = pipeline::bench(run.config, log);
        pipeline::report(run.config, log);
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    run.seconds = seconds_since(t0);
    return run;
}

Outcome check_dictionary_size() {
    const auto t0 = Clock::now();
    const Dictionary d = Dictionary::build(4, 10);
    const double s = seconds_since(t0);
    return {d.size() == 1001 && s < kDictionarySeconds,
            "D = " + std::to_string(d.size()) + " in " + fmt(s) + " s (need 1001, < 1 s)"};
}

Outcome check_recovery_example() {
    const hclust::ClusterAssignment rows({{0, 4}, {2}, {1, 3}}, 5);
    const hclust::ClusterAssignment cols({{0, 1}, {2, 3, 4}}, 5);
    IndexMatrix expected(2, 3);
    expected << 1, 0, 1, 1, 1, 1;
    const IndexMatrix r = compress::build_recovery(rows, cols);
    std::ostringstream os;
    os << "R = [" << r.row(0) << "; " << r.row(1) << "] (need [1 0 1; 1 1 1])";
    return {r == expected, os.str()};
}

Outcome check_element_counts(const PipelineRun& run) {
    if (!run.evaluated) {
        return {false, "pipeline failed: " + run.error};
    }
    std::map<std::string, std::size_t> got;
    for (const eval::SizeEntry& e : run.evaluated->sizes) {
        got[e.predictor] = e.elements;
    }
    const std::vector<std::pair<std::string, std::size_t>> want = {
        {"uncompressed", 1'002'001},
        {eval::ratio_label(0.8, 0.8), 640'000},
        {eval::ratio_label(0.6, 0.6), 360'000},
        {eval::ratio_label(0.4, 0.4), 160'000},
        {eval::ratio_label(0.3, 0.3), 90'000},
        {eval::ratio_label(0.2, 0.2), 40'000},
        {eval::rank_label(300), 600'600},
        {eval::rank_label(200), 400'400},
        {eval::rank_label(100), 200'200},
        {eval::rank_label(50), 100'100},
        {eval::rank_label(20), 40'040},
    };
    std::size_t matched = 0;
    std::string mismatch;
    for (const auto& [label, count] : want) {
        const auto it = got.find(label);
        if (it != got.end() && it->second == count) {
            ++matched;
        } else {
            mismatch += " " + label + "=" + (it == got.end() ? std::string("missing") : std::to_string(it->second));
        }
    }
    return {matched == want.size(),
            std::to_string(matched) + "/" + std::to_string(want.size()) + " counts exact" +
                (mismatch.empty() ? std::string() : ";" + mismatch)};
}

Outcome check_no_compression(const PipelineRun& run) {
    if (!run.evaluated) {
        return {false, "pipeline failed: " + run.error};
    }
    const pipeline::Paths paths(run.config.out_dir);
    const Dictionary dict = Dictionary::from_json(io::read_json(paths.model() / "dictionary.json"));
    const edmd::KoopmanMatrix km = edmd::load(paths.model() / "koopman.bin");
    const compress::CompressedKoopman ck = compress::load(paths.compressed() / "ratio_1.0_1.0");
    const auto eval_set = pipeline::load_trajectories(run.config, true);
    double worst = 0.0;
    for (std::size_t i = 0; i < kNoCompressionTrajectories; ++i) {
        const cartpole::State& s0 = eval_set.at(i).front();
        worst = std::max(worst, max_state_gap(compress::rollout(ck, dict, s0, kNoCompressionSteps),
                                              edmd::rollout(km, dict, s0, kNoCompressionSteps)));
    }
    return {worst < kNoCompressionGap, "max deviation " + fmt(worst) + " over " +
                                           std::to_string(kNoCompressionTrajectories) + " x " +
                                           std::to_string(kNoCompressionSteps) + " steps (need < 1e-9)"};
}

Matrix planted_operator(std::mt19937_64& rng, const std::vector<std::vector<std::size_t>>& rows,
                        const std::vector<std::vector<std::size_t>>& cols) {
    const Matrix blocks = oracle::random_matrix(rng, static_cast<Eigen::Index>(rows.size()),
                                                static_cast<Eigen::Index>(cols.size()));
    const Matrix k = oracle::planted_block_matrix(blocks, rows, cols, kPlantedDimension);
    return k / Eigen::EigenSolver<Matrix>(k, false).eigenvalues().cwiseAbs().maxCoeff();
}

Outcome check_planted_exactness() {
    std::mt19937_64 rng(2026);
    const std::size_t n_rows = 12;
    const std::size_t n_cols = 18;
    const auto rows = oracle::random_partition(rng, kPlantedDimension, n_rows);
    const auto cols = oracle::random_partition(rng, kPlantedDimension, n_cols);
    const double d = static_cast<double>(kPlantedDimension);

    const edmd::KoopmanMatrix km{planted_operator(rng, rows, cols), 0, 0.0};
    const compress::CompressedKoopman ck = compress::compress(km, n_rows / d, n_cols / d);
    const bool sizes = ck.rows() == n_rows && ck.cols() == n_cols;
    // K v has equal entries inside every row cluster.
    const Vector psi0 = km.k * oracle::random_matrix(rng, static_cast<Eigen::Index>(kPlantedDimension), 1).col(0);
    const double gap = max_state_gap(compress::rollout(ck, psi0, kPlantedSteps), edmd::rollout(km, psi0, kPlantedSteps));

    const edmd::KoopmanMatrix sym{planted_operator(rng, rows, rows), 0, 0.0};
    const compress::CompressedKoopman cs = compress::compress(sym, n_rows / d, n_rows / d);
    const Vector any = oracle::random_matrix(rng, static_cast<Eigen::Index>(kPlantedDimension), 1).col(0);
    const double gap_sym = max_state_gap(compress::rollout(cs, any, kPlantedSteps), edmd::rollout(sym, any, kPlantedSteps));

    const double worst = std::max(gap, gap_sym);
    return {sizes && worst < kPlantedGap,
            "clusters " + std::to_string(ck.rows()) + " x " + std::to_string(ck.cols()) + ", max deviation " +
                fmt(worst) + " over " + std::to_string(kPlantedSteps) + " steps (need 12 x 18, < 1e-9)"};
}

bool tie_free(const Matrix& dist) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < dist.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < dist.cols(); ++j) {
            v.push_back(dist(i, j));
        }
    }
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
}

bool nested(const hclust::ClusterAssignment& fine, const hclust::ClusterAssignment& coarse) {
    for (const hclust::Cluster& c : fine.clusters()) {
        const std::size_t target = coarse.labels()[c.front()];
        for (std::size_t item : c) {
            if (coarse.labels()[item] != target) {
                return false;
            }
        }
    }
    return true;
}

Outcome check_clustering_oracle() {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> pick_n(2, kClusteringMaxN);
    std::uniform_int_distribution<Eigen::Index> pick_dim(1, 6);
    std::size_t matched = 0;
    std::size_t nesting = 0;
    std::size_t instances = 0;
    while (instances < kClusteringInstances) {
        const Matrix points = oracle::random_matrix(rng, static_cast<Eigen::Index>(pick_n(rng)), pick_dim(rng));
        const Matrix dist = oracle::loop_distances(points);
        if (!tie_free(dist)) {
            continue;
        }
        ++instances;
        const hclust::Dendrogram got = hclust::single_linkage(dist);
        matched += got.merges == oracle::naive_single_linkage(dist).merges;
        bool ok = true;
        for (std::size_t k = 2; k <= got.n_leaves; ++k) {
            ok = ok && nested(hclust::cut(got, k), hclust::cut(got, k - 1));
        }
        nesting += ok;
    }
    return {matched == instances && nesting == instances,
            std::to_string(matched) + "/" + std::to_string(instances) + " merge sequences match, " +
                std::to_string(nesting) + "/" + std::to_string(instances) + " nested"};
}

Outcome check_edmd_oracle() {
    std::mt19937_64 rng(11);
    const Dictionary dict = Dictionary::build(4, 1);
    const Matrix lambda = oracle::random_matrix(rng, 4, 4);
    const std::size_t s = 3 * dict.size();
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    cartpole::SnapshotPairs pairs;
    for (std::size_t i = 0; i < s; ++i) {
        const Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
        const Eigen::Vector4d y = lambda * x;
        pairs.before.push_back({x[0], x[1], x[2], x[3]});
        pairs.after.push_back({y[0], y[1], y[2], y[3]});
    }
    const edmd::KoopmanMatrix km = edmd::estimate(edmd::build_data_matrices(dict, pairs));
    Matrix expected = Matrix::Zero(5, 5);
    expected(0, 0) = 1.0;
    expected.bottomRightCorner(4, 4) = lambda;
    const double err = (km.k - expected).cwiseAbs().maxCoeff();
    return {err < kEdmdEntryError,
            "D = " + std::to_string(dict.size()) + ", s = " + std::to_string(s) + ", max entry error " + fmt(err) +
                " (need < 1e-6)"};
}

Outcome check_svd_oracle() {
    std::mt19937_64 rng(13);
    double worst = 0.0;
    bool monotone = true;
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix k = oracle::random_matrix(rng, kSvdSize, kSvdSize);
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t r = 1; r <= kSvdSize; ++r) {
            const double err = (svd_baseline::truncate(k, r).reconstruct() - k).norm();
            const double tail = oracle::tail_norm_from_eigen(k, r);
            // Full rank leaves only rounding; measure it against the matrix scale.
            const double scale = r == kSvdSize ? k.norm() : tail;
            worst = std::max(worst, std::abs(err - tail) / scale);
            monotone = monotone && err <= prev;
            prev = err;
        }
    }
    return {worst <= kSvdRelative && monotone,
            "max relative gap " + fmt(worst) + (monotone ? ", monotone" : ", NOT monotone") +
                " for r = 1..50 on 5 matrices (need <= 1e-8)"};
}

Outcome check_timing_trend(const PipelineRun& run) {
    if (!run.benched) {
        return {false, "pipeline failed: " + run.error};
    }
    std::vector<std::pair<double, eval::TimingReport>> column;
    for (const pipeline::BenchEntry& e : run.benched->grid) {
        if (e.ratio_col == 1.0) {
            column.emplace_back(e.ratio_row, e.timing);
        }
    }
    std::sort(column.begin(), column.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::vector<double> rows = {1.0, 0.8, 0.6, 0.4, 0.2};
    bool ok = column.size() == rows.size();
    std::string detail = "ms/step at column 1.0:";
    double base = 0.0;
    double at_04 = 0.0;
    for (std::size_t i = 0; i < column.size(); ++i) {
        const auto& [ratio, t] = column[i];
        ok = ok && ratio == rows[i] && t.samples >= kMinTimedSteps;
        if (i > 0) {
            ok = ok && t.mean_ms < column[i - 1].second.mean_ms;
        }
        if (ratio == 1.0) base = t.mean_ms;
        if (ratio == 0.4) at_04 = t.mean_ms;
        detail += " " + eval::format_ratio(ratio) + "=" + fmt(t.mean_ms);
    }
    const double speedup = at_04 > 0.0 ? base / at_04 : 0.0;
    ok = ok && speedup >= kMinSpeedup;
    return {ok, detail + "; [0.4] speedup " + fmt(speedup) + "x (need strictly decreasing, >= 3x)"};
}

std::optional<double> theta_mse(const PipelineRun& run, const std::string& label) {
    for (const eval::AccuracyReport& r : run.evaluated->reports) {
        if (r.predictor == label) {
            return r.horizon_mse(kTheta);
        }
    }
    return std::nullopt;
}

Outcome check_accuracy_trend(const PipelineRun& run) {
    if (!run.evaluated) {
        return {false, "pipeline failed: " + run.error};
    }
    const auto base = theta_mse(run, "uncompressed");
    const auto r08 = theta_mse(run, eval::ratio_label(0.8, 0.8));
    const auto r06 = theta_mse(run, eval::ratio_label(0.6, 0.6));
    const auto r04 = theta_mse(run, eval::ratio_label(0.4, 0.4));
    const auto r02 = theta_mse(run, eval::ratio_label(0.2, 0.2));
    if (!base || !r08 || !r06 || !r04 || !r02) {
        return {false, "missing accuracy report"};
    }
    const auto within = [&](double v) { return v <= kAccuracyFactor * *base; };
    const bool ok = within(*r08) && within(*r06) && within(*r04) && *r02 > *r04;
    return {ok, "theta MSE: uncompressed " + fmt(*base) + ", [0.8] " + fmt(*r08) + ", [0.6] " + fmt(*r06) +
                    ", [0.4] " + fmt(*r04) + ", [0.2] " + fmt(*r02) +
                    " (need [0.8],[0.6],[0.4] <= 2x uncompressed and [0.2] > [0.4])"};
}

Outcome check_memory_matched(const PipelineRun& run) {
    if (!run.evaluated) {
        return {false, "pipeline failed: " + run.error};
    }
    bool ok = true;
    std::string detail = "theta MSE";
    for (const auto& [ratio, rank] : run.config.memory_matched) {
        const auto proposed = theta_mse(run, eval::ratio_label(ratio, ratio));
        const auto svd = theta_mse(run, eval::rank_label(rank));
        if (!proposed || !svd) {
            return {false, "missing accuracy report"};
        }
        ok = ok && *proposed <= *svd;
        detail += " [" + eval::format_ratio(ratio) + "] " + fmt(*proposed) + " vs rank " + std::to_string(rank) +
                  " " + fmt(*svd) + (*proposed <= *svd ? " ok;" : " worse;");
    }
    return {ok, detail + " (need proposed <= SVD)"};
}

Outcome check_pipeline_budget(const PipelineRun& run) {
    const double minutes = run.seconds / 60.0;
    return {run.error.empty() && minutes < kPipelineMinutes,
            "full pipeline " + fmt(minutes) + " min" + (run.error.empty() ? "" : " (failed: " + run.error + ")") +
                " (need < 30 min)"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-12"};
    bool strict = false;
    bool keep = false;
    std::string out_dir = (fs::temp_directory_path() / "koopclust_acceptance").string();
    std::string report_path;
    app.add_flag("--strict", strict, "Exit 1 when any criterion fails");
    app.add_option("--out-dir", out_dir, "Scratch directory for the full pipeline run");
    app.add_option("--report", report_path, "Also write the result lines to this file");
    app.add_flag("--keep", keep, "Keep the pipeline outputs");
    CLI11_PARSE(app, argc, argv);

    try {
        std::ostringstream pipeline_log;
        fs::remove_all(out_dir);
        const PipelineRun run = run_pipeline(out_dir, pipeline_log);

        const std::vector<Criterion> criteria = {
            {"dictionary size", check_dictionary_size},
            {"recovery-matrix worked example", check_recovery_example},
            {"element-count tables", [&] { return check_element_counts(run); }},
            {"no-compression equivalence", [&] { return check_no_compression(run); }},
            {"planted exactness", check_planted_exactness},
            {"single-linkage oracle", check_clustering_oracle},
            {"EDMD linear-system oracle", check_edmd_oracle},
            {"SVD tail formula", check_svd_oracle},
            {"timing trend", [&] { return check_timing_trend(run); }},
            {"accuracy trend", [&] { return check_accuracy_trend(run); }},
            {"memory-matched comparison", [&] { return check_memory_matched(run); }},
            {"end-to-end budget", [&] { return check_pipeline_budget(run); }},
        };

        std::ostringstream lines;
        std::size_t passed = 0;
        for (std::size_t i = 0; i < criteria.size(); ++i) {
            Outcome o;
            try {
                o = criteria[i].check();
            } catch (const std::exception& e) {
                o = {false, std::string("error: ") + e.what()};
            }
            passed += o.pass;
            lines << (o.pass ? "PASS" : "FAIL") << "  criterion " << (i + 1) << " (" << criteria[i].name
                  << "): " << o.detail << "\n";
        }
        lines << "acceptance: " << passed << "/" << criteria.size() << " criteria passed\n";

        std::cout << lines.str();
        if (!report_path.empty()) {
            std::ofstream(report_path) << lines.str();
        }
        if (!keep) {
            fs::remove_all(out_dir);
        }
        return strict && passed != criteria.size() ? 1 : 0;
    } catch (const std::exception& e) {
        std::cerr << "acceptance harness error: " << e.what() << std::endl;
        return 2;
    }
}
