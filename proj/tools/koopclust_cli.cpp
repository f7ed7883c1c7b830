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

// Command-line front end: generate, train, compress, evaluate, bench, report
// and run (all of them in order).

#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "koopclust/config.hpp"
#include "koopclust/pipeline.hpp"
#include "koopclust/types.hpp"

namespace {

using koopclust::ExperimentConfig;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfig = 2,
    kArtifact = 3,
    kNumerical = 4,
};

struct Flags {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> eval_seed;
    std::optional<std::size_t> n_train_traj;
    std::optional<std::size_t> n_eval_traj;
    std::optional<std::size_t> max_degree;
    std::optional<double> svd_tolerance;
    std::optional<std::size_t> horizon;
    std::optional<std::vector<double>> ratios;
    std::optional<std::vector<std::size_t>> ranks;
    std::optional<std::vector<double>> bench_ratios;
    std::optional<std::size_t> bench_steps;
    std::vector<std::string> overrides;
};

// Precedence: defaults < --config file < named flags < --set.
ExperimentConfig resolve(const Flags& f) {
    nlohmann::json doc = nlohmann::json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) {
            throw koopclust::ConfigError("cannot open config file " + f.config_path);
        }
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw koopclust::ConfigError("config file " + f.config_path + " is not valid JSON: " + e.what());
        }
    }
    const auto put = [&doc](const char* section, const char* key, const nlohmann::json& v) {
        if (section) {
            doc[section][key] = v;
        } else {
            doc[key] = v;
        }
    };
    if (f.out_dir) put(nullptr, "out_dir", *f.out_dir);
    if (f.seed) put("dataset", "seed", *f.seed);
    if (f.eval_seed) put("dataset", "eval_seed", *f.eval_seed);
    if (f.n_train_traj) put("dataset", "n_train_traj", *f.n_train_traj);
    if (f.n_eval_traj) put("dataset", "n_eval_traj", *f.n_eval_traj);
    if (f.max_degree) put("dictionary", "max_degree", *f.max_degree);
    if (f.svd_tolerance) put("edmd", "svd_tolerance", *f.svd_tolerance);
    if (f.horizon) put("evaluate", "horizon", *f.horizon);
    if (f.ratios) put("compress", "ratios", *f.ratios);
    if (f.ranks) put("svd", "ranks", *f.ranks);
    if (f.bench_ratios) put("bench", "ratios", *f.bench_ratios);
    if (f.bench_steps) put("bench", "n_steps", *f.bench_steps);
    for (const std::string& o : f.overrides) {
        koopclust::apply_override(doc, o);
    }
    ExperimentConfig config = ExperimentConfig::from_json(doc);
    config.validate();
    return config;
}

int report_error(const std::string& command, const char* kind, const std::string& message, int code) {
    const nlohmann::json err = {{"error", {{"command", command}, {"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << std::endl;
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"koopclust: cart-pole Koopman models, compressed by clustering rows and columns"};
    app.require_subcommand(1);

    Flags f;
    app.add_option("-c,--config", f.config_path, "JSON config; absent keys keep their defaults")
        ->check(CLI::ExistingFile);
    app.add_option("-o,--out-dir", f.out_dir, "Directory holding every artifact and report");
    app.add_option("--seed", f.seed, "dataset.seed (training trajectories)");
    app.add_option("--eval-seed", f.eval_seed, "dataset.eval_seed (evaluation trajectories)");
    app.add_option("--n-train-traj", f.n_train_traj, "dataset.n_train_traj");
    app.add_option("--n-eval-traj", f.n_eval_traj, "dataset.n_eval_traj");
    app.add_option("--max-degree", f.max_degree, "dictionary.max_degree");
    app.add_option("--svd-tolerance", f.svd_tolerance, "edmd.svd_tolerance (relative singular-value cutoff)");
    app.add_option("--horizon", f.horizon, "evaluate.horizon (prediction steps)");
    app.add_option("--ratios", f.ratios, "compress.ratios (equal row/column ratios)")->delimiter(',');
    app.add_option("--ranks", f.ranks, "svd.ranks")->delimiter(',');
    app.add_option("--bench-ratios", f.bench_ratios, "bench.ratios (grid axes)")->delimiter(',');
    app.add_option("--bench-steps", f.bench_steps, "bench.n_steps (timed steps per cell)");
    app.add_option("--set", f.overrides, "Override any config key: section.key=value (repeatable)");

    using Stage = std::function<void(const ExperimentConfig&)>;
    const std::vector<std::pair<std::string, std::pair<std::string, Stage>>> stages = {
        {"generate",
         {"Simulate training and evaluation trajectories",
          [](const ExperimentConfig& c) { koopclust::pipeline::generate(c, std::cout); }}},
        {"train",
         {"Build the dictionary and estimate the Koopman matrix",
          [](const ExperimentConfig& c) { koopclust::pipeline::train(c, std::cout); }}},
        {"compress",
         {"Cluster rows and columns, write compressed models and SVD baselines",
          [](const ExperimentConfig& c) { koopclust::pipeline::compress(c, std::cout); }}},
        {"evaluate",
         {"Roll out every model on the evaluation set and write accuracy reports",
          [](const ExperimentConfig& c) { koopclust::pipeline::evaluate(c, std::cout); }}},
        {"bench",
         {"Time one evolution step over the ratio grid",
          [](const ExperimentConfig& c) { koopclust::pipeline::bench(c, std::cout); }}},
        {"report",
         {"Summarize accuracy, size and timing results as markdown",
          [](const ExperimentConfig& c) { koopclust::pipeline::report(c, std::cout); }}},
        {"run",
         {"Run every stage in order",
          [](const ExperimentConfig& c) { koopclust::pipeline::run_all(c, std::cout); }}},
        {"config",
         {"Print the resolved configuration",
          [](const ExperimentConfig& c) { std::cout << c.to_json().dump(2) << std::endl; }}},
    };
    std::map<CLI::App*, const Stage*> by_sub;
    for (const auto& [name, entry] : stages) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->fallthrough();
        by_sub[sub] = &entry.second;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string command = chosen->get_name();
    try {
        const ExperimentConfig config = resolve(f);
        (*by_sub.at(chosen))(config);
    } catch (const koopclust::ConfigError& e) {
        return report_error(command, "config", e.what(), kConfig);
    } catch (const koopclust::pipeline::ArtifactError& e) {
        return report_error(command, "artifact", e.what(), kArtifact);
    } catch (const koopclust::NumericalError& e) {
        return report_error(command, "numerical", e.what(), kNumerical);
    } catch (const std::exception& e) {
        return report_error(command, "failure", e.what(), kFailure);
    }
    return kOk;
}
