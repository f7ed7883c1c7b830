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

#include "koopclust/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "koopclust/compress.hpp"
#include "koopclust/dictionary.hpp"
#include "koopclust/edmd.hpp"
#include "koopclust/io.hpp"
#include "koopclust/svd_baseline.hpp"

namespace koopclust::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

void write_manifest(const fs::path& dir, const std::string& stage, std::uint64_t hash) {
    io::write_json(dir / kManifest, {{"stage", stage}, {"config_hash", hex_hash(hash)}});
}

// `producer` names the command that writes the artifact.
void check_manifest(const fs::path& dir, const std::string& producer, std::uint64_t expected) {
    const fs::path path = dir / kManifest;
    if (!fs::exists(path)) {
        throw ArtifactError("missing artifact " + path.string() + "; run `koopclust " + producer +
                            "` first");
    }
    nlohmann::json m;
    try {
        m = io::read_json(path);
    } catch (const std::exception& e) {
        throw ArtifactError("unreadable artifact " + path.string() + ": " + e.what());
    }
    const std::string found = m.value("config_hash", std::string());
    if (found != hex_hash(expected)) {
        throw ArtifactError(dir.string() + " was produced under a different configuration (hash " +
                            found + ", expected " + hex_hash(expected) + "); re-run `koopclust " +
                            producer + "`");
    }
}

void write_config(const ExperimentConfig& config) {
    ensure_dir(config.out_dir);
    io::write_json(fs::path(config.out_dir) / "config.json", config.to_json());
}

std::string fmt(double v, int digits = 6) {
    if (!std::isfinite(v)) {
        return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
    std::ostringstream os;
    os << std::setprecision(digits) << v;
    return os.str();
}

struct Model {
    Dictionary dict;
    edmd::KoopmanMatrix km;
};

Model load_model(const ExperimentConfig& config) {
    const Paths paths(config.out_dir);
    check_manifest(paths.model(), "train", config.model_hash());
    try {
        Model m{Dictionary::from_json(io::read_json(paths.model() / "dictionary.json")),
                edmd::load(paths.model() / "koopman.bin")};
        if (m.km.dict_id != m.dict.hash()) {
            throw ArtifactError("Koopman matrix and dictionary in " + paths.model().string() +
                                " do not belong together; re-run `koopclust train`");
        }
        return m;
    } catch (const ArtifactError&) {
        throw;
    } catch (const std::exception& e) {
        throw ArtifactError("cannot load model from " + paths.model().string() + ": " + e.what());
    }
}

compress::CompressedKoopman load_compressed(const ExperimentConfig& config, double row, double col) {
    const fs::path dir = Paths(config.out_dir).compressed() / eval::ratio_label(row, col);
    if (!fs::exists(dir)) {
        throw ArtifactError("missing compressed model " + dir.string() +
                            "; run `koopclust compress` with this ratio pair");
    }
    try {
        return compress::load(dir);
    } catch (const std::exception& e) {
        throw ArtifactError("cannot load " + dir.string() + ": " + e.what());
    }
}

svd_baseline::SvdFactors load_svd(const ExperimentConfig& config, std::size_t rank) {
    const fs::path dir = Paths(config.out_dir).svd() / eval::rank_label(rank);
    if (!fs::exists(dir)) {
        throw ArtifactError("missing SVD factors " + dir.string() + "; run `koopclust compress`");
    }
    try {
        return svd_baseline::load(dir);
    } catch (const std::exception& e) {
        throw ArtifactError("cannot load " + dir.string() + ": " + e.what());
    }
}

nlohmann::json timing_json(const eval::TimingReport& t) {
    return {{"predictor", t.predictor},
            {"mean_ms", t.mean_ms},
            {"median_batch_ms", t.median_batch_ms},
            {"samples", t.samples},
            {"batch_means_ms", t.batch_means_ms}};
}

const eval::AccuracyReport* find_report(const std::vector<eval::AccuracyReport>& reports,
                                        const std::string& label) {
    for (const auto& r : reports) {
        if (r.predictor == label) {
            return &r;
        }
    }
    return nullptr;
}

}  // namespace

std::vector<cartpole::Trajectory> load_trajectories(const ExperimentConfig& config, bool eval_split) {
    const Paths paths(config.out_dir);
    check_manifest(paths.data(), "generate", config.data_hash());
    const fs::path path = paths.data() / (eval_split ? "eval.csv" : "train.csv");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ArtifactError("missing dataset " + path.string() + "; run `koopclust generate` first");
    }
    try {
        return cartpole::read_csv(in);
    } catch (const std::exception& e) {
        throw ArtifactError("cannot parse " + path.string() + ": " + e.what());
    }
}

GenerateResult generate(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    write_config(config);
    const Paths paths(config.out_dir);
    ensure_dir(paths.data());

    const DatasetConfig& ds = config.dataset;
    const auto train = cartpole::generate_trajectories(config.cartpole, ds.n_train_traj, ds.seed, ds.noise);
    const auto evals =
        cartpole::generate_trajectories(config.cartpole, ds.n_eval_traj, ds.eval_seed, ds.noise);
    for (const auto& [name, trajs] : {std::pair{"train.csv", &train}, std::pair{"eval.csv", &evals}}) {
        const fs::path path = paths.data() / name;
        std::ofstream out = open_out(path);
        cartpole::write_csv(out, *trajs);
        close_out(out, path);
    }
    write_manifest(paths.data(), "generate", config.data_hash());

    GenerateResult r{cartpole::to_pairs(train).size(), cartpole::to_pairs(evals).size()};
    log << "train pairs: " << r.train_pairs << " (" << ds.n_train_traj << " trajectories)\n"
        << "eval pairs: " << r.eval_pairs << " (" << ds.n_eval_traj << " trajectories)\n";
    return r;
}

TrainResult train(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    write_config(config);
    const Paths paths(config.out_dir);
    const cartpole::SnapshotPairs pairs = cartpole::to_pairs(load_trajectories(config, false));
    if (pairs.size() == 0) {
        throw std::invalid_argument("training dataset has no snapshot pairs");
    }
    const Dictionary dict = Dictionary::build(config.state_dim, config.max_degree);
    const edmd::DataMatrices data = edmd::build_data_matrices(dict, pairs);
    const edmd::KoopmanMatrix km = edmd::estimate(data, config.svd_tolerance, dict.hash());

    ensure_dir(paths.model());
    io::write_json(paths.model() / "dictionary.json", dict.to_json());
    edmd::save(km, paths.model() / "koopman.bin");
    write_manifest(paths.model(), "train", config.model_hash());

    TrainResult r{dict.size(), edmd::residual(data, km.k), pairs.size()};
    log << "D = " << r.dimension << "\n"
        << "pairs: " << r.samples << "\n"
        << "residual ||Psi(X2) - K Psi(X1)||_F = " << fmt(r.residual) << "\n";
    return r;
}

CompressResult compress(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    write_config(config);
    const Paths paths(config.out_dir);
    const Model model = load_model(config);

    ensure_dir(paths.compressed());
    const compress::Compressor compressor(model.km);
    io::write_json(paths.compressed() / "row_dendrogram.json", compressor.row_dendrogram().to_json());
    io::write_json(paths.compressed() / "col_dendrogram.json", compressor.col_dendrogram().to_json());

    CompressResult result;
    for (const auto& [row, col] : config.compressed_pairs()) {
        const compress::CompressedKoopman ck = compressor.compress(row, col);
        compress::save(ck, paths.compressed() / eval::ratio_label(row, col));
        result.compressed.push_back({row, col, ck.rows(), ck.cols(), compress::element_count(ck)});
        log << eval::ratio_label(row, col) << ": N = " << ck.rows() << ", M = " << ck.cols()
            << ", elements = " << compress::element_count(ck) << "\n";
    }
    write_manifest(paths.compressed(), "compress", config.model_hash());

    ensure_dir(paths.svd());
    const svd_baseline::Truncator truncator(model.km);
    for (std::size_t rank : config.svd_ranks) {
        const svd_baseline::SvdFactors f = truncator.truncate(rank);
        svd_baseline::save(f, paths.svd() / eval::rank_label(rank));
        result.svd_ranks.push_back(rank);
        log << eval::rank_label(rank) << ": elements = "
            << svd_baseline::element_count(f.dimension(), rank) << "\n";
    }
    write_manifest(paths.svd(), "compress", config.model_hash());
    return result;
}

EvaluateResult evaluate(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    write_config(config);
    const Paths paths(config.out_dir);
    const auto dataset = load_trajectories(config, true);
    const Model model = load_model(config);
    check_manifest(paths.compressed(), "compress", config.model_hash());
    check_manifest(paths.svd(), "compress", config.model_hash());

    std::vector<std::unique_ptr<compress::CompressedKoopman>> compressed;
    std::vector<std::unique_ptr<svd_baseline::SvdFactors>> factors;
    std::vector<std::unique_ptr<eval::Predictor>> predictors;
    predictors.push_back(std::make_unique<eval::KoopmanPredictor>(model.km, model.dict));
    for (double r : config.ratios) {
        compressed.push_back(std::make_unique<compress::CompressedKoopman>(load_compressed(config, r, r)));
        predictors.push_back(std::make_unique<eval::CompressedPredictor>(*compressed.back(), model.dict));
    }
    for (std::size_t rank : config.svd_ranks) {
        factors.push_back(std::make_unique<svd_baseline::SvdFactors>(load_svd(config, rank)));
        predictors.push_back(std::make_unique<eval::SvdPredictor>(*factors.back(), model.dict));
    }

    EvaluateResult result;
    std::vector<const eval::Predictor*> raw;
    for (const auto& p : predictors) {
        result.reports.push_back(eval::evaluate_accuracy(*p, dataset, config.horizon));
        raw.push_back(p.get());
    }
    result.sizes = eval::count_elements(raw);

    ensure_dir(paths.reports());
    {
        const fs::path path = paths.reports() / "accuracy.csv";
        std::ofstream out = open_out(path);
        eval::write_accuracy_csv(out, result.reports);
        close_out(out, path);
    }
    {
        const fs::path path = paths.reports() / "sizes.csv";
        std::ofstream out = open_out(path);
        out << "predictor,elements\n";
        for (const auto& s : result.sizes) {
            out << s.predictor << ',' << s.elements << '\n';
        }
        close_out(out, path);
    }

    nlohmann::json summary = {{"horizon", config.horizon},
                              {"n_trajectories", dataset.size()},
                              {"predictors", nlohmann::json::array()},
                              {"memory_matched", nlohmann::json::array()}};
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        nlohmann::json s = eval::accuracy_summary(result.reports[i]);
        s["elements"] = result.sizes[i].elements;
        summary["predictors"].push_back(std::move(s));
    }
    const auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
    for (const MemoryMatch& m : config.memory_matched) {
        const auto* proposed = find_report(result.reports, eval::ratio_label(m.ratio, m.ratio));
        const auto* svd = find_report(result.reports, eval::rank_label(m.rank));
        summary["memory_matched"].push_back(
            {{"proposed", proposed->predictor},
             {"svd", svd->predictor},
             {"theta_mse_proposed", finite_or_null(proposed->horizon_mse(1))},
             {"theta_mse_svd", finite_or_null(svd->horizon_mse(1))},
             {"x_mse_proposed", finite_or_null(proposed->horizon_mse(0))},
             {"x_mse_svd", finite_or_null(svd->horizon_mse(0))}});
    }
    io::write_json(paths.reports() / "accuracy_summary.json", summary);

    log << std::left << std::setw(18) << "predictor" << std::setw(10) << "elements" << std::setw(14)
        << "mse_x" << std::setw(14) << "mse_theta"
        << "diverged\n";
    for (std::size_t i = 0; i < result.reports.size(); ++i) {
        const auto& r = result.reports[i];
        log << std::setw(18) << r.predictor << std::setw(10) << result.sizes[i].elements << std::setw(14)
            << fmt(r.horizon_mse(0)) << std::setw(14) << fmt(r.horizon_mse(1)) << r.n_diverged << "/"
            << r.n_trajectories << "\n";
    }
    log << std::right;
    return result;
}

BenchResult bench(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    write_config(config);
    const Paths paths(config.out_dir);
    const auto dataset = load_trajectories(config, true);
    const Model model = load_model(config);
    check_manifest(paths.compressed(), "compress", config.model_hash());

    std::vector<cartpole::State> initials;
    for (const auto& t : dataset) {
        initials.push_back(t.front());
    }
    eval::TimingOptions options;
    options.n_steps = config.bench.n_steps;
    options.warmup_steps = config.bench.warmup_steps;
    options.batches = config.bench.batches;
    options.segment = config.horizon;

    BenchResult result;
    result.uncompressed =
        eval::benchmark_timing(eval::KoopmanPredictor(model.km, model.dict), initials, options);
    log << "uncompressed: " << fmt(result.uncompressed.mean_ms, 4) << " ms/step\n";
    for (double row : config.bench.ratios) {
        for (double col : config.bench.ratios) {
            // One model in memory at a time keeps the grid's footprint small.
            const compress::CompressedKoopman ck = load_compressed(config, row, col);
            const eval::CompressedPredictor predictor(ck, model.dict);
            result.grid.push_back({row, col, eval::benchmark_timing(predictor, initials, options)});
            log << predictor.label() << ": " << fmt(result.grid.back().timing.mean_ms, 4) << " ms/step\n";
        }
    }

    ensure_dir(paths.reports());
    {
        const fs::path path = paths.reports() / "timing.csv";
        std::ofstream out = open_out(path);
        out << "row_ratio";
        for (double col : config.bench.ratios) {
            out << ",col_" << eval::format_ratio(col);
        }
        out << '\n';
        std::size_t k = 0;
        for (double row : config.bench.ratios) {
            out << eval::format_ratio(row);
            for (std::size_t c = 0; c < config.bench.ratios.size(); ++c) {
                out << ',' << fmt(result.grid[k++].timing.mean_ms, 6);
            }
            out << '\n';
        }
        close_out(out, path);
    }
    {
        const fs::path path = paths.reports() / "timing_detail.csv";
        std::ofstream out = open_out(path);
        out << "predictor,ratio_row,ratio_col,mean_ms,median_batch_ms,samples\n";
        out << result.uncompressed.predictor << ",,," << fmt(result.uncompressed.mean_ms) << ','
            << fmt(result.uncompressed.median_batch_ms) << ',' << result.uncompressed.samples << '\n';
        for (const BenchEntry& e : result.grid) {
            out << e.timing.predictor << ',' << eval::format_ratio(e.ratio_row) << ','
                << eval::format_ratio(e.ratio_col) << ',' << fmt(e.timing.mean_ms) << ','
                << fmt(e.timing.median_batch_ms) << ',' << e.timing.samples << '\n';
        }
        close_out(out, path);
    }
    nlohmann::json tj = {{"uncompressed", timing_json(result.uncompressed)},
                         {"grid", nlohmann::json::array()}};
    for (const BenchEntry& e : result.grid) {
        nlohmann::json entry = timing_json(e.timing);
        entry["ratio_row"] = e.ratio_row;
        entry["ratio_col"] = e.ratio_col;
        tj["grid"].push_back(std::move(entry));
    }
    io::write_json(paths.reports() / "timing.json", tj);
    return result;
}

std::string report(const ExperimentConfig& config, std::ostream& log) {
    config.validate();
    const Paths paths(config.out_dir);
    const fs::path acc_path = paths.reports() / "accuracy_summary.json";
    if (!fs::exists(acc_path)) {
        throw ArtifactError("missing " + acc_path.string() + "; run `koopclust evaluate` first");
    }
    const nlohmann::json acc = io::read_json(acc_path);
    const auto num = [](const nlohmann::json& v) {
        return v.is_number() ? fmt(v.get<double>()) : std::string("inf");
    };

    std::ostringstream md;
    md << "# koopclust report\n\n";
    md << "Dictionary size D = " << config.dictionary_dimension() << ", evaluation horizon "
       << acc.at("horizon").get<std::size_t>() << " steps over " << acc.at("n_trajectories").get<std::size_t>()
       << " trajectories.\n\n";

    const fs::path timing_path = paths.reports() / "timing.json";
    md << "## Time per step [ms]\n\n";
    if (fs::exists(timing_path)) {
        const nlohmann::json tj = io::read_json(timing_path);
        md << "Uncompressed: " << fmt(tj.at("uncompressed").at("mean_ms").get<double>(), 4) << "\n\n";
        md << "| row \\ col |";
        for (double c : config.bench.ratios) {
            md << ' ' << eval::format_ratio(c) << " |";
        }
        md << "\n|---|";
        for (std::size_t i = 0; i < config.bench.ratios.size(); ++i) {
            md << "---|";
        }
        md << '\n';
        const auto& grid = tj.at("grid");
        std::size_t k = 0;
        for (double r : config.bench.ratios) {
            md << "| " << eval::format_ratio(r) << " |";
            for (std::size_t c = 0; c < config.bench.ratios.size() && k < grid.size(); ++c, ++k) {
                md << ' ' << fmt(grid[k].at("mean_ms").get<double>(), 4) << " |";
            }
            md << '\n';
        }
    } else {
        md << "Not measured; run `koopclust bench`.\n";
    }

    md << "\n## Accuracy (horizon-averaged MSE)\n\n";
    md << "| predictor | elements | x | theta | diverged |\n|---|---|---|---|---|\n";
    for (const auto& p : acc.at("predictors")) {
        md << "| " << p.at("predictor").get<std::string>() << " | " << p.at("elements").get<std::size_t>()
           << " | " << num(p.at("horizon_mse").at("x")) << " | " << num(p.at("horizon_mse").at("theta"))
           << " | " << p.at("n_diverged").get<std::size_t>() << "/" << p.at("n_trajectories").get<std::size_t>()
           << " |\n";
    }

    md << "\n## Memory-matched comparison (theta)\n\n";
    md << "| proposed | svd | proposed mse | svd mse |\n|---|---|---|---|\n";
    for (const auto& m : acc.at("memory_matched")) {
        md << "| " << m.at("proposed").get<std::string>() << " | " << m.at("svd").get<std::string>() << " | "
           << num(m.at("theta_mse_proposed")) << " | " << num(m.at("theta_mse_svd")) << " |\n";
    }

    const std::string text = md.str();
    ensure_dir(paths.reports());
    const fs::path path = paths.reports() / "report.md";
    std::ofstream out = open_out(path);
    out << text;
    close_out(out, path);
    log << text;
    return text;
}

void run_all(const ExperimentConfig& config, std::ostream& log) {
    log << "== generate\n";
    generate(config, log);
    log << "== train\n";
    train(config, log);
    log << "== compress\n";
    compress(config, log);
    log << "== evaluate\n";
    evaluate(config, log);
    log << "== bench\n";
    bench(config, log);
    log << "== report\n";
    report(config, log);
}

}  // namespace koopclust::pipeline
