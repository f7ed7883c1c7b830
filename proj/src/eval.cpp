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

#include "koopclust/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace koopclust::eval {

KoopmanPredictor::KoopmanPredictor(const edmd::KoopmanMatrix& km, const Dictionary& dict,
                                   std::string label)
    : km_(km), dict_(dict), label_(std::move(label)) {}

Rollout KoopmanPredictor::rollout(const cartpole::State& initial, std::size_t steps) const {
    return edmd::rollout(km_, dict_, initial, steps);
}

std::size_t KoopmanPredictor::element_count() const {
    return static_cast<std::size_t>(km_.k.size());
}

Vector KoopmanPredictor::encode(const cartpole::State& initial) const {
    return dict_.evaluate(initial);
}

void KoopmanPredictor::advance(const Vector& in, Vector& out) const {
    out.noalias() = km_.k * in;
}

CompressedPredictor::CompressedPredictor(const compress::CompressedKoopman& ck,
                                         const Dictionary& dict, compress::Evolution mode)
    : ck_(ck), dict_(dict), mode_(mode) {}

std::string CompressedPredictor::label() const {
    std::string l = ratio_label(ck_.ratio_row, ck_.ratio_col);
    return mode_ == compress::Evolution::after ? l : l + "_before";
}

Rollout CompressedPredictor::rollout(const cartpole::State& initial, std::size_t steps) const {
    return compress::rollout(ck_, dict_, initial, steps, mode_);
}

std::size_t CompressedPredictor::element_count() const {
    return mode_ == compress::Evolution::after ? compress::element_count(ck_)
                                               : ck_.cols() * ck_.cols();
}

Vector CompressedPredictor::encode(const cartpole::State& initial) const {
    const Vector psi = dict_.evaluate(initial);
    return mode_ == compress::Evolution::after ? compress::compress_dict_after(psi, ck_.row_clusters)
                                               : compress::compress_dict_before(psi, ck_.col_clusters);
}

void CompressedPredictor::advance(const Vector& in, Vector& out) const {
    out.noalias() = (mode_ == compress::Evolution::after ? ck_.k_a : ck_.k_b) * in;
}

SvdPredictor::SvdPredictor(const svd_baseline::SvdFactors& f, const Dictionary& dict)
    : f_(f), dict_(dict) {}

std::string SvdPredictor::label() const { return rank_label(f_.rank()); }

Rollout SvdPredictor::rollout(const cartpole::State& initial, std::size_t steps) const {
    return svd_baseline::rollout_svd(f_, dict_, initial, steps);
}

std::size_t SvdPredictor::element_count() const {
    return svd_baseline::element_count(f_.dimension(), f_.rank());
}

Vector SvdPredictor::encode(const cartpole::State& initial) const {
    return dict_.evaluate(initial);
}

void SvdPredictor::advance(const Vector& in, Vector& out) const {
    const Vector coeff = f_.v_t * in;
    out.noalias() = f_.u_sigma * coeff;
}

Rollout SimulatorPredictor::rollout(const cartpole::State& initial, std::size_t steps) const {
    Rollout out;
    cartpole::State s = initial;
    for (std::size_t t = 1; t <= steps; ++t) {
        s = cartpole::step(params_, s, cartpole::control(params_, s));
        out.states.push_back(s);
    }
    return out;
}

std::string format_ratio(double r) {
    std::ostringstream os;
    os << std::setprecision(3) << r;
    std::string s = os.str();
    if (s.find('.') == std::string::npos) {
        s += ".0";
    }
    return s;
}

std::string ratio_label(double ratio_row, double ratio_col) {
    return "ratio_" + format_ratio(ratio_row) + "_" + format_ratio(ratio_col);
}

std::string rank_label(std::size_t rank) { return "svd_rank_" + std::to_string(rank); }

double quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double AccuracyReport::horizon_mse(std::size_t component) const {
    const ComponentStats& c = components.at(component);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < c.mse.size(); ++t) {
        if (c.n_valid[t] > 0) {
            sum += c.mse[t];
            ++count;
        }
    }
    return count > 0 ? sum / static_cast<double>(count) : std::numeric_limits<double>::infinity();
}

AccuracyReport evaluate_accuracy(const Predictor& predictor,
                                 const std::vector<cartpole::Trajectory>& dataset,
                                 std::size_t horizon) {
    if (dataset.empty()) {
        throw std::invalid_argument("evaluation dataset is empty");
    }
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be at least one step");
    }
    for (const auto& traj : dataset) {
        if (traj.size() < horizon + 1) {
            throw std::invalid_argument("horizon exceeds the evaluation trajectory length");
        }
    }

    AccuracyReport report;
    report.predictor = predictor.label();
    report.horizon = horizon;
    report.n_trajectories = dataset.size();

    // errors[component][step] collects squared errors across trajectories.
    std::array<std::vector<std::vector<double>>, cartpole::State::kDim> errors;
    for (auto& e : errors) {
        e.resize(horizon);
    }
    for (const auto& traj : dataset) {
        const Rollout r = predictor.rollout(traj.front(), horizon);
        if (r.diverged_at) {
            ++report.n_diverged;
        }
        for (std::size_t t = 0; t < r.states.size(); ++t) {
            const auto pred = r.states[t].as_array();
            const auto truth = traj[t + 1].as_array();
            for (std::size_t c = 0; c < cartpole::State::kDim; ++c) {
                const double diff = pred[c] - truth[c];
                errors[c][t].push_back(diff * diff);
            }
        }
    }

    for (std::size_t c = 0; c < cartpole::State::kDim; ++c) {
        ComponentStats& stats = report.components[c];
        for (std::size_t t = 0; t < horizon; ++t) {
            const auto& e = errors[c][t];
            double mean = std::numeric_limits<double>::quiet_NaN();
            if (!e.empty()) {
                mean = 0.0;
                for (double v : e) {
                    mean += v;
                }
                mean /= static_cast<double>(e.size());
            }
            stats.mse.push_back(mean);
            stats.q25.push_back(quantile(e, 0.25));
            stats.q50.push_back(quantile(e, 0.50));
            stats.q75.push_back(quantile(e, 0.75));
            stats.n_valid.push_back(e.size());
        }
    }
    return report;
}

TimingReport benchmark_timing(const LinearPredictor& predictor,
                              const std::vector<cartpole::State>& initials,
                              const TimingOptions& options) {
    if (initials.empty()) {
        throw std::invalid_argument("timing needs at least one initial state");
    }
    if (options.batches < 1 || options.n_steps < options.batches || options.segment < 1) {
        throw std::invalid_argument("invalid timing options");
    }
    std::vector<Vector> encoded;
    encoded.reserve(initials.size());
    for (const auto& s : initials) {
        encoded.push_back(predictor.encode(s));
    }

    std::size_t next_initial = 0;
    std::size_t in_segment = 0;
    Vector v = encoded[0];
    Vector out(v.size());
    const auto run = [&](std::size_t steps) {
        for (std::size_t i = 0; i < steps; ++i) {
            predictor.advance(v, out);
            v.swap(out);
            if (++in_segment == options.segment) {
                in_segment = 0;
                next_initial = (next_initial + 1) % encoded.size();
                v = encoded[next_initial];
            }
        }
    };

    run(options.warmup_steps);

    using Clock = std::chrono::steady_clock;
    TimingReport report;
    report.predictor = predictor.label();
    const std::size_t per_batch = options.n_steps / options.batches;
    double total_ms = 0.0;
    for (std::size_t b = 0; b < options.batches; ++b) {
        const std::size_t steps =
            b + 1 == options.batches ? options.n_steps - per_batch * (options.batches - 1) : per_batch;
        const auto t0 = Clock::now();
        run(steps);
        const auto t1 = Clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        total_ms += ms;
        report.batch_means_ms.push_back(ms / static_cast<double>(steps));
    }
    report.samples = options.n_steps;
    report.mean_ms = total_ms / static_cast<double>(options.n_steps);
    std::vector<double> sorted = report.batch_means_ms;
    std::sort(sorted.begin(), sorted.end());
    report.median_batch_ms = sorted[sorted.size() / 2];
    return report;
}

SizeReport count_elements(const std::vector<const Predictor*>& predictors) {
    SizeReport out;
    for (const Predictor* p : predictors) {
        out.push_back({p->label(), p->element_count()});
    }
    return out;
}

void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyReport>& reports) {
    out << "predictor,component,step,mse,q25,q50,q75,n_valid\n";
    out << std::setprecision(17);
    for (const auto& r : reports) {
        for (std::size_t c = 0; c < cartpole::State::kDim; ++c) {
            const ComponentStats& s = r.components[c];
            for (std::size_t t = 0; t < s.mse.size(); ++t) {
                out << r.predictor << ',' << kComponentNames[c] << ',' << t + 1 << ',' << s.mse[t]
                    << ',' << s.q25[t] << ',' << s.q50[t] << ',' << s.q75[t] << ',' << s.n_valid[t]
                    << '\n';
            }
        }
    }
}

nlohmann::json accuracy_summary(const AccuracyReport& report) {
    nlohmann::json horizon_mse = nlohmann::json::object();
    for (std::size_t c = 0; c < cartpole::State::kDim; ++c) {
        const double v = report.horizon_mse(c);
        horizon_mse[kComponentNames[c]] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
    }
    return {{"predictor", report.predictor},
            {"horizon", report.horizon},
            {"n_trajectories", report.n_trajectories},
            {"n_diverged", report.n_diverged},
            {"horizon_mse", horizon_mse}};
}

}  // namespace koopclust::eval
