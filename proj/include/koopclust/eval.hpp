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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "koopclust/cartpole.hpp"
#include "koopclust/compress.hpp"
#include "koopclust/dictionary.hpp"
#include "koopclust/edmd.hpp"
#include "koopclust/rollout.hpp"
#include "koopclust/svd_baseline.hpp"

namespace koopclust::eval {

class Predictor {
public:
    virtual ~Predictor() = default;
    virtual std::string label() const = 0;
    virtual Rollout rollout(const cartpole::State& initial, std::size_t steps) const = 0;
    // Stored matrix elements; 0 for predictors without a matrix.
    virtual std::size_t element_count() const = 0;
};

// A predictor that advances a latent vector by a fixed linear map. The
// timing benchmark drives encode/advance directly.
class LinearPredictor : public Predictor {
public:
    virtual Vector encode(const cartpole::State& initial) const = 0;
    virtual void advance(const Vector& in, Vector& out) const = 0;
};

class KoopmanPredictor final : public LinearPredictor {
public:
    KoopmanPredictor(const edmd::KoopmanMatrix& km, const Dictionary& dict,
                     std::string label = "uncompressed");
    std::string label() const override { return label_; }
    Rollout rollout(const cartpole::State& initial, std::size_t steps) const override;
    std::size_t element_count() const override;
    Vector encode(const cartpole::State& initial) const override;
    void advance(const Vector& in, Vector& out) const override;

private:
    const edmd::KoopmanMatrix& km_;
    const Dictionary& dict_;
    std::string label_;
};

class CompressedPredictor final : public LinearPredictor {
public:
    CompressedPredictor(const compress::CompressedKoopman& ck, const Dictionary& dict,
                        compress::Evolution mode = compress::Evolution::after);
    std::string label() const override;
    Rollout rollout(const cartpole::State& initial, std::size_t steps) const override;
    std::size_t element_count() const override;
    Vector encode(const cartpole::State& initial) const override;
    void advance(const Vector& in, Vector& out) const override;

private:
    const compress::CompressedKoopman& ck_;
    const Dictionary& dict_;
    compress::Evolution mode_;
};

class SvdPredictor final : public LinearPredictor {
public:
    SvdPredictor(const svd_baseline::SvdFactors& f, const Dictionary& dict);
    std::string label() const override;
    Rollout rollout(const cartpole::State& initial, std::size_t steps) const override;
    std::size_t element_count() const override;
    Vector encode(const cartpole::State& initial) const override;
    void advance(const Vector& in, Vector& out) const override;

private:
    const svd_baseline::SvdFactors& f_;
    const Dictionary& dict_;
};

// Ground truth: the controlled simulator itself.
class SimulatorPredictor final : public Predictor {
public:
    explicit SimulatorPredictor(cartpole::Params params) : params_(params) {}
    std::string label() const override { return "simulator"; }
    Rollout rollout(const cartpole::State& initial, std::size_t steps) const override;
    std::size_t element_count() const override { return 0; }

private:
    cartpole::Params params_;
};

// Shortest form with at least one decimal: 1 -> "1.0", 0.25 -> "0.25".
std::string format_ratio(double r);

// Labels such as "ratio_0.4_0.4" and "svd_rank_20".
std::string ratio_label(double ratio_row, double ratio_col);
std::string rank_label(std::size_t rank);

inline constexpr std::array<const char*, cartpole::State::kDim> kComponentNames = {
    "x", "theta", "x_dot", "theta_dot"};

// Squared-error statistics per prediction step (index 0 is step 1).
struct ComponentStats {
    std::vector<double> mse;
    std::vector<double> q25;
    std::vector<double> q50;
    std::vector<double> q75;
    std::vector<std::size_t> n_valid;
};

struct AccuracyReport {
    std::string predictor;
    std::size_t horizon = 0;
    std::size_t n_trajectories = 0;
    // Trajectories whose rollout left the finite range before the horizon.
    std::size_t n_diverged = 0;
    std::array<ComponentStats, cartpole::State::kDim> components;

    // Mean over steps of the per-step MSE, skipping steps with no valid
    // trajectory; +inf when no step has one.
    double horizon_mse(std::size_t component) const;
};

// Rolls every trajectory out from its first state and compares steps 1..horizon.
AccuracyReport evaluate_accuracy(const Predictor& predictor,
                                 const std::vector<cartpole::Trajectory>& dataset,
                                 std::size_t horizon);

struct TimingReport {
    std::string predictor;
    double mean_ms = 0.0;          // total time / total steps
    double median_batch_ms = 0.0;  // median of the per-batch means
    std::size_t samples = 0;       // timed steps
    std::vector<double> batch_means_ms;
};

struct TimingOptions {
    std::size_t n_steps = 10'000;
    std::size_t warmup_steps = 500;
    std::size_t batches = 5;
    // Rollouts restart from the next initial state after this many steps,
    // mirroring evaluation trajectories of fixed length.
    std::size_t segment = 100;
};

// Times predictor.advance on iterates started from `initials`. Encoding the
// initial states happens before the clock starts.
TimingReport benchmark_timing(const LinearPredictor& predictor,
                              const std::vector<cartpole::State>& initials,
                              const TimingOptions& options = {});

struct SizeEntry {
    std::string predictor;
    std::size_t elements = 0;
};
using SizeReport = std::vector<SizeEntry>;

SizeReport count_elements(const std::vector<const Predictor*>& predictors);

// Linear-interpolation quantile of an unsorted sample (numpy's default rule).
double quantile(std::vector<double> values, double q);

// CSV header `predictor,component,step,mse,q25,q50,q75,n_valid`.
void write_accuracy_csv(std::ostream& out, const std::vector<AccuracyReport>& reports);
nlohmann::json accuracy_summary(const AccuracyReport& report);

}  // namespace koopclust::eval
