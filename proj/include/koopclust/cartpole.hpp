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
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace koopclust::cartpole {

// Frictionless cart-pole. theta is measured from upright; a positive force
// pushes the cart toward +x and, at the upright equilibrium, drives theta_dot
// negative.
struct Params {
    double cart_mass = 1.0;         // kg
    double pole_mass = 0.1;         // kg
    double pole_half_length = 0.5;  // m
    double gravity = 9.8;           // m/s^2
    double force_magnitude = 10.0;  // N
    double dt = 0.05;               // s
    double horizon = 5.0;           // s
    double rate_gain = 0.5;         // s, controller weight on theta_dot

    // Throws std::invalid_argument unless every field is finite and positive
    // (rate_gain may be zero).
    void validate() const;

    // Number of integration steps in one rollout, horizon / dt.
    std::size_t steps() const;
};

struct State {
    double x = 0.0;
    double theta = 0.0;
    double x_dot = 0.0;
    double theta_dot = 0.0;

    static constexpr std::size_t kDim = 4;

    bool finite() const;
    std::array<double, kDim> as_array() const { return {x, theta, x_dot, theta_dot}; }
    double operator[](std::size_t i) const { return as_array()[i]; }
    static State from_array(const std::array<double, kDim>& a) { return {a[0], a[1], a[2], a[3]}; }

    friend bool operator==(const State&, const State&) = default;
};

using Trajectory = std::vector<State>;

// Snapshot pairs (X1, X2): after[i] is the successor of before[i].
struct SnapshotPairs {
    std::vector<State> before;
    std::vector<State> after;

    std::size_t size() const { return before.size(); }
};

// One RK4 step of length params.dt under a constant force. Throws
// NumericalError when the result is not finite and std::invalid_argument when
// |force| exceeds params.force_magnitude.
State step(const Params& params, const State& state, double force);

// Bang-bang rule on the pole angle and its rate. Returns +force_magnitude when
// theta + rate_gain * theta_dot >= 0 and -force_magnitude otherwise.
double control(const Params& params, const State& state);

// Controlled rollout of params.steps() steps; the result has steps() + 1 states.
Trajectory simulate(const Params& params, const State& initial);

// Rollout with the force held at zero (used for energy checks).
Trajectory simulate_free(const Params& params, const State& initial, std::size_t steps);

// Total mechanical energy of cart and pole (the pole is a uniform rod).
double total_energy(const Params& params, const State& state);

inline constexpr double kDefaultNoise = 0.05;

// Initial states drawn as the origin plus uniform noise in [-noise, noise] on
// every component. The stream depends only on the seed.
std::vector<State> initial_states(std::size_t n, std::uint64_t seed, double noise = kDefaultNoise);

// Simulates one controlled trajectory per initial state. Rollout blow-up is
// rethrown as NumericalError carrying the trajectory index.
std::vector<Trajectory> generate_trajectories(const Params& params, std::size_t n_trajectories,
                                              std::uint64_t seed, double noise = kDefaultNoise);

// Concatenates the consecutive pairs of every trajectory.
SnapshotPairs to_pairs(const std::vector<Trajectory>& trajectories);

SnapshotPairs generate_dataset(const Params& params, std::size_t n_trajectories, std::uint64_t seed,
                               double noise = kDefaultNoise);

// CSV with header x,theta,x_dot,theta_dot,traj_id,step_id and one row per
// state, values printed with 17 significant digits.
void write_csv(std::ostream& out, const std::vector<Trajectory>& trajectories);

// Inverse of write_csv. Rows may come in any order; trajectories are rebuilt
// by traj_id and step_id, which must be contiguous from zero.
std::vector<Trajectory> read_csv(std::istream& in);

}  // namespace koopclust::cartpole
