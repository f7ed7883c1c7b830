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

#include "koopclust/cartpole.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "koopclust/types.hpp"

namespace koopclust::cartpole {

namespace {

struct Derivative {
    double x_dot, theta_dot, x_ddot, theta_ddot;
};

Derivative dynamics(const Params& p, const State& s, double force) {
    const double total_mass = p.cart_mass + p.pole_mass;
    const double pole_moment = p.pole_mass * p.pole_half_length;
    const double sin_t = std::sin(s.theta);
    const double cos_t = std::cos(s.theta);

    const double temp = (force + pole_moment * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    const double theta_ddot =
        (p.gravity * sin_t - cos_t * temp) /
        (p.pole_half_length * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_ddot = temp - pole_moment * theta_ddot * cos_t / total_mass;
    return {s.x_dot, s.theta_dot, x_ddot, theta_ddot};
}

State advance(const State& s, const Derivative& d, double h) {
    return {s.x + h * d.x_dot, s.theta + h * d.theta_dot, s.x_dot + h * d.x_ddot,
            s.theta_dot + h * d.theta_ddot};
}

// Uniform in [0, 1) from the top 53 bits, so streams are identical across
// standard library implementations.
double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void Params::validate() const {
    const double fields[] = {cart_mass, pole_mass, pole_half_length, gravity,
                             force_magnitude, dt, horizon};
    if (!std::isfinite(rate_gain) || rate_gain < 0.0) {
        throw std::invalid_argument("controller rate gain must be finite and non-negative");
    }
    for (double v : fields) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw std::invalid_argument("cart-pole parameters must be finite and strictly positive");
        }
    }
    if (steps() < 1) {
        throw std::invalid_argument("cart-pole horizon must cover at least one time step");
    }
}

std::size_t Params::steps() const {
    return static_cast<std::size_t>(std::llround(horizon / dt));
}

bool State::finite() const {
    return std::isfinite(x) && std::isfinite(theta) && std::isfinite(x_dot) &&
           std::isfinite(theta_dot);
}

State step(const Params& params, const State& state, double force) {
    if (std::abs(force) > params.force_magnitude) {
        throw std::invalid_argument("force exceeds the actuator limit");
    }
    if (!state.finite()) {
        throw std::invalid_argument("state must be finite");
    }
    const double h = params.dt;
    const Derivative k1 = dynamics(params, state, force);
    const Derivative k2 = dynamics(params, advance(state, k1, 0.5 * h), force);
    const Derivative k3 = dynamics(params, advance(state, k2, 0.5 * h), force);
    const Derivative k4 = dynamics(params, advance(state, k3, h), force);

    const auto combine = [h](double a, double b, double c, double d) {
        return h / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    };
    State next{
        state.x + combine(k1.x_dot, k2.x_dot, k3.x_dot, k4.x_dot),
        state.theta + combine(k1.theta_dot, k2.theta_dot, k3.theta_dot, k4.theta_dot),
        state.x_dot + combine(k1.x_ddot, k2.x_ddot, k3.x_ddot, k4.x_ddot),
        state.theta_dot + combine(k1.theta_ddot, k2.theta_ddot, k3.theta_ddot, k4.theta_ddot),
    };
    if (!next.finite()) {
        throw NumericalError("cart-pole integration produced a non-finite state", 0);
    }
    return next;
}

double control(const Params& params, const State& state) {
    return state.theta + params.rate_gain * state.theta_dot >= 0.0 ? params.force_magnitude
                                                            : -params.force_magnitude;
}

Trajectory simulate(const Params& params, const State& initial) {
    const std::size_t n = params.steps();
    Trajectory traj;
    traj.reserve(n + 1);
    traj.push_back(initial);
    for (std::size_t t = 0; t < n; ++t) {
        try {
            traj.push_back(step(params, traj.back(), control(params, traj.back())));
        } catch (const NumericalError&) {
            throw NumericalError("cart-pole rollout blew up at step " + std::to_string(t), t);
        }
    }
    return traj;
}

Trajectory simulate_free(const Params& params, const State& initial, std::size_t steps) {
    Trajectory traj;
    traj.reserve(steps + 1);
    traj.push_back(initial);
    for (std::size_t t = 0; t < steps; ++t) {
        traj.push_back(step(params, traj.back(), 0.0));
    }
    return traj;
}

double total_energy(const Params& p, const State& s) {
    const double l = p.pole_half_length;
    const double m = p.pole_mass;
    const double kinetic = 0.5 * (p.cart_mass + m) * s.x_dot * s.x_dot +
                           m * l * s.x_dot * s.theta_dot * std::cos(s.theta) +
                           (2.0 / 3.0) * m * l * l * s.theta_dot * s.theta_dot;
    const double potential = m * p.gravity * l * std::cos(s.theta);
    return kinetic + potential;
}

std::vector<State> initial_states(std::size_t n, std::uint64_t seed, double noise) {
    std::mt19937_64 rng(seed);
    std::vector<State> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, State::kDim> a{};
        for (double& v : a) {
            v = noise * (2.0 * unit_uniform(rng) - 1.0);
        }
        out.push_back(State::from_array(a));
    }
    return out;
}

std::vector<Trajectory> generate_trajectories(const Params& params, std::size_t n_trajectories,
                                              std::uint64_t seed, double noise) {
    params.validate();
    if (n_trajectories < 1) {
        throw std::invalid_argument("at least one trajectory is required");
    }
    std::vector<Trajectory> out;
    out.reserve(n_trajectories);
    std::size_t index = 0;
    for (const State& init : initial_states(n_trajectories, seed, noise)) {
        try {
            out.push_back(simulate(params, init));
        } catch (const NumericalError& e) {
            throw NumericalError("trajectory " + std::to_string(index) + ": " + e.what(), index);
        }
        ++index;
    }
    return out;
}

SnapshotPairs to_pairs(const std::vector<Trajectory>& trajectories) {
    SnapshotPairs pairs;
    for (const Trajectory& traj : trajectories) {
        for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
            pairs.before.push_back(traj[t]);
            pairs.after.push_back(traj[t + 1]);
        }
    }
    return pairs;
}

SnapshotPairs generate_dataset(const Params& params, std::size_t n_trajectories, std::uint64_t seed,
                               double noise) {
    return to_pairs(generate_trajectories(params, n_trajectories, seed, noise));
}

void write_csv(std::ostream& out, const std::vector<Trajectory>& trajectories) {
    out << "x,theta,x_dot,theta_dot,traj_id,step_id\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        for (std::size_t t = 0; t < trajectories[i].size(); ++t) {
            const State& s = trajectories[i][t];
            out << s.x << ',' << s.theta << ',' << s.x_dot << ',' << s.theta_dot << ',' << i << ','
                << t << '\n';
        }
    }
}

std::vector<Trajectory> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "x,theta,x_dot,theta_dot,traj_id,step_id") {
        throw std::runtime_error("dataset CSV must start with x,theta,x_dot,theta_dot,traj_id,step_id");
    }
    std::map<std::size_t, std::map<std::size_t, State>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::array<double, State::kDim> a{};
        std::size_t traj = 0;
        std::size_t step_id = 0;
        char c0 = 0, c1 = 0, c2 = 0, c3 = 0, c4 = 0;
        fields >> a[0] >> c0 >> a[1] >> c1 >> a[2] >> c2 >> a[3] >> c3 >> traj >> c4 >> step_id;
        if (!fields || c0 != ',' || c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
            throw std::runtime_error("malformed dataset row at line " + std::to_string(line_no));
        }
        if (!rows[traj].emplace(step_id, State::from_array(a)).second) {
            throw std::runtime_error("duplicate (traj_id, step_id) at line " + std::to_string(line_no));
        }
    }
    std::vector<Trajectory> out;
    std::size_t expected_traj = 0;
    for (auto& [traj, steps] : rows) {
        if (traj != expected_traj++) {
            throw std::runtime_error("traj_id values must be contiguous from zero");
        }
        Trajectory t;
        std::size_t expected_step = 0;
        for (auto& [step_id, state] : steps) {
            if (step_id != expected_step++) {
                throw std::runtime_error("step_id values of trajectory " + std::to_string(traj) +
                                         " must be contiguous from zero");
            }
            t.push_back(state);
        }
        out.push_back(std::move(t));
    }
    return out;
}

}  // namespace koopclust::cartpole
