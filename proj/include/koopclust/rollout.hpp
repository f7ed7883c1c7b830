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

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "koopclust/cartpole.hpp"
#include "koopclust/types.hpp"

namespace koopclust {

// Predicted states for steps 1..n. When an iterate leaves the finite range the
// rollout stops and `diverged_at` holds the (1-based) step that failed.
struct Rollout {
    std::vector<cartpole::State> states;
    std::optional<std::size_t> diverged_at;
};

// Reads the state from the four degree-1 coordinates of a full dictionary
// vector (positions 1..4 in graded order).
inline cartpole::State read_linear(const Vector& psi) {
    return {psi[1], psi[2], psi[3], psi[4]};
}

// Shared loop for every linear predictor: v <- advance(v), state <- decode(v).
template <class Advance, class Decode>
Rollout iterate_linear(Vector v, std::size_t steps, Advance&& advance, Decode&& decode) {
    Rollout out;
    out.states.reserve(steps);
    Vector next(v.size());
    for (std::size_t t = 1; t <= steps; ++t) {
        advance(v, next);
        v.swap(next);
        const cartpole::State s = decode(v);
        if (!v.allFinite() || !s.finite()) {
            out.diverged_at = t;
            break;
        }
        out.states.push_back(s);
    }
    return out;
}

}  // namespace koopclust
