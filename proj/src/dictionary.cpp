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

#include "koopclust/dictionary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "koopclust/hash.hpp"

namespace koopclust {

namespace {

// Appends every exponent tuple of `remaining` total degree over variables
// [var, n) in descending lexicographic order.
void enumerate_degree(std::size_t var, int remaining, MultiIndex& current,
                      std::vector<MultiIndex>& out) {
    const std::size_t n = current.size();
    if (var + 1 == n) {
        current[var] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[var] = e;
        enumerate_degree(var + 1, remaining - e, current, out);
    }
    current[var] = 0;
}

double int_pow(double base, int exponent) {
    double result = 1.0;
    while (exponent > 0) {
        if (exponent & 1) {
            result *= base;
        }
        base *= base;
        exponent >>= 1;
    }
    return result;
}

}  // namespace

std::size_t dictionary_size(std::size_t state_dim, int max_degree) {
    if (max_degree < 0) {
        return 0;
    }
    // C(n+p, p) built incrementally as prod_{i=1..p} (n+i)/i, exact at each step.
    std::size_t c = 1;
    for (int i = 1; i <= max_degree; ++i) {
        const std::size_t num = state_dim + static_cast<std::size_t>(i);
        if (c > std::numeric_limits<std::size_t>::max() / num) {
            return std::numeric_limits<std::size_t>::max();
        }
        c = c * num / static_cast<std::size_t>(i);
    }
    return c;
}

Dictionary::Dictionary(std::size_t state_dim, int max_degree, std::vector<MultiIndex> entries)
    : state_dim_(state_dim), max_degree_(max_degree), entries_(std::move(entries)) {}

Dictionary Dictionary::build(std::size_t state_dim, int max_degree, std::size_t size_cap) {
    if (state_dim < 1) {
        throw std::invalid_argument("dictionary needs at least one state variable");
    }
    if (max_degree < 0) {
        throw std::invalid_argument("dictionary degree must be non-negative");
    }
    const std::size_t expected = dictionary_size(state_dim, max_degree);
    if (expected > size_cap) {
        throw std::length_error("dictionary size " + std::to_string(expected) +
                                " exceeds the cap of " + std::to_string(size_cap));
    }
    std::vector<MultiIndex> entries;
    entries.reserve(expected);
    MultiIndex current(state_dim, 0);
    for (int degree = 0; degree <= max_degree; ++degree) {
        enumerate_degree(0, degree, current, entries);
    }
    return Dictionary(state_dim, max_degree, std::move(entries));
}

std::size_t Dictionary::linear_index(std::size_t variable) const {
    if (max_degree_ < 1 || variable >= state_dim_) {
        throw std::out_of_range("dictionary has no degree-1 entry for this variable");
    }
    return 1 + variable;
}

std::size_t Dictionary::find(const MultiIndex& exponents) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i] == exponents) {
            return i;
        }
    }
    return entries_.size();
}

void Dictionary::evaluate_into(std::span<const double> state, Eigen::Ref<Vector> out) const {
    for (std::size_t d = 0; d < entries_.size(); ++d) {
        double v = 1.0;
        const MultiIndex& e = entries_[d];
        for (std::size_t k = 0; k < state_dim_; ++k) {
            if (e[k] != 0) {
                v *= int_pow(state[k], e[k]);
            }
        }
        out[static_cast<Eigen::Index>(d)] = v;
    }
}

Vector Dictionary::evaluate(std::span<const double> state) const {
    if (state.size() != state_dim_) {
        throw std::invalid_argument("state dimension does not match the dictionary");
    }
    for (double v : state) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("dictionary evaluated at a non-finite state");
        }
    }
    Vector out(static_cast<Eigen::Index>(entries_.size()));
    evaluate_into(state, out);
    for (Eigen::Index d = 0; d < out.size(); ++d) {
        if (!std::isfinite(out[d])) {
            throw NumericalError("dictionary entry " + std::to_string(d) + " overflowed",
                                 static_cast<std::size_t>(d));
        }
    }
    return out;
}

Vector Dictionary::evaluate(const cartpole::State& state) const {
    const auto a = state.as_array();
    return evaluate(std::span<const double>(a.data(), a.size()));
}

std::uint64_t Dictionary::hash() const {
    Fnv1a h;
    h.add(static_cast<std::uint64_t>(state_dim_));
    h.add(static_cast<std::uint64_t>(max_degree_));
    for (const MultiIndex& e : entries_) {
        for (int v : e) {
            h.add(static_cast<std::uint64_t>(v));
        }
    }
    return h.value();
}

nlohmann::json Dictionary::to_json() const {
    return {{"state_dim", state_dim_}, {"max_degree", max_degree_}, {"entries", entries_}};
}

Dictionary Dictionary::from_json(const nlohmann::json& j) {
    const auto state_dim = j.at("state_dim").get<std::size_t>();
    const auto max_degree = j.at("max_degree").get<int>();
    auto entries = j.at("entries").get<std::vector<MultiIndex>>();
    Dictionary rebuilt = build(state_dim, max_degree);
    if (rebuilt.entries_ != entries) {
        throw std::runtime_error("serialized dictionary entries do not match their header");
    }
    return rebuilt;
}

std::string hex_hash(std::uint64_t h) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kDigits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace koopclust
