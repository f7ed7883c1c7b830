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

#include "koopclust/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "koopclust/compress.hpp"
#include "koopclust/dictionary.hpp"
#include "koopclust/hash.hpp"

namespace koopclust {

namespace {

void reject_unknown(const nlohmann::json& given, const nlohmann::json& known, const std::string& path) {
    if (!given.is_object()) {
        return;
    }
    if (!known.is_object()) {
        throw ConfigError("config key '" + path + "' must not be an object");
    }
    for (const auto& [key, value] : given.items()) {
        const std::string child = path.empty() ? key : path + "." + key;
        if (!known.contains(key)) {
            throw ConfigError("unknown config key '" + child + "'");
        }
        reject_unknown(value, known.at(key), child);
    }
}

template <typename T>
T get(const nlohmann::json& doc, const char* section, const char* key) {
    const nlohmann::json& v = section ? doc.at(section).at(key) : doc.at(key);
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("config key '") + (section ? std::string(section) + "." : "") +
                          key + "' has the wrong type: " + v.dump());
    }
}

void check_ratios(const std::vector<double>& ratios, const char* key) {
    if (ratios.empty()) {
        throw ConfigError(std::string(key) + " must not be empty");
    }
    for (double r : ratios) {
        if (!(r > 0.0 && r <= 1.0)) {
            std::ostringstream os;
            os << key << " entry " << r << " outside (0, 1]";
            throw ConfigError(os.str());
        }
    }
}

}  // namespace

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json matched = nlohmann::json::array();
    for (const MemoryMatch& m : memory_matched) {
        matched.push_back({{"ratio", m.ratio}, {"rank", m.rank}});
    }
    return {
        {"cartpole",
         {{"cart_mass", cartpole.cart_mass},
          {"pole_mass", cartpole.pole_mass},
          {"pole_half_length", cartpole.pole_half_length},
          {"gravity", cartpole.gravity},
          {"force_magnitude", cartpole.force_magnitude},
          {"dt", cartpole.dt},
          {"horizon", cartpole.horizon},
          {"rate_gain", cartpole.rate_gain}}},
        {"dictionary", {{"state_dim", state_dim}, {"max_degree", max_degree}}},
        {"dataset",
         {{"n_train_traj", dataset.n_train_traj},
          {"n_eval_traj", dataset.n_eval_traj},
          {"seed", dataset.seed},
          {"eval_seed", dataset.eval_seed},
          {"noise", dataset.noise}}},
        {"edmd", {{"svd_tolerance", svd_tolerance}}},
        {"compress", {{"ratios", ratios}}},
        {"svd", {{"ranks", svd_ranks}}},
        {"evaluate", {{"horizon", horizon}, {"memory_matched", matched}}},
        {"bench",
         {{"ratios", bench.ratios},
          {"n_steps", bench.n_steps},
          {"warmup_steps", bench.warmup_steps},
          {"batches", bench.batches}}},
        {"out_dir", out_dir},
    };
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    nlohmann::json doc = ExperimentConfig{}.to_json();
    reject_unknown(j, doc, "");
    doc.merge_patch(j);

    ExperimentConfig c;
    c.cartpole.cart_mass = get<double>(doc, "cartpole", "cart_mass");
    c.cartpole.pole_mass = get<double>(doc, "cartpole", "pole_mass");
    c.cartpole.pole_half_length = get<double>(doc, "cartpole", "pole_half_length");
    c.cartpole.gravity = get<double>(doc, "cartpole", "gravity");
    c.cartpole.force_magnitude = get<double>(doc, "cartpole", "force_magnitude");
    c.cartpole.dt = get<double>(doc, "cartpole", "dt");
    c.cartpole.horizon = get<double>(doc, "cartpole", "horizon");
    c.cartpole.rate_gain = get<double>(doc, "cartpole", "rate_gain");
    c.state_dim = get<std::size_t>(doc, "dictionary", "state_dim");
    c.max_degree = get<std::size_t>(doc, "dictionary", "max_degree");
    c.dataset.n_train_traj = get<std::size_t>(doc, "dataset", "n_train_traj");
    c.dataset.n_eval_traj = get<std::size_t>(doc, "dataset", "n_eval_traj");
    c.dataset.seed = get<std::uint64_t>(doc, "dataset", "seed");
    c.dataset.eval_seed = get<std::uint64_t>(doc, "dataset", "eval_seed");
    c.dataset.noise = get<double>(doc, "dataset", "noise");
    c.svd_tolerance = get<double>(doc, "edmd", "svd_tolerance");
    c.ratios = get<std::vector<double>>(doc, "compress", "ratios");
    c.svd_ranks = get<std::vector<std::size_t>>(doc, "svd", "ranks");
    c.horizon = get<std::size_t>(doc, "evaluate", "horizon");
    c.memory_matched.clear();
    for (const auto& m : doc.at("evaluate").at("memory_matched")) {
        if (!m.is_object() || !m.contains("ratio") || !m.contains("rank")) {
            throw ConfigError("evaluate.memory_matched entries need 'ratio' and 'rank'");
        }
        c.memory_matched.push_back({get<double>(m, nullptr, "ratio"), get<std::size_t>(m, nullptr, "rank")});
    }
    c.bench.ratios = get<std::vector<double>>(doc, "bench", "ratios");
    c.bench.n_steps = get<std::size_t>(doc, "bench", "n_steps");
    c.bench.warmup_steps = get<std::size_t>(doc, "bench", "warmup_steps");
    c.bench.batches = get<std::size_t>(doc, "bench", "batches");
    c.out_dir = get<std::string>(doc, nullptr, "out_dir");
    return c;
}

void ExperimentConfig::validate() const {
    try {
        cartpole.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("cartpole: ") + e.what());
    }
    if (state_dim != cartpole::State::kDim) {
        throw ConfigError("dictionary.state_dim must be " + std::to_string(cartpole::State::kDim) +
                          " for cart-pole data");
    }
    if (max_degree < 1 || max_degree > 64) {
        throw ConfigError("dictionary.max_degree must lie in [1, 64]; degree 1 is needed to read the state back");
    }
    const std::size_t d = dictionary_dimension();
    if (dataset.n_train_traj < 1 || dataset.n_eval_traj < 1) {
        throw ConfigError("dataset.n_train_traj and dataset.n_eval_traj must be >= 1");
    }
    if (!std::isfinite(dataset.noise) || dataset.noise < 0.0) {
        throw ConfigError("dataset.noise must be finite and >= 0");
    }
    if (!(svd_tolerance >= 0.0 && svd_tolerance < 1.0)) {
        throw ConfigError("edmd.svd_tolerance must lie in [0, 1)");
    }
    check_ratios(ratios, "compress.ratios");
    check_ratios(bench.ratios, "bench.ratios");
    for (std::size_t r : svd_ranks) {
        if (r < 1 || r > d) {
            throw ConfigError("svd.ranks entry " + std::to_string(r) + " outside [1, " +
                              std::to_string(d) + "]");
        }
    }
    for (const MemoryMatch& m : memory_matched) {
        if (std::find(ratios.begin(), ratios.end(), m.ratio) == ratios.end() ||
            std::find(svd_ranks.begin(), svd_ranks.end(), m.rank) == svd_ranks.end()) {
            throw ConfigError("evaluate.memory_matched pairs must use a listed ratio and rank");
        }
    }
    if (horizon < 1 || horizon > cartpole.steps()) {
        throw ConfigError("evaluate.horizon must lie in [1, " + std::to_string(cartpole.steps()) + "]");
    }
    if (bench.n_steps < 1 || bench.batches < 1 || bench.batches > bench.n_steps) {
        throw ConfigError("bench needs n_steps >= batches >= 1");
    }
    if (out_dir.empty()) {
        throw ConfigError("out_dir must not be empty");
    }
}

std::size_t ExperimentConfig::dictionary_dimension() const {
    try {
        return dictionary_size(state_dim, max_degree);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("dictionary: ") + e.what());
    }
}

std::vector<std::pair<double, double>> ExperimentConfig::compressed_pairs() const {
    std::set<std::pair<double, double>> pairs;
    for (double r : ratios) {
        pairs.emplace(r, r);
    }
    for (double r : bench.ratios) {
        for (double c : bench.ratios) {
            pairs.emplace(r, c);
        }
    }
    return {pairs.rbegin(), pairs.rend()};
}

std::uint64_t ExperimentConfig::data_hash() const {
    const nlohmann::json j = to_json();
    Fnv1a h;
    h.add(j.at("cartpole").dump());
    h.add(j.at("dataset").dump());
    return h.value();
}

std::uint64_t ExperimentConfig::model_hash() const {
    const nlohmann::json j = to_json();
    Fnv1a h;
    h.add(data_hash());
    h.add(j.at("dictionary").dump());
    h.add(j.at("edmd").dump());
    return h.value();
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override must look like key.path=value, got '" + std::string(assignment) + "'");
    }
    const std::string path(assignment.substr(0, eq));
    const std::string text(assignment.substr(eq + 1));
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            throw ConfigError("empty key segment in '" + path + "'");
        }
        if (!node->is_object()) {
            *node = nlohmann::json::object();
        }
        node = &(*node)[key];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    *node = std::move(value);
}

}  // namespace koopclust
