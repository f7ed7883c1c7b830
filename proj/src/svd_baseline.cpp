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

#include "koopclust/svd_baseline.hpp"

#include <stdexcept>
#include <string>

#include "koopclust/io.hpp"

namespace koopclust::svd_baseline {

namespace {

void check_rank(std::size_t rank, Eigen::Index dimension) {
    if (rank < 1 || rank > static_cast<std::size_t>(dimension)) {
        throw std::out_of_range("rank " + std::to_string(rank) + " outside [1, " +
                                std::to_string(dimension) + "]");
    }
}

}  // namespace

Truncator::Truncator(const edmd::KoopmanMatrix& km) : dict_id_(km.dict_id) {
    if (km.k.rows() != km.k.cols() || km.k.rows() < 1) {
        throw std::invalid_argument("Koopman matrix must be square and non-empty");
    }
    Eigen::BDCSVD<Matrix> svd(km.k, Eigen::ComputeThinU | Eigen::ComputeThinV);
    u_ = svd.matrixU();
    sigma_ = svd.singularValues();
    v_ = svd.matrixV();
}

SvdFactors Truncator::truncate(std::size_t rank) const {
    check_rank(rank, u_.rows());
    const auto r = static_cast<Eigen::Index>(rank);
    SvdFactors f;
    f.u_sigma = u_.leftCols(r) * sigma_.head(r).asDiagonal();
    f.v_t = v_.leftCols(r).transpose();
    f.dict_id = dict_id_;
    return f;
}

SvdFactors truncate(const edmd::KoopmanMatrix& km, std::size_t rank) {
    check_rank(rank, km.k.rows());
    return Truncator(km).truncate(rank);
}

SvdFactors truncate(const Matrix& k, std::size_t rank) {
    edmd::KoopmanMatrix km;
    km.k = k;
    return truncate(km, rank);
}

Rollout rollout_svd(const SvdFactors& f, const Dictionary& dict, const cartpole::State& initial,
                    std::size_t steps) {
    if (steps < 1) {
        throw std::invalid_argument("rollout needs at least one step");
    }
    if (f.dimension() != dict.size()) {
        throw std::invalid_argument("factor and dictionary sizes differ");
    }
    Vector coeff(f.v_t.rows());
    return iterate_linear(
        dict.evaluate(initial), steps,
        [&](const Vector& in, Vector& out) {
            coeff.noalias() = f.v_t * in;
            out.noalias() = f.u_sigma * coeff;
        },
        [](const Vector& v) { return read_linear(v); });
}

std::size_t element_count(std::size_t dimension, std::size_t rank) {
    return 2 * dimension * rank;
}

void save(const SvdFactors& f, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    io::write_matrix(dir / "u_sigma.bin", f.u_sigma);
    io::write_matrix(dir / "v_t.bin", f.v_t);
    io::write_json(dir / "svd.json", {{"dimension", f.dimension()},
                                      {"rank", f.rank()},
                                      {"dictionary_hash", hex_hash(f.dict_id)}});
}

SvdFactors load(const std::filesystem::path& dir) {
    const auto meta = io::read_json(dir / "svd.json");
    const auto d = meta.at("dimension").get<Eigen::Index>();
    const auto r = meta.at("rank").get<Eigen::Index>();
    SvdFactors f;
    f.u_sigma = io::read_matrix(dir / "u_sigma.bin", d, r);
    f.v_t = io::read_matrix(dir / "v_t.bin", r, d);
    f.dict_id = std::stoull(meta.at("dictionary_hash").get<std::string>(), nullptr, 16);
    return f;
}

}  // namespace koopclust::svd_baseline
