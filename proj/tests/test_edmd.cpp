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

#include <filesystem>
#include <random>

#include "doctest.h"
#include "koopclust/edmd.hpp"
#include "oracles.hpp"

using namespace koopclust;
using cartpole::State;

namespace {

cartpole::SnapshotPairs random_linear_pairs(const Matrix& lambda, std::size_t s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    cartpole::SnapshotPairs pairs;
    for (std::size_t i = 0; i < s; ++i) {
        Eigen::Vector4d x(u(rng), u(rng), u(rng), u(rng));
        const Eigen::Vector4d y = lambda * x;
        pairs.before.push_back({x[0], x[1], x[2], x[3]});
        pairs.after.push_back({y[0], y[1], y[2], y[3]});
    }
    return pairs;
}

}  // namespace

TEST_CASE("data matrices hold dictionary columns in pair order") {
    const Dictionary d = Dictionary::build(4, 1);
    cartpole::SnapshotPairs one;
    one.before = {State{}};
    one.after = {State{1.0, 0.0, 0.0, 0.0}};
    const edmd::DataMatrices m = edmd::build_data_matrices(d, one);
    CHECK(m.psi_x1 == (Matrix(5, 1) << 1, 0, 0, 0, 0).finished());
    CHECK(m.psi_x2 == (Matrix(5, 1) << 1, 1, 0, 0, 0).finished());

    cartpole::SnapshotPairs dup = one;
    dup.before.push_back(State{0.5, 0.1, 0.2, 0.3});
    dup.after.push_back(State{0.4, 0.1, 0.2, 0.3});
    dup.before.push_back(dup.before[1]);
    dup.after.push_back(dup.after[1]);
    const Dictionary d3 = Dictionary::build(4, 3);
    const edmd::DataMatrices md = edmd::build_data_matrices(d3, dup);
    CHECK(md.psi_x1.rows() == 35);
    CHECK(md.samples() == 3);
    CHECK(md.psi_x1.col(1) == md.psi_x1.col(2));
    CHECK(md.psi_x2.col(1) == md.psi_x2.col(2));

    CHECK_THROWS_AS(edmd::build_data_matrices(d, cartpole::SnapshotPairs{}), std::invalid_argument);
    cartpole::SnapshotPairs bad;
    bad.before = {State{1e40, 0, 0, 0}};
    bad.after = {State{}};
    try {
        edmd::build_data_matrices(Dictionary::build(4, 10), bad);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.index() == 0);
        CHECK(std::string(e.what()).find("entry") != std::string::npos);
    }
}

TEST_CASE("invertible square data reproduces Psi2 Psi1^-1") {
    std::mt19937_64 rng(21);
    edmd::DataMatrices data{oracle::random_matrix(rng, 6, 6), oracle::random_matrix(rng, 6, 6)};
    const Matrix expected = data.psi_x1.transpose().fullPivLu().solve(data.psi_x2.transpose()).transpose();
    const edmd::KoopmanMatrix km = edmd::estimate(data);
    CHECK((km.k - expected).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(edmd::residual(data, km.k) < 1e-10);
}

TEST_CASE("a linear system is recovered as the augmented map") {
    std::mt19937_64 rng(5);
    const Dictionary d = Dictionary::build(4, 1);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix lambda = oracle::random_matrix(rng, 4, 4);
        const auto pairs = random_linear_pairs(lambda, 15, rng);
        const edmd::KoopmanMatrix km = edmd::estimate(edmd::build_data_matrices(d, pairs));
        Matrix expected = Matrix::Zero(5, 5);
        expected(0, 0) = 1.0;
        expected.bottomRightCorner(4, 4) = lambda;
        CHECK((km.k - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("rank-deficient data matches a ridge normal-equation solve") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Dictionary d = Dictionary::build(4, 2);
    cartpole::SnapshotPairs pairs;
    for (int i = 0; i < 40; ++i) {
        // theta_dot == 0 zeroes every row involving it.
        pairs.before.push_back({u(rng), u(rng), u(rng), 0.0});
        pairs.after.push_back({u(rng), u(rng), u(rng), u(rng)});
    }
    pairs.before.push_back(pairs.before.front());
    pairs.after.push_back(pairs.after.back());
    const edmd::DataMatrices data = edmd::build_data_matrices(d, pairs);
    const edmd::KoopmanMatrix km = edmd::estimate(data);
    CHECK(km.k.allFinite());

    const Matrix& x1 = data.psi_x1;
    const Matrix gram = x1 * x1.transpose() + 1e-12 * Matrix::Identity(x1.rows(), x1.rows());
    const Matrix ridge = gram.ldlt().solve(x1 * data.psi_x2.transpose()).transpose();
    const double r_pinv = edmd::residual(data, km.k);
    const double r_ridge = edmd::residual(data, ridge);
    CHECK(r_pinv == doctest::Approx(r_ridge).epsilon(1e-8));
    // Columns acting on the zero rows are exactly zero in the minimum-norm solution.
    CHECK(km.k.col(d.linear_index(3)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("least-squares optimality, constant row and one-step skill on cart-pole data") {
    const Dictionary d = Dictionary::build(4, 3);
    const auto pairs = cartpole::generate_dataset(cartpole::Params{}, 5, 13);
    const edmd::DataMatrices data = edmd::build_data_matrices(d, pairs);
    const edmd::KoopmanMatrix km = edmd::estimate(data, 1e-10, d.hash());
    CHECK(km.dict_id == d.hash());
    CHECK(km.dimension() == 35);

    const double best = edmd::residual(data, km.k);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const Matrix m = km.k + 1e-4 * oracle::random_matrix(rng, 35, 35);
        CHECK(edmd::residual(data, m) >= best);
    }

    const Matrix pred = km.k * data.psi_x1;
    CHECK((pred.row(0).array() - 1.0).abs().maxCoeff() < 1e-8);

    const double mse_k = (data.psi_x2 - pred).squaredNorm();
    const double mse_id = (data.psi_x2 - data.psi_x1).squaredNorm();
    CHECK(mse_k <= mse_id);
}

TEST_CASE("the relative cutoff drops small singular directions") {
    edmd::DataMatrices data;
    data.psi_x1 = Matrix::Zero(2, 2);
    data.psi_x1(0, 0) = 1.0;
    data.psi_x1(1, 1) = 1e-6;
    data.psi_x2 = Matrix::Identity(2, 2);
    const Matrix full = edmd::estimate(data, 1e-10).k;
    CHECK(full(1, 1) == doctest::Approx(1e6));
    const Matrix cut = edmd::estimate(data, 1e-3).k;
    CHECK(cut(0, 0) == doctest::Approx(1.0));
    CHECK(cut(1, 1) == 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
    edmd::DataMatrices zero{Matrix::Zero(3, 4), Matrix::Ones(3, 4)};
    CHECK_THROWS_AS(edmd::estimate(zero), std::invalid_argument);
    edmd::DataMatrices empty{Matrix(3, 0), Matrix(3, 0)};
    CHECK_THROWS_AS(edmd::estimate(empty), std::invalid_argument);
    edmd::DataMatrices ok{Matrix::Identity(3, 3), Matrix::Identity(3, 3)};
    CHECK_THROWS_AS(edmd::estimate(ok, -1.0), std::invalid_argument);
}

TEST_CASE("rollout reads degree-1 entries and flags divergence") {
    const Dictionary d = Dictionary::build(4, 1);
    edmd::KoopmanMatrix id{Matrix::Identity(5, 5), d.hash(), 0.0};
    const State s{0.1, -0.2, 0.3, -0.4};
    const Rollout r = edmd::rollout(id, d, s, 10);
    REQUIRE(r.states.size() == 10);
    CHECK_FALSE(r.diverged_at.has_value());
    for (const State& t : r.states) {
        CHECK(t == s);
    }

    edmd::KoopmanMatrix grow{1e200 * Matrix::Identity(5, 5), d.hash(), 0.0};
    const Rollout g = edmd::rollout(grow, d, s, 10);
    REQUIRE(g.diverged_at.has_value());
    CHECK(*g.diverged_at == 2);
    CHECK(g.states.size() == 1);

    CHECK_THROWS(edmd::rollout(id, Dictionary::build(4, 2), s, 1));
}

TEST_CASE("binary and sidecar round-trip") {
    std::mt19937_64 rng(2);
    edmd::KoopmanMatrix km{oracle::random_matrix(rng, 7, 7), 0xdeadbeefcafef00dULL, 1e-7};
    const auto dir = std::filesystem::temp_directory_path() / "koopclust_test_edmd";
    std::filesystem::create_directories(dir);
    edmd::save(km, dir / "k.bin");
    const edmd::KoopmanMatrix back = edmd::load(dir / "k.bin");
    CHECK(back.k == km.k);
    CHECK(back.dict_id == km.dict_id);
    CHECK(back.svd_tolerance == km.svd_tolerance);
    CHECK(std::filesystem::file_size(dir / "k.bin") == 7 * 7 * sizeof(double));
    std::filesystem::remove_all(dir);
}
