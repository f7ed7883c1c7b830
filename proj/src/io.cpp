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

#include "koopclust/io.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace koopclust::io {

static_assert(std::endian::native == std::endian::little,
              "matrix files are defined as little-endian float64");

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor rm = m;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(rm.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(rm.size())));
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

Matrix read_matrix(const std::filesystem::path& path, Eigen::Index rows, Eigen::Index cols) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    const auto expected = static_cast<std::uintmax_t>(rows * cols) * sizeof(double);
    if (std::filesystem::file_size(path) != expected) {
        throw std::runtime_error(path.string() + " does not hold a " + std::to_string(rows) + "x" +
                                 std::to_string(cols) + " float64 matrix");
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(expected));
    if (!in) {
        throw std::runtime_error("failed reading " + path.string());
    }
    return rm;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return nlohmann::json::parse(in);
}

std::filesystem::path sidecar_path(const std::filesystem::path& bin_path) {
    auto p = bin_path;
    p.replace_extension(".json");
    return p;
}

}  // namespace koopclust::io
