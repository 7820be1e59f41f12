// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "rmt/errors.hpp"

namespace rmt {

// Debug dump format: 16-byte header (magic "RMTM", u32 version, u32 p, u32 n)
// followed by row-major little-endian 64-bit floats. version 1 = real,
// version 2 = complex interleaved (re, im).

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "matrix_io assumes a little-endian host");

inline constexpr std::array<char, 4> matrix_magic = {'R', 'M', 'T', 'M'};

inline void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

inline std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

}  // namespace detail

template <typename Scalar>
void write_matrix(const std::string& path,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("write_matrix: cannot open " + path);
    out.write(detail::matrix_magic.data(), 4);
    constexpr bool complex = !std::is_same_v<Scalar, double>;
    detail::write_u32(out, complex ? 2u : 1u);
    detail::write_u32(out, static_cast<std::uint32_t>(m.rows()));
    detail::write_u32(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if constexpr (complex) {
                double re = m(i, j).real(), im = m(i, j).imag();
                out.write(reinterpret_cast<const char*>(&re), 8);
                out.write(reinterpret_cast<const char*>(&im), 8);
            } else {
                double v = m(i, j);
                out.write(reinterpret_cast<const char*>(&v), 8);
            }
        }
    if (!out) throw io_error("write_matrix: write failed for " + path);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("read_matrix: cannot open " + path);
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (!in || magic != detail::matrix_magic) throw schema_mismatch("read_matrix: bad magic in " + path);
    std::uint32_t version = detail::read_u32(in);
    constexpr bool complex = !std::is_same_v<Scalar, double>;
    if (version != (complex ? 2u : 1u)) throw schema_mismatch("read_matrix: version mismatch in " + path);
    std::uint32_t p = detail::read_u32(in), n = detail::read_u32(in);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(p, n);
    for (std::uint32_t i = 0; i < p; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            if constexpr (complex) {
                double re = 0, im = 0;
                in.read(reinterpret_cast<char*>(&re), 8);
                in.read(reinterpret_cast<char*>(&im), 8);
                m(i, j) = Scalar(re, im);
            } else {
                double v = 0;
                in.read(reinterpret_cast<char*>(&v), 8);
                m(i, j) = v;
            }
        }
    if (!in) throw schema_mismatch("read_matrix: truncated file " + path);
    return m;
}

}  // namespace rmt
