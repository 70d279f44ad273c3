#pragma once

// Plain-text persistence for vectors and matrices.
//
//   vector: "n" on the first line, then n entries
//   matrix: "m n" on the first line, then m*n entries row by row
//
// Entries are written with 17 significant digits so that a write/read cycle
// reproduces every double exactly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "core.hpp"

namespace sparserec::io {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_vector(std::ostream& os, ConstVec x) {
    os << x.size() << '\n';
    for (std::size_t i = 0; i < x.size(); ++i) os << format_double(x[i]) << '\n';
}

inline void write_matrix(std::ostream& os, const DenseMatrix& A) {
    os << A.rows() << ' ' << A.cols() << '\n';
    for (std::size_t i = 0; i < A.rows(); ++i) {
        const auto r = A.row(i);
        for (std::size_t j = 0; j < A.cols(); ++j) {
            if (j) os << ' ';
            os << format_double(r[j]);
        }
        os << '\n';
    }
}

namespace detail {

inline std::size_t read_dim(std::istream& is, const char* what) {
    long long v = 0;
    if (!(is >> v) || v < 1) throw InvalidArgument(std::string("read: bad ") + what + " header");
    return static_cast<std::size_t>(v);
}

inline void read_entries(std::istream& is, MutVec out, const char* what) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(is >> out[i]))
            throw InvalidArgument(std::string("read: ") + what + " truncated at entry " + std::to_string(i));
    }
    std::string extra;
    if (is >> extra) throw InvalidArgument(std::string("read: trailing data in ") + what);
    require_finite(out, what);
}

}  // namespace detail

inline DenseVector read_vector(std::istream& is) {
    const std::size_t n = detail::read_dim(is, "vector");
    DenseVector x(n);
    detail::read_entries(is, x, "vector");
    return x;
}

inline DenseMatrix read_matrix(std::istream& is) {
    const std::size_t m = detail::read_dim(is, "matrix");
    const std::size_t n = detail::read_dim(is, "matrix");
    std::vector<double> data(m * n);
    detail::read_entries(is, data, "matrix");
    return DenseMatrix(m, n, std::move(data));
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open " + path);
    return in;
}

inline DenseVector load_vector(const std::string& path) {
    auto in = open_input(path);
    return read_vector(in);
}

inline DenseMatrix load_matrix(const std::string& path) {
    auto in = open_input(path);
    return read_matrix(in);
}

inline void save_vector(const std::string& path, ConstVec x) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_vector(out, x);
}

inline void save_matrix(const std::string& path, const DenseMatrix& A) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_matrix(out, A);
}

}  // namespace sparserec::io
