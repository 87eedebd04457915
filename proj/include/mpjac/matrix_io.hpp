#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mpjac/core.hpp"

namespace mpjac {

/// Text format: first line "n m", then n lines of m space-separated decimal
/// floats printed with 17 significant digits (round-trip exact for binary64).
inline void write_matrix(std::ostream& os, const Matrix<double>& a) {
  os << a.rows() << ' ' << a.cols() << '\n';
  char buf[64];
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      if (j) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

inline void write_matrix_file(const std::string& path, const Matrix<double>& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_matrix(os, a);
  if (!os) throw std::runtime_error("write failed: " + path);
}

inline Matrix<double> read_matrix(std::istream& is) {
  Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows <= 0 || cols <= 0)
    throw std::runtime_error("matrix file: bad header (expected \"n m\")");
  Matrix<double> a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      if (!(is >> a(i, j)))
        throw std::runtime_error("matrix file: truncated at row " +
                                 std::to_string(i + 1));
  return a;
}

inline Matrix<double> read_matrix_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_matrix(is);
}

inline SymMatrix<double> read_sym_matrix_file(const std::string& path) {
  return SymMatrix<double>(read_matrix_file(path));
}

}  // namespace mpjac
