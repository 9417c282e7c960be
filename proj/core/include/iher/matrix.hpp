#pragma once

#include <cstddef>
#include <vector>

namespace iher {

// Dense row-major matrix of doubles. Rows index batch samples throughout
// the library, columns index feature dimensions.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  void set_row(int r, const std::vector<double>& v) {
    for (int c = 0; c < cols; ++c) (*this)(r, c) = v[c];
  }

  std::vector<double> row_vec(int r) const {
    return std::vector<double>(row(r), row(r) + cols);
  }
};

}  // namespace iher
