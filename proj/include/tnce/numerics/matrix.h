#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace tnce {

// Dense row-major matrix of doubles. Desk-scale nets stay well under 1e5
// parameters, so there is no sparse or blocked path.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  std::size_t size() const { return data.size(); }

  // Throws NumericError if any entry is NaN/Inf; `name` goes in the message.
  void check_finite(const std::string& name) const;
};

std::string shape_string(const Matrix& m);

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

// y += x (shape-checked)
void add_inplace(Matrix& y, const Matrix& x);

// Column sums as a vector of length cols.
std::vector<double> column_sums(const Matrix& m);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace tnce
