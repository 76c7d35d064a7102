#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptms::nn {

/// Raised when operand shapes are incompatible. The message names both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of doubles. Rows are batch items throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a·b
Matrix matmul(const Matrix& a, const Matrix& b);
/// aᵀ·b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a·bᵀ
Matrix matmul_nt(const Matrix& a, const Matrix& b);

/// Column sums, used for bias gradients.
std::vector<double> column_sums(const Matrix& m);

/// [a | b] along columns; row counts must match.
Matrix hconcat(const Matrix& a, const Matrix& b);
/// [a ; b] along rows; column counts must match.
Matrix vconcat(const Matrix& a, const Matrix& b);
/// Rows [begin, end).
Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t end);
/// Columns [begin, end).
Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t end);

void add_inplace(Matrix& dst, const Matrix& src);
void scale_inplace(Matrix& m, double factor);

bool all_finite(std::span<const double> values);

}  // namespace adaptms::nn
