#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace rctadjust {

/// Dense row-major matrix of doubles. Minimal surface: storage, element
/// access, and the few whole-matrix helpers the regression code needs.
class Matrix {
public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw_invalid("matrix storage size does not match rows*cols");
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_.data() + i * cols_, cols_);
  }
  std::span<double> row(std::size_t i) {
    return std::span<double>(values_.data() + i * cols_, cols_);
  }

  const std::vector<double>& values() const noexcept { return values_; }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> v);

  /// Mean of column j over all rows.
  double column_mean(std::size_t j) const;

  /// y = M x (x has cols() entries).
  std::vector<double> multiply(std::span<const double> x) const;

  /// New matrix without column j.
  Matrix without_column(std::size_t j) const;

  /// New matrix with the given column appended on the right.
  Matrix with_column(std::span<const double> v) const;

  /// True when every stored entry is finite.
  bool all_finite() const noexcept;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

}  // namespace rctadjust
