#include "matrix.hpp"

#include <cmath>

namespace rctadjust {

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> v) {
  if (v.size() != rows_) throw_invalid("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

double Matrix::column_mean(std::size_t j) const {
  if (rows_ == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j);
  return s / static_cast<double>(rows_);
}

std::vector<double> Matrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw_invalid("multiply: dimension mismatch");
  std::vector<double> y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = values_.data() + i * cols_;
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Matrix Matrix::without_column(std::size_t j) const {
  if (j >= cols_) throw_invalid("without_column: index out of range");
  Matrix out(rows_, cols_ - 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < cols_; ++k) {
      if (k == j) continue;
      out(i, c++) = (*this)(i, k);
    }
  }
  return out;
}

Matrix Matrix::with_column(std::span<const double> v) const {
  if (v.size() != rows_) throw_invalid("with_column: length mismatch");
  Matrix out(rows_, cols_ + 1);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = 0; k < cols_; ++k) out(i, k) = (*this)(i, k);
    out(i, cols_) = v[i];
  }
  return out;
}

bool Matrix::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace rctadjust
