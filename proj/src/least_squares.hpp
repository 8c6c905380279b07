#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "matrix.hpp"

namespace rctadjust {

/// Ordinary least squares via Householder QR, processing columns strictly
/// left to right. When a column is (numerically) a linear combination of the
/// columns before it, throws SingularDesignError naming that column — the
/// later participant in the dependency — so callers can map it back to a
/// design term. The relative pivot cutoff is 1e-10 of the largest pivot
/// encountered so far.
std::vector<double> solve_least_squares(const Matrix& X,
                                        std::span<const double> y);

struct DroppingFit {
  /// Coefficients aligned with the original columns; dropped columns get 0,
  /// so X * beta remains well-defined on the original design.
  std::vector<double> beta;
  /// Original indices of columns removed to reach full rank, in the order
  /// they were detected.
  std::vector<std::size_t> dropped_columns;
};

/// Least squares that recovers from rank deficiency by removing each
/// offending column and retrying until the remaining design is full rank.
DroppingFit solve_least_squares_dropping(const Matrix& X,
                                         std::span<const double> y);

}  // namespace rctadjust
