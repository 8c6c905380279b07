#include "least_squares.hpp"

#include <cmath>
#include <numeric>

#include "error.hpp"

namespace rctadjust {

namespace {

constexpr double kRelativePivotTolerance = 1e-10;

}  // namespace

std::vector<double> solve_least_squares(const Matrix& X,
                                        std::span<const double> y) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols();
  if (p == 0) throw_invalid("design matrix has no columns");
  if (n == 0) throw_invalid("design matrix has no rows");
  if (y.size() != n) {
    throw_invalid("response length must match design row count");
  }

  Matrix A = X;
  std::vector<double> b(y.begin(), y.end());
  double largest_pivot = 0.0;

  for (std::size_t k = 0; k < p; ++k) {
    // Householder reflection zeroing column k below the diagonal.
    double sumsq = 0.0;
    for (std::size_t i = k; i < n; ++i) sumsq += A(i, k) * A(i, k);
    const double pivot = std::sqrt(sumsq);
    if (pivot == 0.0 || pivot < kRelativePivotTolerance * largest_pivot) {
      throw SingularDesignError(
          k, "design column " + std::to_string(k) +
                 " is linearly dependent on earlier columns");
    }
    largest_pivot = std::max(largest_pivot, pivot);

    const double alpha = A(k, k) >= 0.0 ? -pivot : pivot;
    std::vector<double> v(n - k);
    v[0] = A(k, k) - alpha;
    for (std::size_t i = k + 1; i < n; ++i) v[i - k] = A(i, k);
    double vnorm2 = 0.0;
    for (const double vi : v) vnorm2 += vi * vi;
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < p; ++j) {
        double dot = 0.0;
        for (std::size_t i = k; i < n; ++i) dot += v[i - k] * A(i, j);
        const double scale = 2.0 * dot / vnorm2;
        for (std::size_t i = k; i < n; ++i) A(i, j) -= scale * v[i - k];
      }
      double dot = 0.0;
      for (std::size_t i = k; i < n; ++i) dot += v[i - k] * b[i];
      const double scale = 2.0 * dot / vnorm2;
      for (std::size_t i = k; i < n; ++i) b[i] -= scale * v[i - k];
    }
    A(k, k) = alpha;
  }

  std::vector<double> beta(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double value = b[k];
    for (std::size_t j = k + 1; j < p; ++j) value -= A(k, j) * beta[j];
    beta[k] = value / A(k, k);
  }
  return beta;
}

DroppingFit solve_least_squares_dropping(const Matrix& X,
                                         std::span<const double> y) {
  std::vector<std::size_t> kept(X.cols());
  std::iota(kept.begin(), kept.end(), std::size_t{0});
  Matrix work = X;
  std::vector<std::size_t> dropped;

  for (;;) {
    try {
      const std::vector<double> beta = solve_least_squares(work, y);
      std::vector<double> full(X.cols(), 0.0);
      for (std::size_t i = 0; i < kept.size(); ++i) full[kept[i]] = beta[i];
      return {std::move(full), std::move(dropped)};
    } catch (const SingularDesignError& err) {
      if (work.cols() <= 1) throw;
      const std::size_t local = err.column();
      dropped.push_back(kept[local]);
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(local));
      work = work.without_column(local);
    }
  }
}

}  // namespace rctadjust
