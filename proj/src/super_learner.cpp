#include "super_learner.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "rng.hpp"

namespace rctadjust {

namespace {

Matrix subset_rows(const Matrix& X, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), X.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < X.cols(); ++j) out(r, j) = X(rows[r], j);
  }
  return out;
}

}  // namespace

SuperLearnerFit discrete_super_learner(
    const std::vector<LearnerSpec>& candidates, const Matrix& X,
    std::span<const double> y, std::size_t v, std::uint64_t seed) {
  if (candidates.empty()) {
    throw_invalid("super learner needs at least one candidate");
  }
  for (const auto& spec : candidates) validate_learner_spec(spec);
  const std::size_t n = X.rows();
  if (X.rows() != y.size()) {
    throw_invalid("super learner: feature rows and response length differ");
  }
  if (v < 2) throw_invalid("super learner requires v >= 2");
  if (n < 2 * v) {
    throw_invalid("super learner requires at least 2v rows (n=" +
                  std::to_string(n) + ", v=" + std::to_string(v) + ")");
  }

  const auto fold_of = seeded_folds(n, v, Rng::derive_seed(seed, 0xCF));

  SuperLearnerFit result;
  result.table.entries.reserve(candidates.size());
  const double infinity = std::numeric_limits<double>::infinity();

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const LearnerSpec& spec = candidates[c];
    const std::uint64_t candidate_seed = Rng::derive_seed(seed, c);
    double sse = 0.0;
    bool failed = false;
    for (std::size_t f = 0; f < v && !failed; ++f) {
      std::vector<std::size_t> train;
      std::vector<std::size_t> heldout;
      train.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        (fold_of[i] == f ? heldout : train).push_back(i);
      }
      try {
        const Matrix Xt = subset_rows(X, train);
        std::vector<double> yt(train.size());
        for (std::size_t r = 0; r < train.size(); ++r) yt[r] = y[train[r]];
        const auto model =
            fit_model(spec, Xt, yt, Rng::derive_seed(candidate_seed, f));
        for (const std::size_t i : heldout) {
          const double pred = model->predict(X.row(i));
          if (!std::isfinite(pred)) {
            failed = true;
            break;
          }
          const double e = y[i] - pred;
          sse += e * e;
        }
      } catch (const Error&) {
        failed = true;
      }
    }
    result.table.entries.push_back(
        {spec, failed ? infinity : sse / static_cast<double>(n)});
  }

  std::size_t best = 0;
  double best_mse = infinity;
  for (std::size_t c = 0; c < result.table.entries.size(); ++c) {
    const double mse = result.table.entries[c].cv_mse;
    if (mse < best_mse) {
      best_mse = mse;
      best = c;
    }
  }
  if (!std::isfinite(best_mse)) {
    throw Error(ErrorCode::Estimation,
                "super learner: every candidate failed cross-validation");
  }

  result.table.selected = best;
  result.model =
      fit_model(candidates[best], X, y,
                Rng::derive_seed(Rng::derive_seed(seed, best), 0xF17));
  return result;
}

}  // namespace rctadjust
