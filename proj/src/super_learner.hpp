#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "learners.hpp"
#include "matrix.hpp"

namespace rctadjust {

/// One row of the cross-validation table: a candidate and its v-fold
/// cross-validated mean squared error (infinite when the candidate failed
/// on any fold or produced a non-finite prediction).
struct CvEntry {
  LearnerSpec spec;
  double cv_mse = 0.0;
};

struct CvTable {
  std::vector<CvEntry> entries;  // in candidate list order
  std::size_t selected = 0;      // index of the winning candidate
};

struct SuperLearnerFit {
  std::shared_ptr<const FittedModel> model;  // winner refit on all rows
  CvTable table;
};

/// Discrete super learner: scores every candidate by v-fold cross-validated
/// MSE (folds from a seeded permutation), selects the single lowest-MSE
/// candidate with ties broken by list order, and refits it on all rows.
/// Requires v >= 2 and n >= 2v; throws Error(Estimation) when every
/// candidate fails.
SuperLearnerFit discrete_super_learner(
    const std::vector<LearnerSpec>& candidates, const Matrix& X,
    std::span<const double> y, std::size_t v, std::uint64_t seed);

}  // namespace rctadjust
