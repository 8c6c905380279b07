#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "learners.hpp"

namespace rctadjust {

enum class CrossFitScheme {
  VFold,       // v folds from a seeded, arm-stratified permutation
  LeaveOneOut  // one fold per row
};

/// A concrete fold assignment for cross-fitted prediction on a trial.
struct CrossFitPlan {
  CrossFitScheme scheme = CrossFitScheme::VFold;
  std::size_t v = 10;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;  // row -> fold index

  std::size_t fold_count() const noexcept { return v; }
};

/// Builds the fold assignment. V-fold assignment shuffles each arm with a
/// seeded permutation and deals the arms round-robin, so every fold holds
/// both arms; requires 2 <= v <= min(arm sizes). Leave-one-out assigns each
/// row its own fold.
CrossFitPlan make_cross_fit_plan(const TrialDataset& data,
                                 CrossFitScheme scheme, std::size_t v,
                                 std::uint64_t seed);

/// Cross-fitted conditional-mean predictions. Row i's predictions come from
/// a fit that excluded row i's entire fold. `observed[i]` is the prediction
/// at the realized treatment (it always equals at_treated[i] or
/// at_control[i] according to a_i); the pair fields give both-arm
/// counterfactual predictions for every row.
struct CrossFitResult {
  std::vector<double> at_treated;
  std::vector<double> at_control;
  std::vector<double> observed;
  std::vector<std::size_t> fold_of;
  std::vector<std::string> fold_winners;  // learner selected per fold
  std::vector<std::vector<std::size_t>> fold_training_rows;
};

/// Fits the candidate set per fold — via a discrete super learner when
/// there are multiple candidates (selection v = sl_v, shrunk to fit small
/// training sets), or a direct fit when there is exactly one — regressing
/// the outcome on (treatment, covariates) jointly, and returns held-out
/// predictions for every row at both arms and at the realized arm.
CrossFitResult cross_fit_predict(const std::vector<LearnerSpec>& candidates,
                                 const TrialDataset& data,
                                 const CrossFitPlan& plan,
                                 std::size_t sl_v = 10);

}  // namespace rctadjust
