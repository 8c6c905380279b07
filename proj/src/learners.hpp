#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "matrix.hpp"

namespace rctadjust {

/// Identifies one candidate regression learner plus its hyperparameters.
/// Registered names: "mean", "ols", "ridge", "knn" (k), and "gbt-stumps"
/// (rounds, shrinkage). Unknown names or hyperparameter keys are rejected.
struct LearnerSpec {
  std::string name;
  std::map<std::string, double> hyperparameters;
};

/// A fitted supervised regressor over an explicit feature vector.
/// Implementations are immutable after fitting and safe to share across
/// threads; prediction is deterministic given the fitted state.
class FittedModel {
public:
  virtual ~FittedModel() = default;
  virtual double predict(std::span<const double> x) const = 0;
};

/// How a conditional-mean function maps (a, w) onto model features.
enum class FeatureMode {
  TreatmentAndCovariates,  // features are [a, w1..wp]
  CovariatesOnly,          // features are [w1..wp]; `a` is ignored
};

/// Evaluable conditional mean mu(a, w) with provenance: which learner
/// produced it and which rows it was trained on. Deterministic and defined
/// for a in {0,1} and any finite w.
class RegressionFn {
public:
  RegressionFn(std::shared_ptr<const FittedModel> model, FeatureMode mode,
               std::string learner_name,
               std::vector<std::size_t> training_rows);

  double predict(double a, std::span<const double> w) const;

  const std::string& learner_name() const noexcept { return learner_name_; }
  const std::vector<std::size_t>& training_rows() const noexcept {
    return training_rows_;
  }
  FeatureMode mode() const noexcept { return mode_; }

private:
  std::shared_ptr<const FittedModel> model_;
  FeatureMode mode_;
  std::string learner_name_;
  std::vector<std::size_t> training_rows_;
};

/// Factory signature for registered learners. `seed` drives any internal
/// cross-validation (ridge penalty search, boosting round selection) so fits
/// are reproducible.
using LearnerFactory = std::function<std::shared_ptr<const FittedModel>(
    const Matrix& X, std::span<const double> y, const LearnerSpec& spec,
    std::uint64_t seed)>;

/// Adds (or replaces) a learner under `name`. Intended for tests that need
/// instrumented learners; built-in names are pre-registered.
void register_learner(const std::string& name, LearnerFactory factory);

/// Throws Error(InvalidArgument) when the name is unknown or a
/// hyperparameter is missing/invalid for that learner.
void validate_learner_spec(const LearnerSpec& spec);

/// Fits one learner on explicit features. Pure: inputs are not mutated.
std::shared_ptr<const FittedModel> fit_model(const LearnerSpec& spec,
                                             const Matrix& X,
                                             std::span<const double> y,
                                             std::uint64_t seed = 0);

/// Fits one learner and wraps it as a conditional-mean function mu(a, w).
/// `features` must already be laid out per `mode`; `training_rows` is the
/// provenance recorded on the result.
RegressionFn fit_learner(const LearnerSpec& spec, const Matrix& features,
                         std::span<const double> y, FeatureMode mode,
                         std::vector<std::size_t> training_rows,
                         std::uint64_t seed = 0);

/// The default candidate library: mean-only, main-effects OLS,
/// ridge-penalized OLS (penalty chosen by nested CV), k-nearest-neighbors
/// with k = 5 and k = 10, and depth-1 gradient-boosted stumps (shrinkage
/// 0.1, up to 200 rounds with the round count chosen by internal CV).
std::vector<LearnerSpec> default_candidate_library();

/// Seeded permutation of 0..n-1 dealt into v near-equal folds; returns the
/// fold index of each row. Deterministic in (n, v, seed).
std::vector<std::size_t> seeded_folds(std::size_t n, std::size_t v,
                                      std::uint64_t seed);

}  // namespace rctadjust
