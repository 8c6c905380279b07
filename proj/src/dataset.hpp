#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "matrix.hpp"

namespace rctadjust {

/// Two-arm randomized trial sample: covariates W (n x p), treatment a in
/// {0,1}, outcome y, and the known randomization probability P(A=1).
struct TrialDataset {
  Matrix w;
  std::vector<double> a;
  std::vector<double> y;
  double pi1 = 0.5;

  std::size_t n() const noexcept { return y.size(); }
  std::size_t p() const noexcept { return w.cols(); }
  std::size_t arm_count(double arm) const;

  /// Enforces structural invariants: matching lengths, binary treatment,
  /// pi1 in (0,1), at least four rows with both arms represented, finite
  /// entries. Throws Error(InvalidArgument) on violation.
  void validate() const;
};

/// External control-arm sample: covariates and outcomes only (every unit is
/// untreated).
struct HistoricalDataset {
  Matrix w;
  std::vector<double> y;

  std::size_t n() const noexcept { return y.size(); }
  std::size_t p() const noexcept { return w.cols(); }

  void validate() const;
};

/// Simulated trial carrying the latent quantities alongside the observables:
/// the unobserved covariate, both potential outcomes, and the true arm-wise
/// conditional means per row.
struct AugmentedTrialDataset {
  TrialDataset trial;
  std::vector<double> u;
  std::vector<double> y0;
  std::vector<double> y1;
  std::vector<double> m0;
  std::vector<double> m1;

  std::size_t n() const noexcept { return trial.n(); }

  /// Checks trial invariants plus exact consistency
  /// y = a*y1 + (1-a)*y0 on every row.
  void validate() const;
};

/// Appended prognostic-score column for a design. `observed` holds the score
/// evaluated at each unit's realized treatment. When the score itself depends
/// on treatment, `at_treated` / `at_control` supply its value with treatment
/// forced to 1 / 0 so counterfactual designs can substitute consistently;
/// when absent the column is treated as treatment-free and copied as-is.
struct ScoreColumn {
  std::vector<double> observed;
  std::optional<std::vector<double>> at_treated;
  std::optional<std::vector<double>> at_control;
};

enum class TreatmentCoding {
  ZeroOne,    // A in {0, 1}
  PlusMinus,  // A± = 2A - 1 in {-1, +1}
};

/// Recipe for assembling a regression design matrix from a trial sample.
/// Column order of the result: [intercept?, treatment, covariates...,
/// score?, interactions...].
struct DesignSpec {
  bool include_intercept = true;
  TreatmentCoding treatment_coding = TreatmentCoding::ZeroOne;
  std::vector<std::size_t> covariate_columns;
  bool center_covariates = false;
  std::optional<ScoreColumn> score;
  bool interactions = false;
};

}  // namespace rctadjust
