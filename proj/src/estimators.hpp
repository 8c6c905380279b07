#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cross_fit.hpp"
#include "dataset.hpp"
#include "learners.hpp"

namespace rctadjust {

/// One estimator run: the average-treatment-effect point estimate with its
/// arm-mean components, influence-function standard error, normal-theory
/// confidence interval, and two-sided p-value against a zero effect.
struct EstimateResult {
  std::string estimator;
  double psi_hat = 0.0;
  double psi1_hat = 0.0;
  double psi0_hat = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double p_value = 1.0;
  double alpha = 0.05;
  /// Numeric diagnostics (e.g. epsilon_star, treatment_coefficient).
  std::map<std::string, double> diagnostics;
  /// Textual diagnostics (e.g. selected_learner, dropped_columns).
  std::map<std::string, std::string> notes;
  /// Per-row influence values phi1_i - phi0_i whose sample second moment
  /// yields the variance estimate.
  std::vector<double> influence;
};

/// Flat JSON rendering: estimator, point estimate, arm means, se, CI,
/// p-value, alpha, and a merged diagnostics object.
std::string to_json(const EstimateResult& result);

/// Outcome-regression predictions evaluated under both arms for every row.
struct ArmPredictions {
  std::vector<double> at_treated;  // mu(1, W_i)
  std::vector<double> at_control;  // mu(0, W_i)

  double observed(std::size_t i, double a) const {
    return a == 1.0 ? at_treated[i] : at_control[i];
  }
};

/// An outcome regression as a callable: mu(a, w) with w a raw covariate row.
using MuFn = std::function<double(double, std::span<const double>)>;

/// Evaluates mu at both arms for every row; throws Error(Estimation) naming
/// the row when a prediction is non-finite.
ArmPredictions evaluate_mu(const MuFn& mu, const TrialDataset& data);

struct PluginAte {
  double psi1 = 0.0;
  double psi0 = 0.0;
  double psi = 0.0;
};

/// Plug-in arm means: psi_a = (1/n) sum_i mu(a, W_i) over ALL rows,
/// psi = psi1 - psi0.
PluginAte plugin_ate(const ArmPredictions& preds);
PluginAte plugin_ate(const MuFn& mu, const TrialDataset& data);

struct IfVariance {
  double sigma_inf_sq = 0.0;         // (1/n) sum (phi1_i - phi0_i)^2
  double se = 0.0;                   // sqrt(sigma_inf_sq / n)
  std::vector<double> influence;     // phi1_i - phi0_i per row
};

/// Influence-function variance with known randomization probabilities:
/// phi_a(W_i,A_i,Y_i) = 1{A_i=a}/pi_a * (Y_i - mu(a,W_i)) + mu(a,W_i) - psi_a.
IfVariance if_variance(const ArmPredictions& preds, const TrialDataset& data,
                       double psi1_hat, double psi0_hat);

/// Difference of observed arm means with the influence-function SE obtained
/// by treating the arm means themselves as the outcome regression.
EstimateResult unadjusted_estimate(const TrialDataset& data,
                                   double alpha = 0.05);

/// Linear-model plug-in: OLS on the requested design (collinear columns
/// dropped with a diagnostic), counterfactual predictions from the
/// treatment-forced designs, influence-function SE.
EstimateResult ancova_estimate(const TrialDataset& data, const DesignSpec& spec,
                               double alpha = 0.05);

/// Learner/cross-validation knobs shared by the adaptive estimators.
struct AdjustConfig {
  std::vector<LearnerSpec> candidates = default_candidate_library();
  std::size_t sl_folds = 10;  // folds for discrete super-learner selection
  std::uint64_t seed = 0;     // base seed for all learner randomness
};

struct PrognosticOptions {
  /// Keep the raw covariate main effects alongside the historical score;
  /// the default adjusts for the score alone.
  bool include_raw_covariates = false;
};

/// Fits the discrete super learner to historical control data (W -> Y),
/// scores every trial row, and adjusts for the score in the linear plug-in
/// (optionally alongside the raw covariates).
EstimateResult prognostic_adjust_estimate(const TrialDataset& trial,
                                          const HistoricalDataset& historical,
                                          const AdjustConfig& config,
                                          const PrognosticOptions& options = {},
                                          double alpha = 0.05);

/// Closed-form fluctuation size: the least-squares / maximum-likelihood
/// solution of the one-parameter update along the +/-1 treatment direction,
/// epsilon* = (1/n)[(n1*mean(Y|A=1) - n0*mean(Y|A=0))
///                  - (sum_{A=1} mu(1,W) - sum_{A=0} mu(0,W))].
double tmle_epsilon(const ArmPredictions& preds, const TrialDataset& data);
double tmle_epsilon(const MuFn& mu, const TrialDataset& data);

enum class TmleSubmodel {
  AdditiveEps,        // mu*(a,w) = mu(a,w) + eps * (2a-1)
  LinearFluctuation,  // mu* = OLS fit of Y on [1, 2A-1, W, mu(A,W)]
};

/// Picks the default submodel for a realized sample: the additive update
/// when the arms are exactly balanced, the linear fluctuation otherwise.
/// `force_additive` overrides the balance check.
TmleSubmodel resolve_tmle_submodel(const TrialDataset& data,
                                   bool force_additive = false);

/// One targeting step applied to cross-fitted predictions, with the fitted
/// update parameters exposed. After the update the treatment-signed mean
/// residual (i.e. tmle_epsilon of `updated`) vanishes.
struct TmleUpdate {
  ArmPredictions updated;
  double epsilon_star = 0.0;               // additive submodel
  std::vector<double> beta;                // linear submodel coefficients
  std::vector<std::string> design_labels;  // linear submodel column labels
  std::vector<std::size_t> dropped_columns;
  std::size_t treatment_column = 0;        // linear submodel positions
  std::size_t score_column = 0;
};

TmleUpdate tmle_update(const TrialDataset& data, const CrossFitResult& mu,
                       TmleSubmodel submodel);

/// Targeted update of cross-fitted outcome predictions followed by the
/// plug-in and influence-function SE. `estimator_name` labels the result.
EstimateResult tmle_from_mu(const TrialDataset& data, const CrossFitResult& mu,
                            TmleSubmodel submodel, double alpha = 0.05,
                            const std::string& estimator_name = "tmle");

/// Cross-fits the super learner on (A, W) -> Y, then targets per `submodel`.
EstimateResult tmle_estimate(const TrialDataset& data,
                             const AdjustConfig& config,
                             const CrossFitPlan& plan, TmleSubmodel submodel,
                             double alpha = 0.05,
                             const std::string& estimator_name = "tmle");

struct WithinTrialOptions {
  /// Keep the raw covariate main effects alongside the score column
  /// (default); false adjusts for the score alone.
  bool include_raw_covariates = true;
};

/// Adjusts for cross-fitted own-trial outcome predictions as an extra design
/// column (with its treatment-forced values used in the counterfactual
/// designs).
EstimateResult within_trial_from_scores(const TrialDataset& data,
                                        const CrossFitResult& scores,
                                        const WithinTrialOptions& options = {},
                                        double alpha = 0.05);

/// Cross-fits the super learner on the trial itself, then adjusts for the
/// resulting predictions.
EstimateResult within_trial_estimate(const TrialDataset& data,
                                     const AdjustConfig& config,
                                     const CrossFitPlan& plan,
                                     const WithinTrialOptions& options = {},
                                     double alpha = 0.05);

/// Infeasible benchmark: linear adjustment for the true arm-wise conditional
/// mean columns carried by a simulated dataset.
EstimateResult oracle_adjust_estimate(const AugmentedTrialDataset& data,
                                      double alpha = 0.05);

}  // namespace rctadjust
