#include "estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "design.hpp"
#include "error.hpp"
#include "least_squares.hpp"
#include "normal.hpp"
#include "super_learner.hpp"

namespace rctadjust {

namespace {

struct ArmCounts {
  std::size_t treated = 0;
  std::size_t control = 0;
};

ArmCounts require_both_arms(const TrialDataset& data) {
  ArmCounts counts{data.arm_count(1.0), data.arm_count(0.0)};
  if (counts.treated == 0 || counts.control == 0) {
    throw Error(ErrorCode::Estimation,
                "estimation requires both arms nonempty; got " +
                    std::to_string(counts.treated) + " treated and " +
                    std::to_string(counts.control) + " control rows");
  }
  return counts;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "alpha must lie strictly between 0 and 1");
  }
}

/// Fills CI / p-value fields from psi_hat and se; flags a zero-width CI.
void attach_inference(EstimateResult& r) {
  const double z = normal_quantile(1.0 - r.alpha / 2.0);
  if (r.se > 0.0) {
    r.ci_lower = r.psi_hat - z * r.se;
    r.ci_upper = r.psi_hat + z * r.se;
    const double t = std::fabs(r.psi_hat / r.se);
    r.p_value = std::erfc(t / std::sqrt(2.0));  // 2 * (1 - Phi(t))
  } else {
    r.ci_lower = r.psi_hat;
    r.ci_upper = r.psi_hat;
    r.p_value = r.psi_hat == 0.0 ? 1.0 : 0.0;
    r.notes["degenerate_ci"] = "true";
  }
}

EstimateResult finalize(std::string name, const TrialDataset& data,
                        const ArmPredictions& preds, double alpha) {
  check_alpha(alpha);
  const PluginAte pa = plugin_ate(preds);
  IfVariance iv = if_variance(preds, data, pa.psi1, pa.psi0);
  EstimateResult r;
  r.estimator = std::move(name);
  r.alpha = alpha;
  r.psi_hat = pa.psi;
  r.psi1_hat = pa.psi1;
  r.psi0_hat = pa.psi0;
  r.se = iv.se;
  r.influence = std::move(iv.influence);
  attach_inference(r);
  return r;
}

std::string join_labels(const std::vector<std::string>& labels,
                        const std::vector<std::size_t>& indices) {
  std::string out;
  for (const std::size_t j : indices) {
    if (!out.empty()) out += ";";
    out += j < labels.size() ? labels[j] : std::to_string(j);
  }
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& s : names) {
    if (!out.empty()) out += ";";
    out += s;
  }
  return out;
}

std::vector<std::size_t> all_covariates(const TrialDataset& data) {
  std::vector<std::size_t> cols(data.p());
  std::iota(cols.begin(), cols.end(), 0);
  return cols;
}

struct LinearPluginFit {
  BuiltDesign design;
  DroppingFit fit;
  ArmPredictions preds;
};

/// OLS on the requested design with collinear columns dropped, plus the
/// counterfactual predictions from the treatment-forced designs.
LinearPluginFit linear_plugin_fit(const TrialDataset& data,
                                  const DesignSpec& spec) {
  LinearPluginFit out{build_design(data, spec), {}, {}};
  out.fit = solve_least_squares_dropping(out.design.x, data.y);
  const auto [forced1, forced0] = counterfactual_designs(data, spec);
  out.preds.at_treated = forced1.x.multiply(out.fit.beta);
  out.preds.at_control = forced0.x.multiply(out.fit.beta);
  return out;
}

void attach_linear_diagnostics(EstimateResult& r, const LinearPluginFit& lp) {
  r.diagnostics["treatment_coefficient"] =
      lp.fit.beta[lp.design.treatment_column];
  if (!lp.fit.dropped_columns.empty()) {
    r.diagnostics["dropped_column_count"] =
        static_cast<double>(lp.fit.dropped_columns.size());
    r.notes["dropped_columns"] =
        join_labels(lp.design.labels, lp.fit.dropped_columns);
  }
}

std::size_t label_index(const BuiltDesign& design, const std::string& label) {
  const auto it =
      std::find(design.labels.begin(), design.labels.end(), label);
  return static_cast<std::size_t>(it - design.labels.begin());
}

ScoreColumn counterfactual_score(const CrossFitResult& mu) {
  ScoreColumn score;
  score.observed = mu.observed;
  score.at_treated = mu.at_treated;
  score.at_control = mu.at_control;
  return score;
}

CrossFitResult cross_fit_mu(const TrialDataset& data,
                            const AdjustConfig& config,
                            const CrossFitPlan& plan) {
  return cross_fit_predict(config.candidates, data, plan, config.sl_folds);
}

}  // namespace

std::string to_json(const EstimateResult& r) {
  nlohmann::json j;
  j["estimator"] = r.estimator;
  j["psi_hat"] = r.psi_hat;
  j["psi1_hat"] = r.psi1_hat;
  j["psi0_hat"] = r.psi0_hat;
  j["se"] = r.se;
  j["ci_lower"] = r.ci_lower;
  j["ci_upper"] = r.ci_upper;
  j["p_value"] = r.p_value;
  j["alpha"] = r.alpha;
  nlohmann::json diag = nlohmann::json::object();
  for (const auto& [key, value] : r.diagnostics) diag[key] = value;
  for (const auto& [key, value] : r.notes) diag[key] = value;
  j["diagnostics"] = std::move(diag);
  return j.dump(2);
}

ArmPredictions evaluate_mu(const MuFn& mu, const TrialDataset& data) {
  const std::size_t n = data.n();
  ArmPredictions preds;
  preds.at_treated.resize(n);
  preds.at_control.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    preds.at_treated[i] = mu(1.0, data.w.row(i));
    preds.at_control[i] = mu(0.0, data.w.row(i));
    if (!std::isfinite(preds.at_treated[i]) ||
        !std::isfinite(preds.at_control[i])) {
      throw Error(ErrorCode::Estimation,
                  "non-finite outcome prediction at row " + std::to_string(i));
    }
  }
  return preds;
}

PluginAte plugin_ate(const ArmPredictions& preds) {
  const std::size_t n = preds.at_treated.size();
  if (n == 0 || preds.at_control.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "arm predictions must be nonempty and of equal length");
  }
  PluginAte out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(preds.at_treated[i]) ||
        !std::isfinite(preds.at_control[i])) {
      throw Error(ErrorCode::Estimation,
                  "non-finite outcome prediction at row " + std::to_string(i));
    }
    out.psi1 += preds.at_treated[i];
    out.psi0 += preds.at_control[i];
  }
  out.psi1 /= static_cast<double>(n);
  out.psi0 /= static_cast<double>(n);
  out.psi = out.psi1 - out.psi0;
  return out;
}

PluginAte plugin_ate(const MuFn& mu, const TrialDataset& data) {
  return plugin_ate(evaluate_mu(mu, data));
}

IfVariance if_variance(const ArmPredictions& preds, const TrialDataset& data,
                       double psi1_hat, double psi0_hat) {
  const std::size_t n = data.n();
  if (preds.at_treated.size() != n || preds.at_control.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "arm predictions must cover every row exactly once");
  }
  const double pi1 = data.pi1;
  if (!(pi1 > 0.0 && pi1 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "treatment probability must lie strictly between 0 and 1");
  }
  const double pi0 = 1.0 - pi1;
  IfVariance out;
  out.influence.resize(n);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double mu1 = preds.at_treated[i];
    const double mu0 = preds.at_control[i];
    const double phi1 =
        (data.a[i] == 1.0 ? (data.y[i] - mu1) / pi1 : 0.0) + mu1 - psi1_hat;
    const double phi0 =
        (data.a[i] == 0.0 ? (data.y[i] - mu0) / pi0 : 0.0) + mu0 - psi0_hat;
    out.influence[i] = phi1 - phi0;
    sum_sq += out.influence[i] * out.influence[i];
  }
  out.sigma_inf_sq = sum_sq / static_cast<double>(n);
  out.se = std::sqrt(out.sigma_inf_sq / static_cast<double>(n));
  return out;
}

EstimateResult unadjusted_estimate(const TrialDataset& data, double alpha) {
  const ArmCounts counts = require_both_arms(data);
  data.validate();
  double sum1 = 0.0;
  double sum0 = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    (data.a[i] == 1.0 ? sum1 : sum0) += data.y[i];
  }
  const double mean1 = sum1 / static_cast<double>(counts.treated);
  const double mean0 = sum0 / static_cast<double>(counts.control);
  ArmPredictions preds;
  preds.at_treated.assign(data.n(), mean1);
  preds.at_control.assign(data.n(), mean0);
  return finalize("unadjusted", data, preds, alpha);
}

EstimateResult ancova_estimate(const TrialDataset& data, const DesignSpec& spec,
                               double alpha) {
  require_both_arms(data);
  data.validate();
  const LinearPluginFit lp = linear_plugin_fit(data, spec);
  EstimateResult r = finalize("ancova", data, lp.preds, alpha);
  attach_linear_diagnostics(r, lp);
  return r;
}

EstimateResult prognostic_adjust_estimate(const TrialDataset& trial,
                                          const HistoricalDataset& historical,
                                          const AdjustConfig& config,
                                          const PrognosticOptions& options,
                                          double alpha) {
  require_both_arms(trial);
  trial.validate();
  historical.validate();
  if (historical.p() != trial.p()) {
    throw Error(ErrorCode::InvalidArgument,
                "historical data has " + std::to_string(historical.p()) +
                    " covariates but the trial has " +
                    std::to_string(trial.p()));
  }
  const SuperLearnerFit sl =
      discrete_super_learner(config.candidates, historical.w, historical.y,
                             config.sl_folds, config.seed);
  ScoreColumn score;
  score.observed.resize(trial.n());
  for (std::size_t i = 0; i < trial.n(); ++i) {
    score.observed[i] = sl.model->predict(trial.w.row(i));
    if (!std::isfinite(score.observed[i])) {
      throw Error(ErrorCode::Estimation,
                  "non-finite historical score at row " + std::to_string(i));
    }
  }

  DesignSpec spec;
  if (options.include_raw_covariates) {
    spec.covariate_columns = all_covariates(trial);
  }
  spec.score = std::move(score);
  const LinearPluginFit lp = linear_plugin_fit(trial, spec);
  EstimateResult r = finalize("prog-historical", trial, lp.preds, alpha);
  attach_linear_diagnostics(r, lp);
  const CvEntry& winner = sl.table.entries[sl.table.selected];
  r.notes["selected_learner"] = winner.spec.name;
  r.diagnostics["selected_cv_mse"] = winner.cv_mse;
  const std::size_t score_col = label_index(lp.design, "score");
  if (score_col < lp.fit.beta.size()) {
    r.diagnostics["score_coefficient"] = lp.fit.beta[score_col];
  }
  return r;
}

double tmle_epsilon(const ArmPredictions& preds, const TrialDataset& data) {
  require_both_arms(data);
  double signed_residual_sum = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double residual = data.y[i] - preds.observed(i, data.a[i]);
    signed_residual_sum += data.a[i] == 1.0 ? residual : -residual;
  }
  return signed_residual_sum / static_cast<double>(data.n());
}

double tmle_epsilon(const MuFn& mu, const TrialDataset& data) {
  return tmle_epsilon(evaluate_mu(mu, data), data);
}

TmleSubmodel resolve_tmle_submodel(const TrialDataset& data,
                                   bool force_additive) {
  if (force_additive) return TmleSubmodel::AdditiveEps;
  return data.arm_count(1.0) == data.arm_count(0.0)
             ? TmleSubmodel::AdditiveEps
             : TmleSubmodel::LinearFluctuation;
}

TmleUpdate tmle_update(const TrialDataset& data, const CrossFitResult& mu,
                       TmleSubmodel submodel) {
  require_both_arms(data);
  const std::size_t n = data.n();
  if (mu.at_treated.size() != n || mu.at_control.size() != n ||
      mu.observed.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "cross-fitted predictions must cover every row");
  }

  TmleUpdate out;
  if (submodel == TmleSubmodel::AdditiveEps) {
    const ArmPredictions initial{mu.at_treated, mu.at_control};
    out.epsilon_star = tmle_epsilon(initial, data);
    out.updated.at_treated.resize(n);
    out.updated.at_control.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.updated.at_treated[i] = mu.at_treated[i] + out.epsilon_star;
      out.updated.at_control[i] = mu.at_control[i] - out.epsilon_star;
    }
    return out;
  }

  // Linear fluctuation: refit Y on [intercept, 2A-1, W, mu(A,W)] and use the
  // fitted linear function, with the prediction column switched to its
  // forced-arm values, as the updated outcome regression.
  DesignSpec spec;
  spec.treatment_coding = TreatmentCoding::PlusMinus;
  spec.covariate_columns = all_covariates(data);
  spec.score = counterfactual_score(mu);
  LinearPluginFit lp = linear_plugin_fit(data, spec);
  out.updated = std::move(lp.preds);
  out.beta = std::move(lp.fit.beta);
  out.design_labels = std::move(lp.design.labels);
  out.dropped_columns = std::move(lp.fit.dropped_columns);
  out.treatment_column = lp.design.treatment_column;
  out.score_column = static_cast<std::size_t>(
      std::find(out.design_labels.begin(), out.design_labels.end(), "score") -
      out.design_labels.begin());
  return out;
}

EstimateResult tmle_from_mu(const TrialDataset& data, const CrossFitResult& mu,
                            TmleSubmodel submodel, double alpha,
                            const std::string& estimator_name) {
  require_both_arms(data);
  data.validate();
  TmleUpdate update = tmle_update(data, mu, submodel);
  EstimateResult r = finalize(estimator_name, data, update.updated, alpha);
  if (submodel == TmleSubmodel::AdditiveEps) {
    r.diagnostics["epsilon_star"] = update.epsilon_star;
    r.notes["submodel"] = "additive-eps";
  } else {
    r.diagnostics["beta_treatment"] = update.beta[update.treatment_column];
    if (update.score_column < update.beta.size()) {
      r.diagnostics["beta_mu"] = update.beta[update.score_column];
    }
    if (!update.dropped_columns.empty()) {
      r.diagnostics["dropped_column_count"] =
          static_cast<double>(update.dropped_columns.size());
      r.notes["dropped_columns"] =
          join_labels(update.design_labels, update.dropped_columns);
    }
    r.notes["submodel"] = "linear-fluctuation";
  }
  if (!mu.fold_winners.empty()) {
    r.notes["fold_winners"] = join_names(mu.fold_winners);
  }
  return r;
}

EstimateResult tmle_estimate(const TrialDataset& data,
                             const AdjustConfig& config,
                             const CrossFitPlan& plan, TmleSubmodel submodel,
                             double alpha, const std::string& estimator_name) {
  return tmle_from_mu(data, cross_fit_mu(data, config, plan), submodel, alpha,
                      estimator_name);
}

EstimateResult within_trial_from_scores(const TrialDataset& data,
                                        const CrossFitResult& scores,
                                        const WithinTrialOptions& options,
                                        double alpha) {
  require_both_arms(data);
  data.validate();
  if (scores.observed.size() != data.n()) {
    throw Error(ErrorCode::InvalidArgument,
                "cross-fitted scores must cover every row");
  }
  DesignSpec spec;
  if (options.include_raw_covariates) {
    spec.covariate_columns = all_covariates(data);
  }
  spec.score = counterfactual_score(scores);
  const LinearPluginFit lp = linear_plugin_fit(data, spec);
  EstimateResult r = finalize("within-trial", data, lp.preds, alpha);
  attach_linear_diagnostics(r, lp);
  const std::size_t score_col = label_index(lp.design, "score");
  if (score_col < lp.fit.beta.size()) {
    r.diagnostics["score_coefficient"] = lp.fit.beta[score_col];
  }
  if (!scores.fold_winners.empty()) {
    r.notes["fold_winners"] = join_names(scores.fold_winners);
  }
  return r;
}

EstimateResult within_trial_estimate(const TrialDataset& data,
                                     const AdjustConfig& config,
                                     const CrossFitPlan& plan,
                                     const WithinTrialOptions& options,
                                     double alpha) {
  return within_trial_from_scores(data, cross_fit_mu(data, config, plan),
                                  options, alpha);
}

EstimateResult oracle_adjust_estimate(const AugmentedTrialDataset& data,
                                      double alpha) {
  data.validate();
  require_both_arms(data.trial);
  const std::size_t n = data.n();
  TrialDataset oracle;
  oracle.a = data.trial.a;
  oracle.y = data.trial.y;
  oracle.pi1 = data.trial.pi1;
  oracle.w = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    oracle.w(i, 0) = data.m1[i];
    oracle.w(i, 1) = data.m0[i];
  }
  oracle.validate();
  DesignSpec spec;
  spec.covariate_columns = {0, 1};
  const LinearPluginFit lp = linear_plugin_fit(oracle, spec);
  EstimateResult r = finalize("oracle", oracle, lp.preds, alpha);
  attach_linear_diagnostics(r, lp);
  return r;
}

}  // namespace rctadjust
