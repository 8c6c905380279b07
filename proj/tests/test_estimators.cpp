#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "cross_fit.hpp"
#include "csv.hpp"
#include "design.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "least_squares.hpp"
#include "normal.hpp"
#include "rng.hpp"

using namespace rctadjust;

namespace {

TrialDataset four_row_fixture() {
  return read_trial_csv(std::string(FIXTURE_DIR) + "/four_row.csv");
}

/// Synthetic nonlinear trial: three covariates, treatment-modified outcome.
TrialDataset nonlinear_trial(std::size_t n, std::uint64_t seed,
                             double noise_sd = 1.0) {
  Rng rng(seed);
  TrialDataset data;
  data.w = Matrix(n, 3);
  data.a.resize(n);
  data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.w(i, 0) = rng.uniform(-2.0, 1.0);
    data.w(i, 1) = rng.normal(0.0, 1.5);
    data.w(i, 2) = rng.exponential(0.8);
    data.a[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    const double base = 3.0 * std::sin(std::fabs(data.w(i, 0))) +
                        1.2 * (std::fabs(data.w(i, 1)) > 1.0 ? 1.0 : 0.0) +
                        0.8 * std::log1p(data.w(i, 2));
    data.y[i] = base + 0.9 * data.a[i] + rng.normal(0.0, noise_sd);
  }
  // Guarantee both arms for small n.
  data.a[0] = 1.0;
  data.a[1] = 0.0;
  return data;
}

CrossFitResult zero_mu(std::size_t n) {
  CrossFitResult mu;
  mu.at_treated.assign(n, 0.0);
  mu.at_control.assign(n, 0.0);
  mu.observed.assign(n, 0.0);
  return mu;
}

DesignSpec raw_covariate_spec(const TrialDataset& data) {
  DesignSpec spec;
  spec.covariate_columns.resize(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) spec.covariate_columns[j] = j;
  return spec;
}

}  // namespace

TEST_CASE("plug-in with constant arm functions") {
  const TrialDataset data = four_row_fixture();
  const MuFn mu = [](double a, std::span<const double>) {
    return a == 1.0 ? 5.0 : 3.0;
  };
  const PluginAte pa = plugin_ate(mu, data);
  CHECK(pa.psi1 == 5.0);
  CHECK(pa.psi0 == 3.0);
  CHECK(pa.psi == 2.0);
}

TEST_CASE("plug-in with a linear rule averages over everyone") {
  const TrialDataset data = four_row_fixture();  // w1 = (0,1,2,3)
  const MuFn mu = [](double a, std::span<const double> w) {
    return 2.0 * a + w[0];
  };
  const PluginAte pa = plugin_ate(mu, data);
  CHECK(pa.psi1 == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(pa.psi0 == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(pa.psi == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("non-finite predictions are rejected with the row index") {
  const TrialDataset data = four_row_fixture();
  const MuFn mu = [](double, std::span<const double> w) {
    return w[0] == 2.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
  };
  CHECK_THROWS_WITH_AS(plugin_ate(mu, data),
                       doctest::Contains("row 2"), Error);
}

TEST_CASE("influence variance vanishes for a perfect constant fit") {
  TrialDataset data;
  data.a = {1, 0, 1, 0};
  data.y = {2, 1, 2, 1};
  data.w = Matrix(4, 1, std::vector<double>{0, 0, 0, 0});
  ArmPredictions preds;
  preds.at_treated.assign(4, 2.0);
  preds.at_control.assign(4, 1.0);
  const IfVariance iv = if_variance(preds, data, 2.0, 1.0);
  CHECK(iv.sigma_inf_sq == 0.0);
  CHECK(iv.se == 0.0);
}

TEST_CASE("influence variance on the four-row fixture by hand") {
  const TrialDataset data = four_row_fixture();
  ArmPredictions preds;
  preds.at_treated.assign(4, 2.0);  // treated arm mean
  preds.at_control.assign(4, 1.0);  // control arm mean
  const IfVariance iv = if_variance(preds, data, 2.0, 1.0);
  for (const double v : iv.influence) {
    CHECK(v * v == doctest::Approx(4.0).epsilon(1e-15));
  }
  CHECK(iv.sigma_inf_sq == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(iv.se == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("influence-based se is 1-homogeneous in (Y, mu)") {
  TrialDataset data = nonlinear_trial(60, 5);
  ArmPredictions preds;
  Rng rng(9);
  for (std::size_t i = 0; i < 60; ++i) {
    preds.at_treated.push_back(rng.normal(1.0, 0.5));
    preds.at_control.push_back(rng.normal(0.0, 0.5));
  }
  const PluginAte pa = plugin_ate(preds);
  const IfVariance base = if_variance(preds, data, pa.psi1, pa.psi0);

  const double c = -2.5;
  TrialDataset scaled = data;
  ArmPredictions scaled_preds = preds;
  for (std::size_t i = 0; i < 60; ++i) {
    scaled.y[i] *= c;
    scaled_preds.at_treated[i] *= c;
    scaled_preds.at_control[i] *= c;
  }
  const IfVariance after =
      if_variance(scaled_preds, scaled, c * pa.psi1, c * pa.psi0);
  CHECK(after.se == doctest::Approx(std::fabs(c) * base.se).epsilon(1e-12));
}

TEST_CASE("unadjusted estimate on the four-row fixture") {
  const EstimateResult r = unadjusted_estimate(four_row_fixture());
  CHECK(r.estimator == "unadjusted");
  CHECK(r.psi_hat == 1.0);
  CHECK(r.psi1_hat == 2.0);
  CHECK(r.psi0_hat == 1.0);
  CHECK(r.se == 1.0);
  const double z = normal_quantile(0.975);
  CHECK(r.ci_lower == doctest::Approx(1.0 - z).epsilon(1e-14));
  CHECK(r.ci_upper == doctest::Approx(1.0 + z).epsilon(1e-14));
  CHECK(r.p_value == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0)))
                         .epsilon(1e-14));
  CHECK(r.ci_lower < r.ci_upper);
}

TEST_CASE("constant outcomes give a degenerate, flagged result") {
  TrialDataset data;
  data.a = {1, 0, 1, 0};
  data.y = {7, 7, 7, 7};
  data.w = Matrix(4, 1, std::vector<double>{1, 2, 3, 4});
  const EstimateResult r = unadjusted_estimate(data);
  CHECK(r.psi_hat == 0.0);
  CHECK(r.se == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.notes.at("degenerate_ci") == "true");
}

TEST_CASE("unadjusted estimate is location invariant") {
  TrialDataset data = nonlinear_trial(50, 21);
  const EstimateResult base = unadjusted_estimate(data);
  for (double& v : data.y) v += 17.25;
  const EstimateResult shifted = unadjusted_estimate(data);
  CHECK(shifted.psi_hat == doctest::Approx(base.psi_hat).epsilon(1e-12));
  CHECK(shifted.se == doctest::Approx(base.se).epsilon(1e-12));
}

TEST_CASE("one-armed data raises an estimation error") {
  TrialDataset data;
  data.a = {1, 1, 1, 1};
  data.y = {1, 2, 3, 4};
  data.w = Matrix(4, 1, std::vector<double>{0, 0, 0, 0});
  try {
    unadjusted_estimate(data);
    FAIL("expected an estimation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Estimation);
  }
}

TEST_CASE("ancova without covariates reduces to the unadjusted estimator") {
  const TrialDataset data = nonlinear_trial(80, 33);
  const EstimateResult plain = unadjusted_estimate(data);
  DesignSpec spec;  // intercept + treatment only
  const EstimateResult fitted = ancova_estimate(data, spec);
  CHECK(fitted.psi_hat == doctest::Approx(plain.psi_hat).epsilon(1e-12));
  CHECK(fitted.se == doctest::Approx(plain.se).epsilon(1e-12));
}

TEST_CASE("ancova plug-in equals the treatment coefficient (no interactions)") {
  const TrialDataset data = nonlinear_trial(120, 44);
  const EstimateResult r = ancova_estimate(data, raw_covariate_spec(data));
  CHECK(std::fabs(r.psi_hat - r.diagnostics.at("treatment_coefficient")) <
        1e-10);
}

TEST_CASE("ancova plug-in equals the coefficient with centered interactions") {
  const TrialDataset data = nonlinear_trial(120, 45);
  DesignSpec spec = raw_covariate_spec(data);
  spec.center_covariates = true;
  spec.interactions = true;
  const EstimateResult r = ancova_estimate(data, spec);
  CHECK(std::fabs(r.psi_hat - r.diagnostics.at("treatment_coefficient")) <
        1e-10);
}

TEST_CASE("ancova influence values average to zero for an OLS fit") {
  const TrialDataset data = nonlinear_trial(90, 46);
  const EstimateResult r = ancova_estimate(data, raw_covariate_spec(data));
  double mean = 0.0;
  for (const double v : r.influence) mean += v;
  mean /= static_cast<double>(r.influence.size());
  CHECK(std::fabs(mean) < 1e-10);
}

TEST_CASE("historical adjustment with constant outcomes drops the score") {
  const TrialDataset data = nonlinear_trial(60, 51);
  HistoricalDataset hist;
  hist.w = Matrix(40, 3);
  hist.y.assign(40, 5.0);
  Rng rng(3);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 3; ++j) hist.w(i, j) = rng.normal(0.0, 1.0);
  }
  AdjustConfig config;
  config.candidates = {{"mean", {}}};
  // Default design is intercept + treatment + score, so a constant score
  // collapses the fit onto the unadjusted arm means.
  const EstimateResult adjusted =
      prognostic_adjust_estimate(data, hist, config);
  const EstimateResult plain = unadjusted_estimate(data);
  CHECK(adjusted.psi_hat == doctest::Approx(plain.psi_hat).epsilon(1e-12));
  CHECK(adjusted.se == doctest::Approx(plain.se).epsilon(1e-12));
  CHECK(adjusted.notes.at("dropped_columns") == "score");
  CHECK(adjusted.notes.at("selected_learner") == "mean");

  // With raw covariates requested, the same degenerate score reduces to the
  // covariate-ancova fit instead.
  PrognosticOptions with_raw;
  with_raw.include_raw_covariates = true;
  const EstimateResult adjusted_raw =
      prognostic_adjust_estimate(data, hist, config, with_raw);
  const EstimateResult ancova = ancova_estimate(data, raw_covariate_spec(data));
  CHECK(adjusted_raw.psi_hat == doctest::Approx(ancova.psi_hat).epsilon(1e-12));
  CHECK(adjusted_raw.se == doctest::Approx(ancova.se).epsilon(1e-12));
  CHECK(adjusted_raw.notes.at("dropped_columns") == "score");
}

TEST_CASE("an informative historical score reduces the standard error") {
  // Outcome driven by a smooth covariate signal; the historical sample is
  // large and unshifted, so its fitted score explains most of the variance.
  const auto make = [](std::size_t n, std::uint64_t seed, bool with_arm) {
    Rng rng(seed);
    TrialDataset data;
    data.w = Matrix(n, 2);
    data.a.assign(n, 0.0);
    data.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      data.w(i, 0) = rng.uniform(-2.0, 2.0);
      data.w(i, 1) = rng.normal(0.0, 1.0);
      if (with_arm) data.a[i] = i % 2 == 0 ? 1.0 : 0.0;
      data.y[i] = 4.0 * data.w(i, 0) - 2.0 * data.w(i, 1) +
                  0.9 * data.a[i] + rng.normal(0.0, 0.4);
    }
    return data;
  };
  const TrialDataset trial = make(200, 7, true);
  const TrialDataset pseudo = make(800, 8, false);
  HistoricalDataset hist;
  hist.w = pseudo.w;
  hist.y = pseudo.y;

  AdjustConfig config;
  config.candidates = {{"ols", {}}};
  config.seed = 99;
  const EstimateResult adjusted =
      prognostic_adjust_estimate(trial, hist, config);
  const EstimateResult plain = unadjusted_estimate(trial);
  CHECK(adjusted.se < 0.5 * plain.se);
  CHECK(adjusted.notes.at("selected_learner") == "ols");
  // Treatment-free score keeps the coefficient identity intact.
  CHECK(std::fabs(adjusted.psi_hat -
                  adjusted.diagnostics.at("treatment_coefficient")) < 1e-10);
}

TEST_CASE("historical covariate dimension mismatch is rejected") {
  const TrialDataset data = nonlinear_trial(40, 61);
  HistoricalDataset hist;
  hist.w = Matrix(20, 2, std::vector<double>(40, 1.0));
  hist.y.assign(20, 0.0);
  AdjustConfig config;
  config.candidates = {{"mean", {}}};
  CHECK_THROWS_AS(prognostic_adjust_estimate(data, hist, config), Error);
}

TEST_CASE("epsilon-star hand value on the four-row fixture") {
  const TrialDataset data = four_row_fixture();
  const ArmPredictions zero{std::vector<double>(4, 0.0),
                            std::vector<double>(4, 0.0)};
  CHECK(tmle_epsilon(zero, data) == 0.5);
}

TEST_CASE("epsilon-star vanishes when per-arm residual sums vanish") {
  const TrialDataset data = nonlinear_trial(70, 71);
  double sum1 = 0.0, sum0 = 0.0, n1 = 0.0, n0 = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data.a[i] == 1.0) {
      sum1 += data.y[i];
      n1 += 1.0;
    } else {
      sum0 += data.y[i];
      n0 += 1.0;
    }
  }
  ArmPredictions arm_means;
  arm_means.at_treated.assign(data.n(), sum1 / n1);
  arm_means.at_control.assign(data.n(), sum0 / n0);
  CHECK(std::fabs(tmle_epsilon(arm_means, data)) < 1e-12);
}

TEST_CASE("epsilon-star equals the +/-1 regression slope of the residuals") {
  const TrialDataset data = nonlinear_trial(50, 81);
  Rng rng(82);
  ArmPredictions preds;
  for (std::size_t i = 0; i < data.n(); ++i) {
    preds.at_treated.push_back(rng.normal(2.0, 1.0));
    preds.at_control.push_back(rng.normal(0.0, 1.0));
  }
  Matrix design(data.n(), 1);
  std::vector<double> residual(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    design(i, 0) = 2.0 * data.a[i] - 1.0;
    residual[i] = data.y[i] - preds.observed(i, data.a[i]);
  }
  const std::vector<double> slope = solve_least_squares(design, residual);
  CHECK(tmle_epsilon(preds, data) ==
        doctest::Approx(slope[0]).epsilon(1e-12));
}

TEST_CASE("default submodel resolution follows the realized arm balance") {
  TrialDataset balanced;
  balanced.a = {1, 0, 1, 0};
  balanced.y = {1, 2, 3, 4};
  balanced.w = Matrix(4, 1, std::vector<double>{0, 0, 0, 0});
  CHECK(resolve_tmle_submodel(balanced) == TmleSubmodel::AdditiveEps);
  TrialDataset lopsided = balanced;
  lopsided.a = {1, 1, 1, 0};
  CHECK(resolve_tmle_submodel(lopsided) == TmleSubmodel::LinearFluctuation);
  CHECK(resolve_tmle_submodel(lopsided, true) == TmleSubmodel::AdditiveEps);
}

TEST_CASE("additive targeting on the four-row fixture by hand") {
  const TrialDataset data = four_row_fixture();
  const EstimateResult r =
      tmle_from_mu(data, zero_mu(4), TmleSubmodel::AdditiveEps);
  CHECK(r.psi_hat == 1.0);
  CHECK(r.psi1_hat == 0.5);
  CHECK(r.psi0_hat == -0.5);
  CHECK(r.diagnostics.at("epsilon_star") == 0.5);
  CHECK(r.notes.at("submodel") == "additive-eps");
  // The update leaves nothing along the treatment direction.
  const TmleUpdate update =
      tmle_update(data, zero_mu(4), TmleSubmodel::AdditiveEps);
  CHECK(update.updated.at_treated[0] == 0.5);
  CHECK(update.updated.at_control[0] == -0.5);
  CHECK(std::fabs(tmle_epsilon(update.updated, data)) < 1e-14);
}

TEST_CASE("additive targeting of a degenerate fit recovers the arm means") {
  const TrialDataset data = nonlinear_trial(90, 91);
  const EstimateResult tmle =
      tmle_from_mu(data, zero_mu(data.n()), TmleSubmodel::AdditiveEps);
  const EstimateResult plain = unadjusted_estimate(data);
  // With mu == 0 the update absorbs everything except arm imbalance: at a
  // 1:1 split psi_hat equals the unadjusted difference exactly; here we only
  // require the identity when the draw happens to be balanced, and the exact
  // epsilon formula otherwise.
  const double n1 = static_cast<double>(data.arm_count(1.0));
  const double n0 = static_cast<double>(data.arm_count(0.0));
  const double n = n1 + n0;
  const double expected =
      2.0 * (n1 * plain.psi1_hat - n0 * plain.psi0_hat) / n;
  CHECK(tmle.psi_hat == doctest::Approx(expected).epsilon(1e-12));
  if (n1 == n0) {
    CHECK(tmle.psi_hat == doctest::Approx(plain.psi_hat).epsilon(1e-12));
  }
}

TEST_CASE("both submodels satisfy the empirical score equation") {
  const TrialDataset data = nonlinear_trial(120, 101);
  const auto plan = make_cross_fit_plan(data, CrossFitScheme::VFold, 5, 11);
  AdjustConfig config;
  config.candidates = {{"mean", {}}, {"ols", {}}, {"knn", {{"k", 5.0}}}};
  config.seed = 12;
  const CrossFitResult mu =
      cross_fit_predict(config.candidates, data, plan, config.sl_folds);
  for (const auto submodel :
       {TmleSubmodel::AdditiveEps, TmleSubmodel::LinearFluctuation}) {
    const TmleUpdate update = tmle_update(data, mu, submodel);
    CHECK(std::fabs(tmle_epsilon(update.updated, data)) < 1e-8);
  }
}

TEST_CASE("null update parameters reproduce the initial fit exactly") {
  const TrialDataset data = nonlinear_trial(60, 111);
  const auto plan = make_cross_fit_plan(data, CrossFitScheme::VFold, 4, 13);
  const CrossFitResult mu =
      cross_fit_predict({{"ols", {}}}, data, plan);

  // Additive submodel at eps = 0 is the identity by construction.
  const TmleUpdate update = tmle_update(data, mu, TmleSubmodel::AdditiveEps);
  for (std::size_t i = 0; i < data.n(); ++i) {
    CHECK(update.updated.at_treated[i] - update.epsilon_star ==
          doctest::Approx(mu.at_treated[i]).epsilon(1e-12));
  }

  // Linear submodel at beta = (0, 1, 0): only the prediction column active.
  DesignSpec spec;
  spec.treatment_coding = TreatmentCoding::PlusMinus;
  spec.covariate_columns = {0, 1, 2};
  ScoreColumn score;
  score.observed = mu.observed;
  score.at_treated = mu.at_treated;
  score.at_control = mu.at_control;
  spec.score = score;
  const auto [forced1, forced0] = counterfactual_designs(data, spec);
  const BuiltDesign observed = build_design(data, spec);
  std::vector<double> beta_null(observed.labels.size(), 0.0);
  for (std::size_t j = 0; j < observed.labels.size(); ++j) {
    if (observed.labels[j] == "score") beta_null[j] = 1.0;
  }
  const std::vector<double> null1 = forced1.x.multiply(beta_null);
  const std::vector<double> null0 = forced0.x.multiply(beta_null);
  for (std::size_t i = 0; i < data.n(); ++i) {
    CHECK(null1[i] == mu.at_treated[i]);
    CHECK(null0[i] == mu.at_control[i]);
  }
}

TEST_CASE("within-trial adjustment is the linear-fluctuation targeting step") {
  const TrialDataset data = nonlinear_trial(200, 121);
  const auto plan = make_cross_fit_plan(data, CrossFitScheme::VFold, 10, 31);
  AdjustConfig config;
  config.seed = 32;
  const CrossFitResult mu =
      cross_fit_predict(config.candidates, data, plan, config.sl_folds);
  const EstimateResult wt = within_trial_from_scores(data, mu);
  const EstimateResult tm =
      tmle_from_mu(data, mu, TmleSubmodel::LinearFluctuation);
  CHECK(std::fabs(wt.psi_hat - tm.psi_hat) < 1e-10);
  CHECK(std::fabs(wt.se - tm.se) < 1e-10);
  CHECK(std::fabs(wt.psi1_hat - tm.psi1_hat) < 1e-10);
  CHECK(std::fabs(wt.psi0_hat - tm.psi0_hat) < 1e-10);
}

TEST_CASE("within-trial adjustment with a constant score reduces to ancova") {
  const TrialDataset data = nonlinear_trial(80, 131);
  CrossFitResult constant;
  constant.at_treated.assign(data.n(), 3.25);
  constant.at_control.assign(data.n(), 3.25);
  constant.observed.assign(data.n(), 3.25);
  const EstimateResult wt = within_trial_from_scores(data, constant);
  const EstimateResult plain =
      ancova_estimate(data, raw_covariate_spec(data));
  CHECK(wt.psi_hat == doctest::Approx(plain.psi_hat).epsilon(1e-12));
  CHECK(wt.se == doctest::Approx(plain.se).epsilon(1e-12));
  CHECK(wt.notes.at("dropped_columns") == "score");
}

TEST_CASE("score-only within-trial variant omits the raw covariates") {
  const TrialDataset data = nonlinear_trial(100, 141);
  const auto plan = make_cross_fit_plan(data, CrossFitScheme::VFold, 5, 41);
  const CrossFitResult mu = cross_fit_predict({{"ols", {}}}, data, plan);
  WithinTrialOptions score_only;
  score_only.include_raw_covariates = false;
  const EstimateResult narrow =
      within_trial_from_scores(data, mu, score_only);
  const EstimateResult wide = within_trial_from_scores(data, mu);
  CHECK(std::isfinite(narrow.psi_hat));
  CHECK(narrow.se > 0.0);
  CHECK(narrow.psi_hat != wide.psi_hat);
}

TEST_CASE("oracle adjustment handles the collinear homogeneous columns") {
  Rng rng(151);
  const std::size_t n = 100;
  AugmentedTrialDataset data;
  data.trial.w = Matrix(n, 1);
  data.trial.a.resize(n);
  data.trial.y.resize(n);
  data.u.resize(n);
  data.y0.resize(n);
  data.y1.resize(n);
  data.m0.resize(n);
  data.m1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.uniform(-2.0, 1.0);
    data.trial.w(i, 0) = w;
    data.u[i] = rng.uniform01();
    data.m0[i] = 4.1 * std::sin(std::fabs(w));
    data.m1[i] = 0.84 + data.m0[i];
    data.trial.a[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    data.y0[i] = data.m0[i] + rng.normal(0.0, 1.3);
    data.y1[i] = data.m1[i] + rng.normal(0.0, 1.3);
    data.trial.y[i] =
        data.trial.a[i] == 1.0 ? data.y1[i] : data.y0[i];
  }
  data.trial.a[0] = 1.0;
  data.trial.y[0] = data.y1[0];
  data.trial.a[1] = 0.0;
  data.trial.y[1] = data.y0[1];
  const EstimateResult r = oracle_adjust_estimate(data);
  CHECK(std::isfinite(r.psi_hat));
  CHECK(r.se > 0.0);
  CHECK(r.diagnostics.at("dropped_column_count") == 1.0);
  CHECK(r.notes.at("dropped_columns") == "w2");

  // Noise-free homogeneous variant: exact effect, zero standard error.
  AugmentedTrialDataset exact = data;
  for (std::size_t i = 0; i < n; ++i) {
    exact.y0[i] = exact.m0[i];
    exact.y1[i] = exact.m1[i];
    exact.trial.y[i] = exact.trial.a[i] == 1.0 ? exact.y1[i] : exact.y0[i];
  }
  const EstimateResult noiseless = oracle_adjust_estimate(exact);
  CHECK(noiseless.psi_hat == doctest::Approx(0.84).epsilon(1e-10));
  CHECK(noiseless.se < 1e-10);
}

TEST_CASE("result JSON is flat, complete, and deterministic") {
  const EstimateResult r = unadjusted_estimate(four_row_fixture());
  const std::string json = to_json(r);
  for (const char* key :
       {"\"estimator\"", "\"psi_hat\"", "\"se\"", "\"ci_lower\"",
        "\"ci_upper\"", "\"p_value\"", "\"diagnostics\""}) {
    CAPTURE(key);
    CHECK(json.find(key) != std::string::npos);
  }
  CHECK(json.find("\"unadjusted\"") != std::string::npos);
  CHECK(json == to_json(unadjusted_estimate(four_row_fixture())));
}

TEST_CASE("full estimator pass on one dataset is deterministic") {
  const TrialDataset data = nonlinear_trial(100, 161);
  const auto plan = make_cross_fit_plan(data, CrossFitScheme::VFold, 5, 3);
  AdjustConfig config;
  config.candidates = {{"mean", {}}, {"ols", {}}};
  config.seed = 4;
  const EstimateResult a =
      tmle_estimate(data, config, plan, TmleSubmodel::AdditiveEps);
  const EstimateResult b =
      tmle_estimate(data, config, plan, TmleSubmodel::AdditiveEps);
  CHECK(a.psi_hat == b.psi_hat);
  CHECK(a.se == b.se);
  CHECK(to_json(a) == to_json(b));
  const EstimateResult w1 = within_trial_estimate(data, config, plan);
  const EstimateResult w2 = within_trial_estimate(data, config, plan);
  CHECK(w1.psi_hat == w2.psi_hat);
  CHECK(to_json(w1) == to_json(w2));
}
