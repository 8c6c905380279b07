#pragma once
/// Monte Carlo engine for comparing the estimators on simulated trials:
/// paired replications (every estimator sees the same draws), deterministic
/// seed substreams per replication, optional multi-threaded execution with a
/// seed-keyed reduction so results are bitwise identical for any worker
/// count, and CSV/SVG reporting of the aggregated operating characteristics.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dgp.hpp"
#include "estimators.hpp"

namespace rctadjust {

/// Estimator identifiers accepted by the harness and the CLI, in canonical
/// display order.
const std::vector<std::string>& estimator_ids();
bool is_estimator_id(const std::string& id);

/// True when the estimator consumes a historical control dataset; the
/// harness samples historical data only when some estimator needs it.
bool estimator_needs_historical(const std::string& id);

/// True when the estimator consumes cross-fitted own-trial predictions;
/// those estimators share a single cross-fit per replication.
bool estimator_needs_cross_fit(const std::string& id);

/// A full study request. `scenarios` drives the scenario study; `sweep_n`
/// drives the sample-size sweep (with the companion historical size fixed
/// at ten times the trial size).
struct SimulationPlan {
  std::vector<ScenarioConfig> scenarios;
  std::vector<std::string> estimators = estimator_ids();
  std::size_t reps = 250;
  std::uint64_t master_seed = 12345;
  double alpha = 0.05;
  std::vector<std::size_t> sweep_n;
  std::size_t workers = 1;
  std::vector<LearnerSpec> candidates = default_candidate_library();
  std::size_t sl_folds = 10;
  std::size_t cross_fit_folds = 10;

  void validate() const;
};

/// Trial sizes 50, 60, ..., 200 then 225, 250, ..., 400.
std::vector<std::size_t> default_sweep_grid();

/// The six-scenario comparison at n = 200, n_hist = 4000: homogeneous,
/// heterogeneous, and heterogeneous with each of the four historical shifts.
SimulationPlan scenario_study_plan();

/// Heterogeneous-effect sweep over the default grid, n_hist = 10 n.
SimulationPlan sweep_study_plan();

/// Desk-scale profile for quick pipeline checks: reps = 50, n = 100.
SimulationPlan smoke_profile();

/// Per-replication seed substreams, all derived from (master seed,
/// replication index). Exposed so tests can check stream separation.
std::uint64_t trial_stream_seed(std::uint64_t master, std::size_t rep);
std::uint64_t historical_stream_seed(std::uint64_t master, std::size_t rep);
std::uint64_t cross_fit_stream_seed(std::uint64_t master, std::size_t rep);
std::uint64_t historical_fit_stream_seed(std::uint64_t master,
                                         std::size_t rep);

/// One estimator's outcome within one replication. A failure is recorded,
/// never propagated, so the other estimators' results survive.
struct ReplicationCell {
  bool ok = false;
  EstimateResult result;
  std::string error;
};

struct ReplicationOutcome {
  std::size_t rep_index = 0;
  double psi_true = 0.0;
  bool historical_sampled = false;
  std::vector<ReplicationCell> cells;  // aligned with the estimator list
};

/// Knobs shared by every estimator within a study.
struct ReplicationOptions {
  double alpha = 0.05;
  std::vector<LearnerSpec> candidates = default_candidate_library();
  std::size_t sl_folds = 10;
  std::size_t cross_fit_folds = 10;
};

/// Samples one trial (and, lazily, one historical set) from substreams of
/// (master_seed, rep_index) and runs every requested estimator on the same
/// data. The "tmle" entry always targets with the additive update and
/// "tmle-linear" with the linear fluctuation, so the two rows exercise
/// distinct submodels regardless of the realized arm split; the
/// balance-based default applies only to ad-hoc estimation on user data.
ReplicationOutcome run_replication(const ScenarioConfig& scenario,
                                   const std::vector<std::string>& estimators,
                                   std::size_t rep_index,
                                   std::uint64_t master_seed,
                                   const ReplicationOptions& options = {});

/// Operating characteristics of one estimator in one scenario/size cell.
/// Metrics are NaN ("absent") when fewer than two replications succeeded.
struct MetricsRow {
  std::string estimator;
  std::string scenario;
  std::size_t n = 0;
  double mean_est_se = 0.0;
  double empirical_se = 0.0;
  double power = 0.0;
  double coverage = 0.0;
  double mean_bias = 0.0;
  std::size_t reps_used = 0;
  std::size_t failures = 0;

  bool metrics_available() const noexcept { return reps_used >= 2; }
};

/// Reduces one estimator's cells across replications: mean_est_se = mean of
/// the per-replication SEs, empirical_se = sample standard deviation
/// (denominator reps_used - 1) of the point estimates, power = fraction
/// with p-value below alpha, coverage = fraction of confidence intervals
/// containing the true effect, mean_bias = mean estimate minus truth.
MetricsRow aggregate(const std::vector<ReplicationOutcome>& outcomes,
                     std::size_t estimator_index, const std::string& estimator,
                     const std::string& scenario, std::size_t n, double alpha);

/// All replications for one scenario, in replication order. Honors
/// plan.workers; output is bitwise independent of the worker count.
std::vector<ReplicationOutcome> run_replications(const ScenarioConfig& scenario,
                                                 const SimulationPlan& plan);

/// One MetricsRow per (scenario, estimator), scenario-major.
std::vector<MetricsRow> run_scenario_study(const SimulationPlan& plan);

/// One MetricsRow per (trial size, estimator) over plan.sweep_n with
/// n_hist = 10 n, size-major. The swept scenario is plan.scenarios.front()
/// when given, else the heterogeneous no-shift default.
std::vector<MetricsRow> run_sweep_study(const SimulationPlan& plan);

/// CSV with header estimator,scenario,n,mean_est_se,empirical_se,power,
/// coverage,mean_bias,reps_used,failures. Absent metrics print as empty
/// fields. Byte-identical for identical rows.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

/// Minimal self-contained two-panel SVG line chart of the study: one
/// polyline per estimator, x = trial size (or scenario when sizes repeat),
/// panels show `left_metric` and `right_metric` (one of mean_est_se,
/// empirical_se, power, coverage, mean_bias).
std::string study_svg(const std::vector<MetricsRow>& rows,
                      const std::string& left_metric,
                      const std::string& right_metric);

/// Parses a SimulationPlan from JSON. Recognized keys: scenarios (array of
/// {effect, shift, n, n_hist}), estimators, reps, master_seed, alpha,
/// sweep_n, workers, learners (array of {name, hyperparameters}), sl_folds,
/// cross_fit_folds. Missing keys keep defaults; the result is validated.
SimulationPlan parse_plan_json(const std::string& text);

/// Parses a learner library override: a JSON array of specs, or a single
/// {"name": ..., "hyperparameters": {...}} object.
std::vector<LearnerSpec> parse_learner_specs_json(const std::string& text);

}  // namespace rctadjust
