#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "error.hpp"
#include "harness.hpp"
#include "normal.hpp"
#include "rng.hpp"

using namespace rctadjust;

namespace {

ScenarioConfig small_scenario() {
  ScenarioConfig scenario;
  scenario.effect = EffectScenario::Heterogeneous;
  scenario.shift = HistoricalShift::None;
  scenario.n = 60;
  scenario.n_hist = 300;
  return scenario;
}

ReplicationOptions fast_options() {
  ReplicationOptions options;
  options.candidates = {LearnerSpec{"mean", {}}, LearnerSpec{"ols", {}}};
  options.sl_folds = 3;
  options.cross_fit_folds = 5;
  return options;
}

SimulationPlan fast_plan() {
  SimulationPlan plan;
  plan.scenarios = {small_scenario()};
  plan.reps = 6;
  plan.master_seed = 777;
  plan.candidates = fast_options().candidates;
  plan.sl_folds = 3;
  plan.cross_fit_folds = 5;
  return plan;
}

/// A fake replication with one estimator cell per (psi, se, p, ci) tuple.
ReplicationOutcome fake_outcome(std::size_t rep, double truth,
                                double psi, double se, double p,
                                double ci_lo, double ci_hi, bool ok = true) {
  ReplicationOutcome out;
  out.rep_index = rep;
  out.psi_true = truth;
  ReplicationCell cell;
  cell.ok = ok;
  cell.result.psi_hat = psi;
  cell.result.se = se;
  cell.result.p_value = p;
  cell.result.ci_lower = ci_lo;
  cell.result.ci_upper = ci_hi;
  out.cells.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("estimator identifier registry") {
  CHECK(estimator_ids().size() == 7);
  for (const auto& id : estimator_ids()) CHECK(is_estimator_id(id));
  CHECK_FALSE(is_estimator_id("ipw"));
  CHECK(estimator_needs_historical("prog-historical"));
  CHECK_FALSE(estimator_needs_historical("tmle"));
  for (const auto& id : {"within-trial", "tmle", "tmle-linear"}) {
    CHECK(estimator_needs_cross_fit(id));
  }
  CHECK_FALSE(estimator_needs_cross_fit("oracle"));
}

TEST_CASE("plan validation rejects malformed requests") {
  SimulationPlan plan = fast_plan();
  plan.reps = 0;
  CHECK_THROWS_AS(plan.validate(), Error);
  plan = fast_plan();
  plan.estimators = {"unadjusted", "mystery"};
  CHECK_THROWS_AS(plan.validate(), Error);
  plan = fast_plan();
  plan.sweep_n = {50, 50};
  CHECK_THROWS_AS(plan.validate(), Error);
  plan = fast_plan();
  plan.alpha = 1.0;
  CHECK_THROWS_AS(plan.validate(), Error);
  plan = fast_plan();
  plan.candidates.clear();
  CHECK_THROWS_AS(plan.validate(), Error);
  CHECK_NOTHROW(fast_plan().validate());
}

TEST_CASE("default sweep grid matches the published sizes") {
  const auto grid = default_sweep_grid();
  REQUIRE(grid.size() == 24);
  CHECK(grid.front() == 50);
  CHECK(grid[15] == 200);
  CHECK(grid[16] == 225);
  CHECK(grid.back() == 400);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    CHECK(grid[i + 1] - grid[i] == (grid[i + 1] <= 200 ? 10 : 25));
  }
}

TEST_CASE("stock study plans cover the published scenarios") {
  const SimulationPlan study = scenario_study_plan();
  REQUIRE(study.scenarios.size() == 6);
  CHECK(scenario_label(study.scenarios[0]) == "homogeneous");
  CHECK(scenario_label(study.scenarios[1]) == "heterogeneous");
  CHECK(scenario_label(study.scenarios[3]) == "heterogeneous+obs-large");
  CHECK(scenario_label(study.scenarios[5]) == "heterogeneous+unobs-large");
  for (const auto& s : study.scenarios) {
    CHECK(s.n == 200);
    CHECK(s.n_hist == 4000);
  }
  CHECK(study.reps == 250);
  CHECK(study.master_seed == 12345);

  const SimulationPlan sweep = sweep_study_plan();
  CHECK(sweep.sweep_n == default_sweep_grid());
  CHECK(scenario_label(sweep.scenarios.front()) == "heterogeneous");

  const SimulationPlan smoke = smoke_profile();
  CHECK(smoke.reps == 50);
  for (const auto& s : smoke.scenarios) CHECK(s.n == 100);
}

TEST_CASE("replication seed substreams are pairwise distinct") {
  std::set<std::uint64_t> seeds;
  for (std::size_t rep = 0; rep < 50; ++rep) {
    seeds.insert(trial_stream_seed(9, rep));
    seeds.insert(historical_stream_seed(9, rep));
    seeds.insert(cross_fit_stream_seed(9, rep));
    seeds.insert(historical_fit_stream_seed(9, rep));
  }
  CHECK(seeds.size() == 200);
  // Leading draws of the trial streams differ across replications.
  std::set<std::uint64_t> leading;
  for (std::size_t rep = 0; rep < 1000; ++rep) {
    Rng rng(trial_stream_seed(9, rep));
    leading.insert(rng.next_u64());
  }
  CHECK(leading.size() == 1000);
}

TEST_CASE("replications are deterministic and paired across estimator lists") {
  const auto scenario = small_scenario();
  const auto options = fast_options();
  const std::vector<std::string> full = {"unadjusted", "ancova",
                                         "within-trial", "tmle",
                                         "tmle-linear", "oracle"};
  const auto a = run_replication(scenario, full, 3, 42, options);
  const auto b = run_replication(scenario, full, 3, 42, options);
  REQUIRE(a.cells.size() == full.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    REQUIRE(a.cells[i].ok);
    CHECK(a.cells[i].result.psi_hat == b.cells[i].result.psi_hat);
    CHECK(a.cells[i].result.se == b.cells[i].result.se);
  }
  // The same trial substream feeds the unadjusted estimator regardless of
  // which other estimators run alongside it.
  const auto solo =
      run_replication(scenario, {"unadjusted"}, 3, 42, options);
  CHECK(solo.cells[0].result.psi_hat == a.cells[0].result.psi_hat);
  CHECK(solo.cells[0].result.se == a.cells[0].result.se);
  CHECK(a.psi_true == true_ate(EffectScenario::Heterogeneous).value);
}

TEST_CASE("historical data is sampled only when an estimator needs it") {
  const auto scenario = small_scenario();
  const auto options = fast_options();
  const auto without =
      run_replication(scenario, {"unadjusted", "tmle"}, 0, 1, options);
  CHECK_FALSE(without.historical_sampled);
  const auto with =
      run_replication(scenario, {"prog-historical"}, 0, 1, options);
  CHECK(with.historical_sampled);
  CHECK(with.cells[0].ok);
}

TEST_CASE("an estimator failure is captured without hurting the others") {
  ScenarioConfig scenario = small_scenario();
  scenario.n_hist = 5;  // too small to cross-validate the score model
  const auto options = fast_options();
  const auto out = run_replication(
      scenario, {"unadjusted", "prog-historical", "tmle"}, 0, 8, options);
  CHECK(out.cells[0].ok);
  CHECK_FALSE(out.cells[1].ok);
  CHECK(!out.cells[1].error.empty());
  CHECK(out.cells[2].ok);
}

TEST_CASE("aggregate reproduces the three-replication hand example") {
  // Point estimates 0.5, 1.0, 1.5 with se 0.2 each, truth 1.0, CIs at
  // +/- 1.96 se: mean se 0.2, sd of estimates 0.5, only the middle CI
  // covers, and every |estimate| / se exceeds 1.96.
  std::vector<ReplicationOutcome> outcomes;
  const double z = 1.96, se = 0.2;
  std::size_t rep = 0;
  for (const double psi : {0.5, 1.0, 1.5}) {
    const double p = std::erfc(std::fabs(psi / se) / std::sqrt(2.0));
    outcomes.push_back(fake_outcome(rep++, 1.0, psi, se, p, psi - z * se,
                                    psi + z * se));
  }
  const auto row = aggregate(outcomes, 0, "demo", "label", 100, 0.05);
  CHECK(row.reps_used == 3);
  CHECK(row.failures == 0);
  CHECK(row.mean_est_se == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(row.empirical_se == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(row.coverage == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(row.power == 1.0);
  CHECK(row.mean_bias == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("aggregate corner cases") {
  // Identical estimates give exactly zero empirical spread.
  std::vector<ReplicationOutcome> outcomes;
  for (std::size_t rep = 0; rep < 4; ++rep) {
    outcomes.push_back(fake_outcome(rep, 1.0, 0.7, 0.1, 0.001, 0.5, 0.9));
  }
  auto row = aggregate(outcomes, 0, "demo", "label", 50, 0.05);
  CHECK(row.empirical_se == 0.0);
  CHECK(row.coverage == 0.0);  // truth 1.0 outside every [0.5, 0.9]

  // All-failed rows carry counts but no metrics.
  for (auto& outcome : outcomes) outcome.cells[0].ok = false;
  row = aggregate(outcomes, 0, "demo", "label", 50, 0.05);
  CHECK(row.reps_used == 0);
  CHECK(row.failures == 4);
  CHECK_FALSE(row.metrics_available());
  CHECK(std::isnan(row.power));
}

TEST_CASE("metrics CSV emits one line per row with stable formatting") {
  MetricsRow a;
  a.estimator = "unadjusted";
  a.scenario = "heterogeneous";
  a.n = 200;
  a.mean_est_se = 0.25;
  a.empirical_se = 0.5;
  a.power = 1.0;
  a.coverage = 1.0 / 3.0;
  a.mean_bias = -0.125;
  a.reps_used = 250;
  a.failures = 0;
  MetricsRow failed;
  failed.estimator = "tmle";
  failed.scenario = "homogeneous";
  failed.n = 100;
  failed.mean_est_se = failed.empirical_se = failed.power = failed.coverage =
      failed.mean_bias = std::numeric_limits<double>::quiet_NaN();
  failed.reps_used = 0;
  failed.failures = 50;
  const std::string csv = metrics_csv({a, failed});
  CHECK(csv ==
        "estimator,scenario,n,mean_est_se,empirical_se,power,coverage,"
        "mean_bias,reps_used,failures\n"
        "unadjusted,heterogeneous,200,0.25,0.5,1,0.3333333333,-0.125,250,0\n"
        "tmle,homogeneous,100,,,,,,0,50\n");
}

TEST_CASE("scenario study output is bitwise identical across worker counts") {
  SimulationPlan plan = fast_plan();
  const auto rows1 = run_scenario_study(plan);
  plan.workers = 3;
  const auto rows3 = run_scenario_study(plan);
  plan.workers = 1;
  const auto again = run_scenario_study(plan);
  CHECK(metrics_csv(rows1) == metrics_csv(rows3));
  CHECK(metrics_csv(rows1) == metrics_csv(again));
  REQUIRE(rows1.size() == plan.estimators.size());

  for (const auto& row : rows1) {
    CHECK(row.reps_used + row.failures == plan.reps);
    REQUIRE(row.metrics_available());
    CHECK(row.power >= 0.0);
    CHECK(row.power <= 1.0);
    CHECK(row.coverage >= 0.0);
    CHECK(row.coverage <= 1.0);
    CHECK(row.empirical_se > 0.0);
    CHECK(row.mean_est_se > 0.0);
    CHECK(row.scenario == "heterogeneous");
    CHECK(row.n == 60);
  }
}

TEST_CASE("sweep study walks the size grid with the companion rule") {
  SimulationPlan plan = fast_plan();
  plan.estimators = {"unadjusted", "oracle"};
  plan.reps = 4;
  plan.sweep_n = {50, 60};
  const auto rows = run_sweep_study(plan);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].n == 50);
  CHECK(rows[1].n == 50);
  CHECK(rows[2].n == 60);
  CHECK(rows[3].n == 60);
  CHECK(rows[0].estimator == "unadjusted");
  CHECK(rows[1].estimator == "oracle");
  for (const auto& row : rows) CHECK(row.scenario == "heterogeneous");

  SimulationPlan empty = fast_plan();
  empty.sweep_n.clear();
  CHECK_THROWS_AS(run_sweep_study(empty), Error);
}

TEST_CASE("study SVG charts one polyline per estimator and panel") {
  SimulationPlan plan = fast_plan();
  plan.estimators = {"unadjusted", "ancova", "oracle"};
  plan.reps = 4;
  plan.sweep_n = {50, 60, 70};
  const auto rows = run_sweep_study(plan);
  const std::string svg = study_svg(rows, "power", "coverage");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t polylines = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++polylines;
    pos += 9;
  }
  CHECK(polylines == 6);
  for (const auto& id : plan.estimators) {
    CHECK(svg.find(">" + id + "</text>") != std::string::npos);
  }
  CHECK(svg.find(">power</text>") != std::string::npos);
  CHECK_THROWS_AS(study_svg(rows, "power", "page-rank"), Error);
}

TEST_CASE("plan JSON parsing") {
  const std::string text = R"({
    "scenarios": [
      {"effect": "heterogeneous", "shift": "obs-large", "n": 80, "n_hist": 400}
    ],
    "estimators": ["unadjusted", "tmle"],
    "reps": 12,
    "master_seed": 99,
    "alpha": 0.1,
    "sweep_n": [50, 75],
    "workers": 2,
    "learners": [
      {"name": "mean"},
      {"name": "gbt-stumps", "hyperparameters": {"rounds": 50}}
    ],
    "sl_folds": 4,
    "cross_fit_folds": 5
  })";
  const SimulationPlan plan = parse_plan_json(text);
  REQUIRE(plan.scenarios.size() == 1);
  CHECK(plan.scenarios[0].effect == EffectScenario::Heterogeneous);
  CHECK(plan.scenarios[0].shift == HistoricalShift::ObsLarge);
  CHECK(plan.scenarios[0].n == 80);
  CHECK(plan.scenarios[0].n_hist == 400);
  CHECK(plan.estimators == std::vector<std::string>{"unadjusted", "tmle"});
  CHECK(plan.reps == 12);
  CHECK(plan.master_seed == 99);
  CHECK(plan.alpha == 0.1);
  CHECK(plan.sweep_n == std::vector<std::size_t>{50, 75});
  CHECK(plan.workers == 2);
  REQUIRE(plan.candidates.size() == 2);
  CHECK(plan.candidates[1].name == "gbt-stumps");
  CHECK(plan.candidates[1].hyperparameters.at("rounds") == 50);
  CHECK(plan.sl_folds == 4);

  CHECK(parse_plan_json("{}").reps == 250);  // defaults survive
  CHECK_THROWS_AS(parse_plan_json("{nope"), Error);
  CHECK_THROWS_AS(parse_plan_json(R"({"estimators": ["nope"]})"), Error);
  CHECK_THROWS_AS(parse_plan_json(R"({"reps": 0})"), Error);
}

TEST_CASE("learner override JSON parsing") {
  const auto single =
      parse_learner_specs_json(R"({"name": "knn", "hyperparameters": {"k": 3}})");
  REQUIRE(single.size() == 1);
  CHECK(single[0].name == "knn");
  CHECK(single[0].hyperparameters.at("k") == 3);
  const auto list = parse_learner_specs_json(R"([{"name": "mean"}, {"name": "ols"}])");
  CHECK(list.size() == 2);
  CHECK_THROWS_AS(parse_learner_specs_json(R"({"name": "warp-drive"})"), Error);
  CHECK_THROWS_AS(parse_learner_specs_json(R"({"hyperparameters": {}})"), Error);
  CHECK_THROWS_AS(
      parse_learner_specs_json(R"({"name": "knn", "hyperparameters": {"k": "3"}})"),
      Error);
  CHECK_THROWS_AS(parse_learner_specs_json("[]"), Error);
}
