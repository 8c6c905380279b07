// Command-line front end over the shared-library C API.
//
// Commands: estimate (one estimator on CSV data, JSON to stdout),
// simulate (scenario study -> metrics CSV), sweep (sample-size study ->
// metrics CSV), dump-dgp (write simulated datasets). Exit codes: 0 success,
// 1 estimation/data error (message on stderr), 2 usage error.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <rctadjust.h>

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 12345;

const std::vector<std::string> kEstimators = {
    "unadjusted", "ancova", "prog-historical", "within-trial",
    "tmle",       "tmle-linear", "oracle"};

[[nodiscard]] int fail(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return 1;
}

[[nodiscard]] int fail_api() { return fail(rcta_last_error()); }

/// Default worker count: the RCTADJUST_WORKERS environment variable when
/// set to a positive integer, else 1.
std::size_t default_workers() {
  const char* text = std::getenv("RCTADJUST_WORKERS");
  if (text == nullptr) return 1;
  char* end = nullptr;
  const long value = std::strtol(text, &end, 10);
  if (end == text || *end != '\0' || value < 1) return 1;
  return static_cast<std::size_t>(value);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

/// True when the CSV header carries the simulated-truth columns appended by
/// dump-dgp, so the file must be loaded as an augmented trial.
bool augmented_header(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string suffix = ",u,y0,y1,m0,m1";
  return line.size() > suffix.size() &&
         line.compare(line.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Shared flags for the two study commands.
struct StudyFlags {
  std::string out;
  std::string svg;
  std::string config;
  std::string effect;
  std::string shift = "none";
  std::size_t n = 200;
  std::size_t n_hist = 4000;
  std::vector<std::string> estimators;
  std::size_t reps = 250;
  std::uint64_t seed = kDefaultSeed;
  double alpha = 0.05;
  std::size_t workers = default_workers();
  std::string learners;
  std::size_t folds = 10;
  std::size_t sl_folds = 10;
  std::vector<std::size_t> grid;
  bool scenario_flag_passed = false;
};

void add_study_flags(CLI::App& cmd, StudyFlags& flags, bool sweep) {
  cmd.add_option("--out", flags.out, "output metrics CSV path")->required();
  cmd.add_option("--svg", flags.svg, "also write a line-chart SVG here");
  cmd.add_option("--config", flags.config,
                 "JSON plan file; overrides the scenario/estimator flags");
  cmd.add_option("--effect", flags.effect, "treatment effect scenario")
      ->check(CLI::IsMember({"homogeneous", "heterogeneous"}));
  cmd.add_option("--shift", flags.shift, "historical covariate/outcome shift")
      ->check(CLI::IsMember(
          {"none", "obs-small", "obs-large", "unobs-small", "unobs-large"}));
  if (!sweep) {
    cmd.add_option("--n", flags.n, "trial sample size (default 200)");
    cmd.add_option("--n-hist", flags.n_hist,
                   "historical sample size (default 4000)");
  } else {
    cmd.add_option("--grid", flags.grid,
                   "trial sizes to sweep (default 50..200 by 10, then "
                   "225..400 by 25; historical size is 10x the trial size)")
        ->delimiter(',');
  }
  cmd.add_option("--estimators", flags.estimators,
                 "estimators to compare (default: all)")
      ->delimiter(',')
      ->check(CLI::IsMember(kEstimators));
  cmd.add_option("--reps", flags.reps, "Monte Carlo replications per cell");
  cmd.add_option("--seed", flags.seed, "master seed (default 12345)");
  cmd.add_option("--alpha", flags.alpha, "test/CI level (default 0.05)");
  cmd.add_option("--workers", flags.workers,
                 "worker threads (default: RCTADJUST_WORKERS or 1; results "
                 "are identical for any count)");
  cmd.add_option("--learners", flags.learners,
                 "candidate learner library as JSON text");
  cmd.add_option("--folds", flags.folds, "cross-fitting folds (default 10)");
  cmd.add_option("--sl-folds", flags.sl_folds,
                 "model-selection folds (default 10)");
}

/// Builds the plan JSON for rcta_run_study from a command's flags; the
/// --config file text wins when present.
int run_study_command(const char* kind, const StudyFlags& flags) {
  std::string plan_text;
  if (!flags.config.empty()) {
    const auto text = read_file(flags.config);
    if (!text) return fail("cannot read config file '" + flags.config + "'");
    plan_text = *text;
  } else {
    json plan = json::object();
    if (flags.scenario_flag_passed) {
      json scenario = json::object();
      scenario["effect"] =
          flags.effect.empty() ? "heterogeneous" : flags.effect;
      scenario["shift"] = flags.shift;
      scenario["n"] = flags.n;
      scenario["n_hist"] = flags.n_hist;
      plan["scenarios"] = json::array({scenario});
    }
    if (!flags.estimators.empty()) plan["estimators"] = flags.estimators;
    plan["reps"] = flags.reps;
    plan["master_seed"] = flags.seed;
    plan["alpha"] = flags.alpha;
    plan["workers"] = flags.workers;
    if (!flags.grid.empty()) plan["sweep_n"] = flags.grid;
    if (!flags.learners.empty()) {
      json learners = json::parse(flags.learners, nullptr, false);
      if (learners.is_discarded()) {
        return fail("--learners is not valid JSON");
      }
      if (learners.is_object()) learners = json::array({learners});
      plan["learners"] = learners;
    }
    plan["cross_fit_folds"] = flags.folds;
    plan["sl_folds"] = flags.sl_folds;
    plan_text = plan.dump();
  }
  if (rcta_run_study(kind, plan_text.c_str(), flags.out.c_str(),
                     flags.svg.empty() ? nullptr : flags.svg.c_str()) !=
      RCTA_OK) {
    return fail_api();
  }
  std::cout << "wrote " << flags.out << "\n";
  if (!flags.svg.empty()) std::cout << "wrote " << flags.svg << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariate-adjusted average-treatment-effect estimation for "
               "two-arm randomized trials, with a Monte Carlo study engine"};
  app.require_subcommand(1);

  // ---- estimate ----
  std::string est_data, est_historical, est_estimator, est_learners;
  double est_alpha = 0.05;
  std::uint64_t est_seed = kDefaultSeed;
  std::size_t est_folds = 10, est_sl_folds = 10;
  bool est_score_only = false, est_raw_covariates = false;
  bool est_force_additive = false;
  auto* estimate =
      app.add_subcommand("estimate", "run one estimator on CSV data and "
                                     "print the result as JSON");
  estimate->add_option("--data", est_data,
                       "trial CSV (columns y,a,w1..wp); the oracle estimator "
                       "needs an augmented CSV as written by dump-dgp")
      ->required();
  estimate->add_option("--estimator", est_estimator, "estimator to run")
      ->required()
      ->check(CLI::IsMember(kEstimators));
  estimate->add_option("--historical", est_historical,
                       "historical control CSV (columns y,w1..wp); required "
                       "by prog-historical");
  estimate->add_option("--alpha", est_alpha, "test/CI level (default 0.05)");
  estimate->add_option("--seed", est_seed,
                       "seed for folds and learner fits (default 12345)");
  estimate->add_option("--folds", est_folds,
                       "cross-fitting folds (default 10)");
  estimate->add_option("--sl-folds", est_sl_folds,
                       "model-selection folds (default 10)");
  estimate->add_option("--learners", est_learners,
                       "candidate learner library as JSON text");
  estimate->add_flag("--score-only", est_score_only,
                     "within-trial: adjust for the score alone, without raw "
                     "covariate main effects");
  estimate->add_flag("--raw-covariates", est_raw_covariates,
                     "prog-historical: adjust for the raw covariate main "
                     "effects alongside the score");
  estimate->add_flag("--force-additive", est_force_additive,
                     "tmle: use the additive update even when the realized "
                     "arms are unbalanced");

  // ---- simulate ----
  StudyFlags sim;
  auto* simulate = app.add_subcommand(
      "simulate", "scenario study: operating characteristics per estimator "
                  "(default: all six stock scenarios at n=200, n_hist=4000)");
  add_study_flags(*simulate, sim, /*sweep=*/false);

  // ---- sweep ----
  StudyFlags swp;
  auto* sweep = app.add_subcommand(
      "sweep", "sample-size study: power/coverage per estimator over a grid "
               "of trial sizes (historical size = 10x trial size)");
  add_study_flags(*sweep, swp, /*sweep=*/true);

  // ---- dump-dgp ----
  std::string dump_out, dump_hist_out, dump_effect = "heterogeneous",
                        dump_shift = "none";
  std::size_t dump_n = 200, dump_n_hist = 4000;
  std::uint64_t dump_seed = kDefaultSeed;
  auto* dump = app.add_subcommand(
      "dump-dgp", "sample one synthetic trial (augmented CSV with truth "
                  "columns) and optionally a historical control set");
  dump->add_option("--out", dump_out, "augmented trial CSV path")->required();
  dump->add_option("--hist-out", dump_hist_out,
                   "historical control CSV path");
  dump->add_option("--effect", dump_effect, "treatment effect scenario")
      ->check(CLI::IsMember({"homogeneous", "heterogeneous"}));
  dump->add_option("--shift", dump_shift, "historical shift")
      ->check(CLI::IsMember(
          {"none", "obs-small", "obs-large", "unobs-small", "unobs-large"}));
  dump->add_option("--n", dump_n, "trial sample size (default 200)");
  dump->add_option("--n-hist", dump_n_hist,
                   "historical sample size (default 4000)");
  dump->add_option("--seed", dump_seed, "seed (default 12345)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? 0 : 2;
  }

  if (estimate->parsed()) {
    rcta_dataset* trial = nullptr;
    const bool augmented =
        est_estimator == "oracle" || augmented_header(est_data);
    const auto load =
        augmented ? rcta_augmented_from_csv : rcta_trial_from_csv;
    if (load(est_data.c_str(), &trial) != RCTA_OK) return fail_api();
    rcta_dataset* historical = nullptr;
    if (!est_historical.empty() &&
        rcta_historical_from_csv(est_historical.c_str(), &historical) !=
            RCTA_OK) {
      rcta_dataset_free(trial);
      return fail_api();
    }
    if (est_estimator == "prog-historical" && historical == nullptr) {
      std::cerr << "estimator 'prog-historical' requires --historical\n";
      rcta_dataset_free(trial);
      return 2;
    }

    json options = json::object();
    options["estimator"] = est_estimator;
    options["alpha"] = est_alpha;
    options["seed"] = est_seed;
    options["cross_fit_folds"] = est_folds;
    options["sl_folds"] = est_sl_folds;
    options["score_only"] = est_score_only;
    options["raw_covariates"] = est_raw_covariates;
    options["force_additive"] = est_force_additive;
    if (!est_learners.empty()) {
      json learners = json::parse(est_learners, nullptr, false);
      if (learners.is_discarded()) {
        rcta_dataset_free(historical);
        rcta_dataset_free(trial);
        return fail("--learners is not valid JSON");
      }
      if (learners.is_object()) learners = json::array({learners});
      options["learners"] = learners;
    }

    rcta_result* result = nullptr;
    const rcta_status status = rcta_estimate(
        trial, historical, options.dump().c_str(), &result);
    rcta_dataset_free(historical);
    rcta_dataset_free(trial);
    if (status != RCTA_OK) return fail_api();
    char* text = nullptr;
    if (rcta_result_json(result, &text) != RCTA_OK) {
      rcta_result_free(result);
      return fail_api();
    }
    std::cout << text << "\n";
    rcta_string_free(text);
    rcta_result_free(result);
    return 0;
  }

  if (simulate->parsed()) {
    sim.scenario_flag_passed =
        simulate->count("--effect") || simulate->count("--shift") ||
        simulate->count("--n") || simulate->count("--n-hist");
    return run_study_command("scenario", sim);
  }

  if (sweep->parsed()) {
    swp.scenario_flag_passed =
        sweep->count("--effect") || sweep->count("--shift");
    return run_study_command("sweep", swp);
  }

  // dump-dgp
  json scenario = json::object();
  scenario["effect"] = dump_effect;
  scenario["shift"] = dump_shift;
  scenario["n"] = dump_n;
  scenario["n_hist"] = dump_n_hist;
  if (rcta_dump_dgp(scenario.dump().c_str(), dump_seed, dump_out.c_str(),
                    dump_hist_out.empty() ? nullptr : dump_hist_out.c_str()) !=
      RCTA_OK) {
    return fail_api();
  }
  std::cout << "wrote " << dump_out << "\n";
  if (!dump_hist_out.empty()) std::cout << "wrote " << dump_hist_out << "\n";
  return 0;
}
