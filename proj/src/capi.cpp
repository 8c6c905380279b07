// C ABI wrapper around the C++ core: opaque handles, status codes, and a
// thread-local error message. Exceptions never cross the boundary.

#include "rctadjust.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "cross_fit.hpp"
#include "csv.hpp"
#include "dataset.hpp"
#include "dgp.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "harness.hpp"
#include "rng.hpp"

namespace {

using namespace rctadjust;
using nlohmann::json;

thread_local std::string g_last_error;

rcta_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return RCTA_ERR_IO;
    case ErrorCode::Parse: return RCTA_ERR_PARSE;
    case ErrorCode::InvalidArgument: return RCTA_ERR_INVALID_ARGUMENT;
    case ErrorCode::SingularDesign: return RCTA_ERR_SINGULAR_DESIGN;
    case ErrorCode::Estimation: return RCTA_ERR_ESTIMATION;
    case ErrorCode::Internal: return RCTA_ERR_INTERNAL;
  }
  return RCTA_ERR_INTERNAL;
}

rcta_status fail(rcta_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

/// Runs `body` translating every exception into a status + message.
template <typename Fn>
rcta_status guarded(Fn&& body) {
  try {
    return body();
  } catch (const Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(RCTA_ERR_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(RCTA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RCTA_ERR_INTERNAL, "unknown failure");
  }
}

char* copy_string(const std::string& text) {
  char* out = new char[text.size() + 1];
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

json parse_json_object(const char* text, const char* what) {
  if (text == nullptr) return json::object();
  json node = json::parse(text, nullptr, false);
  if (node.is_discarded() || !node.is_object()) {
    throw Error(ErrorCode::Parse,
                std::string(what) + " must be a JSON object");
  }
  return node;
}

ScenarioConfig scenario_from_json(const json& node) {
  ScenarioConfig scenario;
  if (node.contains("effect")) {
    scenario.effect = parse_effect(node.at("effect").get<std::string>());
  }
  if (node.contains("shift")) {
    scenario.shift = parse_shift(node.at("shift").get<std::string>());
  }
  if (node.contains("n")) scenario.n = node.at("n").get<std::size_t>();
  if (node.contains("n_hist")) {
    scenario.n_hist = node.at("n_hist").get<std::size_t>();
  }
  scenario.validate();
  return scenario;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out) {
    throw Error(ErrorCode::Io, "failed while writing '" + path + "'");
  }
}

}  // namespace

/// One of the three dataset shapes; exactly one member is engaged.
struct rcta_dataset {
  std::optional<TrialDataset> trial;
  std::optional<HistoricalDataset> historical;
  std::optional<AugmentedTrialDataset> augmented;

  const TrialDataset& as_trial() const {
    if (trial) return *trial;
    if (augmented) return augmented->trial;
    throw Error(ErrorCode::InvalidArgument,
                "this operation needs a trial dataset, got a historical one");
  }
  const HistoricalDataset& as_historical() const {
    if (historical) return *historical;
    throw Error(ErrorCode::InvalidArgument,
                "this operation needs a historical dataset");
  }
  const AugmentedTrialDataset& as_augmented() const {
    if (augmented) return *augmented;
    throw Error(ErrorCode::InvalidArgument,
                "this operation needs an augmented (simulated) trial "
                "dataset carrying truth columns");
  }
};

struct rcta_result {
  EstimateResult value;
};

extern "C" {

const char* rcta_version(void) { return "0.1.0"; }

const char* rcta_last_error(void) { return g_last_error.c_str(); }

rcta_status rcta_trial_from_csv(const char* path, rcta_dataset** out) {
  return guarded([&]() -> rcta_status {
    if (path == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    auto handle = std::make_unique<rcta_dataset>();
    handle->trial = read_trial_csv(path);
    *out = handle.release();
    return RCTA_OK;
  });
}

rcta_status rcta_historical_from_csv(const char* path, rcta_dataset** out) {
  return guarded([&]() -> rcta_status {
    if (path == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    auto handle = std::make_unique<rcta_dataset>();
    handle->historical = read_historical_csv(path);
    *out = handle.release();
    return RCTA_OK;
  });
}

rcta_status rcta_augmented_from_csv(const char* path, rcta_dataset** out) {
  return guarded([&]() -> rcta_status {
    if (path == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    auto handle = std::make_unique<rcta_dataset>();
    handle->augmented = read_augmented_trial_csv(path);
    *out = handle.release();
    return RCTA_OK;
  });
}

rcta_status rcta_trial_from_arrays(const double* y, const double* a,
                                   const double* w, size_t n, size_t p,
                                   rcta_dataset** out) {
  return guarded([&]() -> rcta_status {
    if (y == nullptr || a == nullptr || (p > 0 && w == nullptr) ||
        out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    TrialDataset data;
    data.y.assign(y, y + n);
    data.a.assign(a, a + n);
    data.w = Matrix(n, p);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < p; ++j) data.w(i, j) = w[i * p + j];
    }
    data.validate();
    auto handle = std::make_unique<rcta_dataset>();
    handle->trial = std::move(data);
    *out = handle.release();
    return RCTA_OK;
  });
}

rcta_status rcta_historical_from_arrays(const double* y, const double* w,
                                        size_t n, size_t p,
                                        rcta_dataset** out) {
  return guarded([&]() -> rcta_status {
    if (y == nullptr || (p > 0 && w == nullptr) || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    HistoricalDataset data;
    data.y.assign(y, y + n);
    data.w = Matrix(n, p);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < p; ++j) data.w(i, j) = w[i * p + j];
    }
    data.validate();
    auto handle = std::make_unique<rcta_dataset>();
    handle->historical = std::move(data);
    *out = handle.release();
    return RCTA_OK;
  });
}

rcta_status rcta_dataset_rows(const rcta_dataset* dataset, size_t* out) {
  return guarded([&]() -> rcta_status {
    if (dataset == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    if (dataset->trial) *out = dataset->trial->n();
    else if (dataset->historical) *out = dataset->historical->n();
    else *out = dataset->augmented->n();
    return RCTA_OK;
  });
}

rcta_status rcta_dataset_covariates(const rcta_dataset* dataset, size_t* out) {
  return guarded([&]() -> rcta_status {
    if (dataset == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    if (dataset->trial) *out = dataset->trial->p();
    else if (dataset->historical) *out = dataset->historical->w.cols();
    else *out = dataset->augmented->trial.p();
    return RCTA_OK;
  });
}

void rcta_dataset_free(rcta_dataset* dataset) { delete dataset; }

rcta_status rcta_estimate(const rcta_dataset* trial,
                          const rcta_dataset* historical,
                          const char* options_json, rcta_result** out) {
  return guarded([&]() -> rcta_status {
    if (trial == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    const json options = parse_json_object(options_json, "options");
    if (!options.contains("estimator")) {
      return fail(RCTA_ERR_INVALID_ARGUMENT,
                  "options must name an \"estimator\"");
    }
    const std::string id = options.at("estimator").get<std::string>();
    if (!is_estimator_id(id)) {
      return fail(RCTA_ERR_INVALID_ARGUMENT,
                  "unknown estimator identifier '" + id + "'");
    }
    const double alpha = options.value("alpha", 0.05);
    const std::uint64_t seed = options.value("seed", std::uint64_t{12345});
    const std::size_t cross_fit_folds =
        options.value("cross_fit_folds", std::size_t{10});
    const bool score_only = options.value("score_only", false);
    const bool force_additive = options.value("force_additive", false);

    AdjustConfig config;
    config.sl_folds = options.value("sl_folds", std::size_t{10});
    config.seed = Rng::derive_seed(seed, 2);
    if (options.contains("learners")) {
      config.candidates =
          parse_learner_specs_json(options.at("learners").dump());
    }

    EstimateResult result;
    if (id == "unadjusted") {
      result = unadjusted_estimate(trial->as_trial(), alpha);
    } else if (id == "ancova") {
      const TrialDataset& data = trial->as_trial();
      DesignSpec spec;
      spec.covariate_columns.resize(data.p());
      for (std::size_t j = 0; j < data.p(); ++j) spec.covariate_columns[j] = j;
      result = ancova_estimate(data, spec, alpha);
    } else if (id == "prog-historical") {
      if (historical == nullptr) {
        return fail(RCTA_ERR_INVALID_ARGUMENT,
                    "estimator 'prog-historical' needs a historical dataset");
      }
      PrognosticOptions prog;
      prog.include_raw_covariates = options.value("raw_covariates", false);
      result = prognostic_adjust_estimate(trial->as_trial(),
                                          historical->as_historical(), config,
                                          prog, alpha);
    } else if (id == "oracle") {
      result = oracle_adjust_estimate(trial->as_augmented(), alpha);
    } else {
      const TrialDataset& data = trial->as_trial();
      const CrossFitPlan plan =
          make_cross_fit_plan(data, CrossFitScheme::VFold, cross_fit_folds,
                              Rng::derive_seed(seed, 1));
      if (id == "within-trial") {
        WithinTrialOptions wt;
        wt.include_raw_covariates = !score_only;
        result = within_trial_estimate(data, config, plan, wt, alpha);
      } else if (id == "tmle") {
        result = tmle_estimate(data, config, plan,
                               resolve_tmle_submodel(data, force_additive),
                               alpha, "tmle");
      } else {  // tmle-linear
        result = tmle_estimate(data, config, plan,
                               TmleSubmodel::LinearFluctuation, alpha,
                               "tmle-linear");
      }
    }
    *out = new rcta_result{std::move(result)};
    return RCTA_OK;
  });
}

rcta_status rcta_result_value(const rcta_result* result, const char* field,
                              double* out) {
  return guarded([&]() -> rcta_status {
    if (result == nullptr || field == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    const EstimateResult& r = result->value;
    const std::string name(field);
    if (name == "psi_hat") *out = r.psi_hat;
    else if (name == "psi1_hat") *out = r.psi1_hat;
    else if (name == "psi0_hat") *out = r.psi0_hat;
    else if (name == "se") *out = r.se;
    else if (name == "ci_lower") *out = r.ci_lower;
    else if (name == "ci_upper") *out = r.ci_upper;
    else if (name == "p_value") *out = r.p_value;
    else if (name == "alpha") *out = r.alpha;
    else {
      return fail(RCTA_ERR_INVALID_ARGUMENT,
                  "unknown result field '" + name + "'");
    }
    return RCTA_OK;
  });
}

rcta_status rcta_result_json(const rcta_result* result, char** out) {
  return guarded([&]() -> rcta_status {
    if (result == nullptr || out == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    *out = copy_string(to_json(result->value));
    return RCTA_OK;
  });
}

void rcta_result_free(rcta_result* result) { delete result; }

rcta_status rcta_run_study(const char* kind, const char* plan_json,
                           const char* csv_path, const char* svg_path) {
  return guarded([&]() -> rcta_status {
    if (kind == nullptr || csv_path == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    SimulationPlan plan =
        plan_json == nullptr ? SimulationPlan{} : parse_plan_json(plan_json);
    const std::string study(kind);
    std::vector<MetricsRow> rows;
    if (study == "scenario") {
      if (plan.scenarios.empty()) {
        plan.scenarios = scenario_study_plan().scenarios;
      }
      rows = run_scenario_study(plan);
    } else if (study == "sweep") {
      if (plan.sweep_n.empty()) plan.sweep_n = default_sweep_grid();
      if (plan.scenarios.empty()) {
        plan.scenarios = sweep_study_plan().scenarios;
      }
      rows = run_sweep_study(plan);
    } else {
      return fail(RCTA_ERR_INVALID_ARGUMENT,
                  "study kind must be \"scenario\" or \"sweep\"");
    }
    write_text_file(csv_path, metrics_csv(rows));
    if (svg_path != nullptr) {
      const std::string svg =
          study == "sweep" ? study_svg(rows, "power", "coverage")
                           : study_svg(rows, "mean_est_se", "empirical_se");
      write_text_file(svg_path, svg);
    }
    return RCTA_OK;
  });
}

rcta_status rcta_dump_dgp(const char* scenario_json, uint64_t seed,
                          const char* trial_csv_path,
                          const char* historical_csv_path) {
  return guarded([&]() -> rcta_status {
    if (trial_csv_path == nullptr) {
      return fail(RCTA_ERR_INVALID_ARGUMENT, "null pointer argument");
    }
    const ScenarioConfig scenario =
        scenario_from_json(parse_json_object(scenario_json, "scenario"));
    Rng trial_rng(Rng::derive_seed(seed, 1));
    const AugmentedTrialDataset data =
        sample_trial(scenario.n, scenario.effect, trial_rng);
    write_augmented_trial_csv(data, trial_csv_path);
    if (historical_csv_path != nullptr) {
      Rng hist_rng(Rng::derive_seed(seed, 2));
      const HistoricalDataset historical =
          sample_historical(scenario.n_hist, scenario.shift, hist_rng);
      write_historical_csv(historical, historical_csv_path);
    }
    return RCTA_OK;
  });
}

void rcta_string_free(char* text) { delete[] text; }

}  // extern "C"
