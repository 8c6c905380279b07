#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cross_fit.hpp"
#include "error.hpp"
#include "rng.hpp"

namespace rctadjust {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Substream tags keeping the trial draws, historical draws, and the two
// learner-seeding streams independent within one replication.
enum StreamTag : std::uint64_t {
  kTrialTag = 1,
  kHistoricalTag = 2,
  kCrossFitTag = 3,
  kHistoricalFitTag = 4,
};

std::uint64_t stream_seed(std::uint64_t master, std::size_t rep,
                          StreamTag tag) {
  const std::uint64_t per_rep = Rng::derive_seed(master, rep);
  return Rng::derive_seed(per_rep, tag);
}

DesignSpec raw_covariate_design(const TrialDataset& data) {
  DesignSpec spec;
  spec.covariate_columns.resize(data.p());
  for (std::size_t j = 0; j < data.p(); ++j) {
    spec.covariate_columns[j] = j;
  }
  return spec;
}

}  // namespace

const std::vector<std::string>& estimator_ids() {
  static const std::vector<std::string> ids = {
      "unadjusted",   "ancova", "prog-historical", "within-trial",
      "tmle",         "tmle-linear", "oracle"};
  return ids;
}

bool is_estimator_id(const std::string& id) {
  const auto& ids = estimator_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool estimator_needs_historical(const std::string& id) {
  return id == "prog-historical";
}

bool estimator_needs_cross_fit(const std::string& id) {
  return id == "within-trial" || id == "tmle" || id == "tmle-linear";
}

void SimulationPlan::validate() const {
  if (reps < 1) throw_invalid("plan requires at least one replication");
  if (estimators.empty()) throw_invalid("plan lists no estimators");
  for (const auto& id : estimators) {
    if (!is_estimator_id(id)) {
      throw_invalid("unknown estimator identifier '" + id + "'");
    }
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw_invalid("alpha must lie strictly between 0 and 1");
  }
  for (std::size_t i = 1; i < sweep_n.size(); ++i) {
    if (sweep_n[i] <= sweep_n[i - 1]) {
      throw_invalid("sweep sizes must be strictly increasing");
    }
  }
  if (workers < 1) throw_invalid("worker count must be at least 1");
  for (const auto& scenario : scenarios) scenario.validate();
  if (candidates.empty()) throw_invalid("plan lists no candidate learners");
  for (const auto& spec : candidates) validate_learner_spec(spec);
  if (sl_folds < 2) throw_invalid("super-learner folds must be at least 2");
  if (cross_fit_folds < 2) {
    throw_invalid("cross-fit folds must be at least 2");
  }
}

std::vector<std::size_t> default_sweep_grid() {
  std::vector<std::size_t> grid;
  for (std::size_t n = 50; n <= 200; n += 10) grid.push_back(n);
  for (std::size_t n = 225; n <= 400; n += 25) grid.push_back(n);
  return grid;
}

SimulationPlan scenario_study_plan() {
  SimulationPlan plan;
  ScenarioConfig base;
  base.n = 200;
  base.n_hist = 4000;
  base.effect = EffectScenario::Homogeneous;
  base.shift = HistoricalShift::None;
  plan.scenarios.push_back(base);
  base.effect = EffectScenario::Heterogeneous;
  plan.scenarios.push_back(base);
  for (const auto shift :
       {HistoricalShift::ObsSmall, HistoricalShift::ObsLarge,
        HistoricalShift::UnobsSmall, HistoricalShift::UnobsLarge}) {
    base.shift = shift;
    plan.scenarios.push_back(base);
  }
  return plan;
}

SimulationPlan sweep_study_plan() {
  SimulationPlan plan;
  ScenarioConfig base;
  base.effect = EffectScenario::Heterogeneous;
  base.shift = HistoricalShift::None;
  plan.scenarios.push_back(base);
  plan.sweep_n = default_sweep_grid();
  return plan;
}

SimulationPlan smoke_profile() {
  SimulationPlan plan = scenario_study_plan();
  plan.reps = 50;
  for (auto& scenario : plan.scenarios) {
    scenario.n = 100;
    scenario.n_hist = 1000;
  }
  return plan;
}

std::uint64_t trial_stream_seed(std::uint64_t master, std::size_t rep) {
  return stream_seed(master, rep, kTrialTag);
}
std::uint64_t historical_stream_seed(std::uint64_t master, std::size_t rep) {
  return stream_seed(master, rep, kHistoricalTag);
}
std::uint64_t cross_fit_stream_seed(std::uint64_t master, std::size_t rep) {
  return stream_seed(master, rep, kCrossFitTag);
}
std::uint64_t historical_fit_stream_seed(std::uint64_t master,
                                         std::size_t rep) {
  return stream_seed(master, rep, kHistoricalFitTag);
}

namespace {

/// Dispatches one estimator id on shared per-replication inputs. The
/// nuisance objects are optional because their construction may itself have
/// failed; consumers of a missing nuisance inherit that failure.
struct RepInputs {
  const AugmentedTrialDataset& data;
  const std::optional<HistoricalDataset>& historical;
  const std::string& historical_error;
  const std::optional<CrossFitResult>& mu;
  const std::string& mu_error;
  const ReplicationOptions& options;
  std::uint64_t master_seed = 0;
  std::size_t rep_index = 0;
};

EstimateResult dispatch_estimator(const std::string& id,
                                  const RepInputs& in) {
  const double alpha = in.options.alpha;
  if (id == "unadjusted") return unadjusted_estimate(in.data.trial, alpha);
  if (id == "ancova") {
    return ancova_estimate(in.data.trial, raw_covariate_design(in.data.trial),
                           alpha);
  }
  if (id == "oracle") return oracle_adjust_estimate(in.data, alpha);
  if (id == "prog-historical") {
    if (!in.historical) {
      throw Error(ErrorCode::Estimation,
                  "historical sampling failed: " + in.historical_error);
    }
    AdjustConfig config;
    config.candidates = in.options.candidates;
    config.sl_folds = in.options.sl_folds;
    config.seed = historical_fit_stream_seed(in.master_seed, in.rep_index);
    return prognostic_adjust_estimate(in.data.trial, *in.historical, config,
                                      PrognosticOptions{}, alpha);
  }
  if (!in.mu) {
    throw Error(ErrorCode::Estimation, "cross-fit failed: " + in.mu_error);
  }
  if (id == "within-trial") {
    return within_trial_from_scores(in.data.trial, *in.mu,
                                    WithinTrialOptions{}, alpha);
  }
  if (id == "tmle") {
    return tmle_from_mu(in.data.trial, *in.mu, TmleSubmodel::AdditiveEps,
                        alpha, "tmle");
  }
  if (id == "tmle-linear") {
    return tmle_from_mu(in.data.trial, *in.mu, TmleSubmodel::LinearFluctuation,
                        alpha, "tmle-linear");
  }
  throw_invalid("unknown estimator identifier '" + id + "'");
}

}  // namespace

ReplicationOutcome run_replication(const ScenarioConfig& scenario,
                                   const std::vector<std::string>& estimators,
                                   std::size_t rep_index,
                                   std::uint64_t master_seed,
                                   const ReplicationOptions& options) {
  scenario.validate();
  ReplicationOutcome out;
  out.rep_index = rep_index;
  out.psi_true = true_ate(scenario.effect).value;
  out.cells.resize(estimators.size());

  const auto fail_all = [&](const std::string& message) {
    for (auto& cell : out.cells) {
      cell.ok = false;
      cell.error = message;
    }
  };

  try {
    Rng trial_rng(trial_stream_seed(master_seed, rep_index));
    const AugmentedTrialDataset data =
        sample_trial(scenario.n, scenario.effect, trial_rng);

    std::optional<HistoricalDataset> historical;
    std::string historical_error;
    if (std::any_of(estimators.begin(), estimators.end(),
                    estimator_needs_historical)) {
      try {
        Rng hist_rng(historical_stream_seed(master_seed, rep_index));
        historical =
            sample_historical(scenario.n_hist, scenario.shift, hist_rng);
        out.historical_sampled = true;
      } catch (const std::exception& e) {
        historical_error = e.what();
      }
    }

    std::optional<CrossFitResult> mu;
    std::string mu_error;
    if (std::any_of(estimators.begin(), estimators.end(),
                    estimator_needs_cross_fit)) {
      try {
        const CrossFitPlan plan = make_cross_fit_plan(
            data.trial, CrossFitScheme::VFold, options.cross_fit_folds,
            cross_fit_stream_seed(master_seed, rep_index));
        mu = cross_fit_predict(options.candidates, data.trial, plan,
                               options.sl_folds);
      } catch (const std::exception& e) {
        mu_error = e.what();
      }
    }

    const RepInputs inputs{data,     historical, historical_error, mu,
                           mu_error, options,    master_seed,      rep_index};
    for (std::size_t i = 0; i < estimators.size(); ++i) {
      try {
        out.cells[i].result = dispatch_estimator(estimators[i], inputs);
        out.cells[i].ok = true;
      } catch (const std::exception& e) {
        out.cells[i].ok = false;
        out.cells[i].error = e.what();
      }
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
  }
  return out;
}

MetricsRow aggregate(const std::vector<ReplicationOutcome>& outcomes,
                     std::size_t estimator_index, const std::string& estimator,
                     const std::string& scenario, std::size_t n,
                     double alpha) {
  MetricsRow row;
  row.estimator = estimator;
  row.scenario = scenario;
  row.n = n;
  row.mean_est_se = kNan;
  row.empirical_se = kNan;
  row.power = kNan;
  row.coverage = kNan;
  row.mean_bias = kNan;

  std::vector<const EstimateResult*> ok;
  ok.reserve(outcomes.size());
  for (const auto& outcome : outcomes) {
    if (estimator_index >= outcome.cells.size()) {
      throw_invalid("estimator index out of range in aggregate");
    }
    const auto& cell = outcome.cells[estimator_index];
    if (cell.ok) {
      ok.push_back(&cell.result);
    } else {
      ++row.failures;
    }
  }
  row.reps_used = ok.size();
  if (row.reps_used < 2) return row;

  const double psi_true = outcomes.front().psi_true;
  const double m = static_cast<double>(ok.size());
  double mean_se = 0.0, mean_psi = 0.0;
  std::size_t rejections = 0, covered = 0;
  for (const EstimateResult* r : ok) {
    mean_se += r->se;
    mean_psi += r->psi_hat;
    if (r->p_value < alpha) ++rejections;
    if (r->ci_lower <= psi_true && psi_true <= r->ci_upper) ++covered;
  }
  mean_se /= m;
  mean_psi /= m;
  double ss = 0.0;
  for (const EstimateResult* r : ok) {
    const double d = r->psi_hat - mean_psi;
    ss += d * d;
  }
  row.mean_est_se = mean_se;
  row.empirical_se = std::sqrt(ss / (m - 1.0));
  row.power = static_cast<double>(rejections) / m;
  row.coverage = static_cast<double>(covered) / m;
  row.mean_bias = mean_psi - psi_true;
  return row;
}

std::vector<ReplicationOutcome> run_replications(const ScenarioConfig& scenario,
                                                 const SimulationPlan& plan) {
  plan.validate();
  scenario.validate();
  const ReplicationOptions options{plan.alpha, plan.candidates, plan.sl_folds,
                                   plan.cross_fit_folds};
  std::vector<std::optional<ReplicationOutcome>> slots(plan.reps);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.reps) return;
      slots[i] = run_replication(scenario, plan.estimators, i,
                                 plan.master_seed, options);
    }
  };
  const std::size_t worker_count =
      std::min<std::size_t>(std::max<std::size_t>(plan.workers, 1), plan.reps);
  if (worker_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(worker_count);
    for (std::size_t t = 0; t < worker_count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ReplicationOutcome> outcomes;
  outcomes.reserve(plan.reps);
  for (auto& slot : slots) outcomes.push_back(std::move(*slot));
  return outcomes;
}

std::vector<MetricsRow> run_scenario_study(const SimulationPlan& plan) {
  plan.validate();
  if (plan.scenarios.empty()) {
    throw_invalid("scenario study requires at least one scenario");
  }
  std::vector<MetricsRow> rows;
  for (const auto& scenario : plan.scenarios) {
    const auto outcomes = run_replications(scenario, plan);
    for (std::size_t e = 0; e < plan.estimators.size(); ++e) {
      rows.push_back(aggregate(outcomes, e, plan.estimators[e],
                               scenario_label(scenario), scenario.n,
                               plan.alpha));
    }
  }
  return rows;
}

std::vector<MetricsRow> run_sweep_study(const SimulationPlan& plan) {
  plan.validate();
  if (plan.sweep_n.empty()) {
    throw_invalid("sweep study requires a list of trial sizes");
  }
  ScenarioConfig base;
  if (!plan.scenarios.empty()) base = plan.scenarios.front();
  std::vector<MetricsRow> rows;
  for (const std::size_t n : plan.sweep_n) {
    ScenarioConfig scenario = base;
    scenario.n = n;
    scenario.n_hist = 10 * n;
    const auto outcomes = run_replications(scenario, plan);
    for (std::size_t e = 0; e < plan.estimators.size(); ++e) {
      rows.push_back(aggregate(outcomes, e, plan.estimators[e],
                               scenario_label(scenario), n, plan.alpha));
    }
  }
  return rows;
}

namespace {

std::string format_metric(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "estimator,scenario,n,mean_est_se,empirical_se,power,coverage,"
         "mean_bias,reps_used,failures\n";
  for (const auto& row : rows) {
    out << row.estimator << ',' << row.scenario << ',' << row.n << ','
        << format_metric(row.mean_est_se) << ','
        << format_metric(row.empirical_se) << ',' << format_metric(row.power)
        << ',' << format_metric(row.coverage) << ','
        << format_metric(row.mean_bias) << ',' << row.reps_used << ','
        << row.failures << '\n';
  }
  return out.str();
}

namespace {

double metric_value(const MetricsRow& row, const std::string& metric) {
  if (metric == "mean_est_se") return row.mean_est_se;
  if (metric == "empirical_se") return row.empirical_se;
  if (metric == "power") return row.power;
  if (metric == "coverage") return row.coverage;
  if (metric == "mean_bias") return row.mean_bias;
  throw_invalid("unknown metric '" + metric + "'");
}

struct ChartLayout {
  std::vector<std::string> x_labels;               // one per x slot
  std::vector<std::pair<std::string, std::vector<std::pair<std::size_t, double>>>>
      series;  // estimator -> (x slot, value)
};

ChartLayout chart_layout(const std::vector<MetricsRow>& rows,
                         const std::string& metric) {
  ChartLayout layout;
  std::vector<std::pair<std::string, std::size_t>> slots;  // scenario, n
  bool n_varies = false;
  for (const auto& row : rows) {
    const std::pair<std::string, std::size_t> key{row.scenario, row.n};
    if (std::find(slots.begin(), slots.end(), key) == slots.end()) {
      slots.push_back(key);
      if (slots.size() > 1 && slots.front().second != row.n) n_varies = true;
    }
  }
  for (const auto& [scenario, n] : slots) {
    layout.x_labels.push_back(n_varies ? std::to_string(n) : scenario);
  }
  for (const auto& row : rows) {
    const double v = metric_value(row, metric);
    if (std::isnan(v)) continue;
    auto series = std::find_if(
        layout.series.begin(), layout.series.end(),
        [&](const auto& s) { return s.first == row.estimator; });
    if (series == layout.series.end()) {
      layout.series.push_back({row.estimator, {}});
      series = std::prev(layout.series.end());
    }
    const std::pair<std::string, std::size_t> key{row.scenario, row.n};
    const std::size_t slot =
        static_cast<std::size_t>(std::find(slots.begin(), slots.end(), key) -
                                 slots.begin());
    series->second.push_back({slot, v});
  }
  return layout;
}

const char* series_color(std::size_t index) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string fmt_svg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void append_panel(std::ostringstream& out, const ChartLayout& layout,
                  const std::string& title, double x0) {
  constexpr double kWidth = 420.0, kHeight = 330.0;
  constexpr double kLeft = 58.0, kRight = 12.0, kTop = 34.0, kBottom = 64.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& s : layout.series) {
    for (const auto& [slot, v] : s.second) {
      lo = any ? std::min(lo, v) : std::min(0.0, v);
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
  }
  if (!any) hi = 1.0;
  if (hi <= lo) hi = lo + 1.0;
  hi += 0.05 * (hi - lo);

  const std::size_t slots = std::max<std::size_t>(layout.x_labels.size(), 1);
  const auto x_of = [&](std::size_t slot) {
    if (slots == 1) return x0 + kLeft + plot_w / 2.0;
    return x0 + kLeft + plot_w * static_cast<double>(slot) /
                            static_cast<double>(slots - 1);
  };
  const auto y_of = [&](double v) {
    return kTop + plot_h * (1.0 - (v - lo) / (hi - lo));
  };

  out << "<g>\n";
  out << "<text x=\"" << fmt_svg(x0 + kLeft + plot_w / 2) << "\" y=\"20\" "
      << "text-anchor=\"middle\" font-size=\"14\" font-weight=\"bold\">"
      << title << "</text>\n";
  // Axes.
  out << "<line x1=\"" << fmt_svg(x0 + kLeft) << "\" y1=\"" << fmt_svg(kTop)
      << "\" x2=\"" << fmt_svg(x0 + kLeft) << "\" y2=\""
      << fmt_svg(kTop + plot_h) << "\" stroke=\"#333\"/>\n";
  out << "<line x1=\"" << fmt_svg(x0 + kLeft) << "\" y1=\""
      << fmt_svg(kTop + plot_h) << "\" x2=\"" << fmt_svg(x0 + kLeft + plot_w)
      << "\" y2=\"" << fmt_svg(kTop + plot_h) << "\" stroke=\"#333\"/>\n";
  // Y ticks.
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    out << "<text x=\"" << fmt_svg(x0 + kLeft - 6) << "\" y=\""
        << fmt_svg(y_of(v) + 4) << "\" text-anchor=\"end\" font-size=\"10\">"
        << fmt_svg(v) << "</text>\n";
  }
  // X labels (thinned when crowded).
  const std::size_t step = slots > 12 ? (slots + 11) / 12 : 1;
  for (std::size_t slot = 0; slot < layout.x_labels.size();
       slot += step) {
    out << "<text x=\"" << fmt_svg(x_of(slot)) << "\" y=\""
        << fmt_svg(kTop + plot_h + 14) << "\" text-anchor=\"end\" "
        << "font-size=\"9\" transform=\"rotate(-35 " << fmt_svg(x_of(slot))
        << " " << fmt_svg(kTop + plot_h + 14) << ")\">"
        << layout.x_labels[slot] << "</text>\n";
  }
  // Series.
  for (std::size_t s = 0; s < layout.series.size(); ++s) {
    const auto& [name, points] = layout.series[s];
    if (points.empty()) continue;
    out << "<polyline fill=\"none\" stroke=\"" << series_color(s)
        << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& [slot, v] : points) {
      out << fmt_svg(x_of(slot)) << ',' << fmt_svg(y_of(v)) << ' ';
    }
    out << "\"/>\n";
    for (const auto& [slot, v] : points) {
      out << "<circle cx=\"" << fmt_svg(x_of(slot)) << "\" cy=\""
          << fmt_svg(y_of(v)) << "\" r=\"2\" fill=\"" << series_color(s)
          << "\"/>\n";
    }
  }
  out << "</g>\n";
}

}  // namespace

std::string study_svg(const std::vector<MetricsRow>& rows,
                      const std::string& left_metric,
                      const std::string& right_metric) {
  const ChartLayout left = chart_layout(rows, left_metric);
  const ChartLayout right = chart_layout(rows, right_metric);

  // Legend entries: estimator order of first appearance across both panels.
  std::vector<std::string> names;
  for (const auto& layout : {std::cref(left), std::cref(right)}) {
    for (const auto& s : layout.get().series) {
      if (std::find(names.begin(), names.end(), s.first) == names.end()) {
        names.push_back(s.first);
      }
    }
  }

  std::ostringstream out;
  const double legend_h = 18.0 * ((names.size() + 3) / 4) + 8.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"840\" height=\""
      << fmt_svg(330.0 + legend_h) << "\" viewBox=\"0 0 840 "
      << fmt_svg(330.0 + legend_h) << "\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  append_panel(out, left, left_metric, 0.0);
  append_panel(out, right, right_metric, 420.0);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double lx = 58.0 + 190.0 * static_cast<double>(i % 4);
    const double ly = 330.0 + 14.0 + 18.0 * static_cast<double>(i / 4);
    out << "<rect x=\"" << fmt_svg(lx) << "\" y=\"" << fmt_svg(ly - 8)
        << "\" width=\"10\" height=\"10\" fill=\"" << series_color(i)
        << "\"/>\n";
    out << "<text x=\"" << fmt_svg(lx + 14) << "\" y=\"" << fmt_svg(ly + 1)
        << "\" font-size=\"11\">" << names[i] << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

namespace {

using nlohmann::json;

LearnerSpec learner_spec_from_json(const json& node) {
  if (!node.is_object() || !node.contains("name")) {
    throw Error(ErrorCode::Parse,
                "learner spec must be an object with a \"name\" key");
  }
  LearnerSpec spec;
  spec.name = node.at("name").get<std::string>();
  if (node.contains("hyperparameters")) {
    const json& params = node.at("hyperparameters");
    if (!params.is_object()) {
      throw Error(ErrorCode::Parse, "\"hyperparameters\" must be an object");
    }
    for (const auto& [key, value] : params.items()) {
      if (!value.is_number()) {
        throw Error(ErrorCode::Parse,
                    "hyperparameter '" + key + "' must be numeric");
      }
      spec.hyperparameters[key] = value.get<double>();
    }
  }
  validate_learner_spec(spec);
  return spec;
}

json parse_json_text(const std::string& text) {
  json node = json::parse(text, nullptr, false);
  if (node.is_discarded()) {
    throw Error(ErrorCode::Parse, "malformed JSON");
  }
  return node;
}

}  // namespace

std::vector<LearnerSpec> parse_learner_specs_json(const std::string& text) {
  const json node = parse_json_text(text);
  std::vector<LearnerSpec> specs;
  if (node.is_array()) {
    for (const auto& entry : node) specs.push_back(learner_spec_from_json(entry));
  } else {
    specs.push_back(learner_spec_from_json(node));
  }
  if (specs.empty()) {
    throw Error(ErrorCode::Parse, "learner list is empty");
  }
  return specs;
}

SimulationPlan parse_plan_json(const std::string& text) {
  const json node = parse_json_text(text);
  if (!node.is_object()) {
    throw Error(ErrorCode::Parse, "plan JSON must be an object");
  }
  SimulationPlan plan;
  try {
    if (node.contains("scenarios")) {
      plan.scenarios.clear();
      for (const auto& entry : node.at("scenarios")) {
        ScenarioConfig scenario;
        if (entry.contains("effect")) {
          scenario.effect = parse_effect(entry.at("effect").get<std::string>());
        }
        if (entry.contains("shift")) {
          scenario.shift = parse_shift(entry.at("shift").get<std::string>());
        }
        if (entry.contains("n")) scenario.n = entry.at("n").get<std::size_t>();
        if (entry.contains("n_hist")) {
          scenario.n_hist = entry.at("n_hist").get<std::size_t>();
        }
        plan.scenarios.push_back(scenario);
      }
    }
    if (node.contains("estimators")) {
      plan.estimators = node.at("estimators").get<std::vector<std::string>>();
    }
    if (node.contains("reps")) plan.reps = node.at("reps").get<std::size_t>();
    if (node.contains("master_seed")) {
      plan.master_seed = node.at("master_seed").get<std::uint64_t>();
    }
    if (node.contains("alpha")) plan.alpha = node.at("alpha").get<double>();
    if (node.contains("sweep_n")) {
      plan.sweep_n = node.at("sweep_n").get<std::vector<std::size_t>>();
    }
    if (node.contains("workers")) {
      plan.workers = node.at("workers").get<std::size_t>();
    }
    if (node.contains("learners")) {
      plan.candidates.clear();
      for (const auto& entry : node.at("learners")) {
        plan.candidates.push_back(learner_spec_from_json(entry));
      }
    }
    if (node.contains("sl_folds")) {
      plan.sl_folds = node.at("sl_folds").get<std::size_t>();
    }
    if (node.contains("cross_fit_folds")) {
      plan.cross_fit_folds = node.at("cross_fit_folds").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("plan JSON: ") + e.what());
  }
  plan.validate();
  return plan;
}

}  // namespace rctadjust
