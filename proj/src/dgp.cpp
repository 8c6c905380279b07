#include "dgp.hpp"

#include <array>
#include <cmath>

#include "error.hpp"

namespace rctadjust {

namespace {

constexpr std::size_t kCovariates = 7;

/// Seed of the ground-truth Monte Carlo integral; frozen so the reported
/// truth is one reproducible number.
constexpr std::uint64_t kTruthOracleSeed = 424242;

double indicator(bool condition) { return condition ? 1.0 : 0.0; }

/// The four terms that activate only under shifted historical marginals
/// (in-trial draws always have W1 > -2 and U < 1, keeping them at zero).
double shift_terms(std::span<const double> w, double u, double sin_w2) {
  return -4.1 * indicator(w[0] < -4.1) * sin_w2 -
         4.1 * indicator(w[0] < -6.1) * sin_w2 -
         4.1 * indicator(u > 1.1) * sin_w2 -
         4.1 * indicator(u > 1.55) * sin_w2;
}

void check_point(std::span<const double> w, double u) {
  if (w.size() != kCovariates) {
    throw Error(ErrorCode::InvalidArgument,
                "conditional means take exactly 7 covariates; got " +
                    std::to_string(w.size()));
  }
  for (const double v : w) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument,
                  "conditional means require finite covariates");
    }
  }
  if (!std::isfinite(u)) {
    throw Error(ErrorCode::InvalidArgument,
                "conditional means require a finite latent covariate");
  }
}

/// Draws the covariate block (W1..W7, U) in order, honoring the shift.
std::pair<std::array<double, kCovariates>, double> draw_covariates(
    Rng& rng, HistoricalShift shift) {
  std::array<double, kCovariates> w;
  w[0] = shift == HistoricalShift::ObsSmall  ? rng.uniform(-4.0, -1.0)
         : shift == HistoricalShift::ObsLarge ? rng.uniform(-7.0, -4.0)
                                              : rng.uniform(-2.0, 1.0);
  w[1] = rng.uniform(-2.0, 1.0);
  w[2] = rng.normal(0.0, 3.0);
  w[3] = rng.exponential(0.8);
  w[4] = rng.gamma(5.0, 10.0);
  w[5] = rng.uniform(1.0, 2.0);
  w[6] = rng.uniform(1.0, 2.0);
  const double u = shift == HistoricalShift::UnobsSmall ? rng.uniform(0.5, 1.5)
                   : shift == HistoricalShift::UnobsLarge
                       ? rng.uniform(1.5, 2.5)
                       : rng.uniform01();
  return {w, u};
}

}  // namespace

std::string to_string(EffectScenario effect) {
  return effect == EffectScenario::Homogeneous ? "homogeneous"
                                               : "heterogeneous";
}

std::string to_string(HistoricalShift shift) {
  switch (shift) {
    case HistoricalShift::None:
      return "none";
    case HistoricalShift::ObsSmall:
      return "obs-small";
    case HistoricalShift::ObsLarge:
      return "obs-large";
    case HistoricalShift::UnobsSmall:
      return "unobs-small";
    case HistoricalShift::UnobsLarge:
      return "unobs-large";
  }
  throw Error(ErrorCode::Internal, "unreachable shift label");
}

EffectScenario parse_effect(const std::string& text) {
  if (text == "homogeneous") return EffectScenario::Homogeneous;
  if (text == "heterogeneous") return EffectScenario::Heterogeneous;
  throw Error(ErrorCode::InvalidArgument,
              "unknown effect scenario '" + text +
                  "' (expected homogeneous or heterogeneous)");
}

HistoricalShift parse_shift(const std::string& text) {
  if (text == "none") return HistoricalShift::None;
  if (text == "obs-small") return HistoricalShift::ObsSmall;
  if (text == "obs-large") return HistoricalShift::ObsLarge;
  if (text == "unobs-small") return HistoricalShift::UnobsSmall;
  if (text == "unobs-large") return HistoricalShift::UnobsLarge;
  throw Error(ErrorCode::InvalidArgument,
              "unknown historical shift '" + text +
                  "' (expected none, obs-small, obs-large, unobs-small, or "
                  "unobs-large)");
}

void ScenarioConfig::validate() const {
  if (n < 4) {
    throw Error(ErrorCode::InvalidArgument,
                "scenario trial size must be at least 4");
  }
}

std::string scenario_label(const ScenarioConfig& config) {
  std::string label = to_string(config.effect);
  if (config.shift != HistoricalShift::None) {
    label += "+" + to_string(config.shift);
  }
  return label;
}

double m0(std::span<const double> w, double u) {
  check_point(w, u);
  const double sin_w2 = std::sin(std::fabs(w[1]));
  return 4.1 * sin_w2 + 1.5 * indicator(std::fabs(w[3]) > 0.25) +
         1.5 * std::sin(std::fabs(w[4])) +
         1.4 * indicator(std::fabs(w[2]) > 2.5) + shift_terms(w, u, sin_w2);
}

double m1(std::span<const double> w, double u, EffectScenario effect) {
  if (effect == EffectScenario::Homogeneous) {
    return kHomogeneousAte + m0(w, u);
  }
  check_point(w, u);
  const double sin_w2 = std::sin(std::fabs(w[1]));
  return 4.3 * sin_w2 * sin_w2 + 1.3 * indicator(std::fabs(w[3]) > 0.25) +
         4.1 * indicator(w[1] > 0.0) * std::sin(std::fabs(w[4])) +
         1.6 * std::sin(std::fabs(w[5])) +
         1.4 * indicator(std::fabs(w[2]) > 2.5) + shift_terms(w, u, sin_w2);
}

AugmentedTrialDataset sample_trial(std::size_t n, EffectScenario effect,
                                   Rng& rng) {
  if (n < 4) {
    throw Error(ErrorCode::InvalidArgument,
                "trial samples need at least 4 rows");
  }
  AugmentedTrialDataset data;
  data.trial.w = Matrix(n, kCovariates);
  data.trial.a.resize(n);
  data.trial.y.resize(n);
  data.u.resize(n);
  data.y0.resize(n);
  data.y1.resize(n);
  data.m0.resize(n);
  data.m1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [w, u] = draw_covariates(rng, HistoricalShift::None);
    for (std::size_t j = 0; j < kCovariates; ++j) data.trial.w(i, j) = w[j];
    data.u[i] = u;
    data.trial.a[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    data.m0[i] = m0(w, u);
    data.m1[i] = m1(w, u, effect);
    data.y0[i] = data.m0[i] + rng.normal(0.0, 1.3);
    data.y1[i] = data.m1[i] + rng.normal(0.0, 1.3);
    data.trial.y[i] = data.trial.a[i] == 1.0 ? data.y1[i] : data.y0[i];
  }
  return data;
}

HistoricalDataset sample_historical(std::size_t n_hist, HistoricalShift shift,
                                    Rng& rng) {
  HistoricalDataset data;
  data.w = Matrix(n_hist, kCovariates);
  data.y.resize(n_hist);
  for (std::size_t i = 0; i < n_hist; ++i) {
    const auto [w, u] = draw_covariates(rng, shift);
    for (std::size_t j = 0; j < kCovariates; ++j) data.w(i, j) = w[j];
    data.y[i] = m0(w, u) + rng.normal(0.0, 1.3);
  }
  return data;
}

TrueAte true_ate(EffectScenario effect) {
  if (effect == EffectScenario::Homogeneous) {
    return {kHomogeneousAte, 0.0};
  }
  static const TrueAte heterogeneous = [] {
    constexpr std::size_t kDraws = 10'000'000;
    Rng rng(kTruthOracleSeed);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < kDraws; ++i) {
      const auto [w, u] = draw_covariates(rng, HistoricalShift::None);
      const double diff =
          m1(w, u, EffectScenario::Heterogeneous) - m0(w, u);
      const double delta = diff - mean;
      mean += delta / static_cast<double>(i + 1);
      m2 += delta * (diff - mean);
    }
    const double variance = m2 / static_cast<double>(kDraws - 1);
    return TrueAte{mean,
                   std::sqrt(variance / static_cast<double>(kDraws))};
  }();
  return heterogeneous;
}

}  // namespace rctadjust
