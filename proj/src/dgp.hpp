#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "dataset.hpp"
#include "rng.hpp"

namespace rctadjust {

enum class EffectScenario { Homogeneous, Heterogeneous };

enum class HistoricalShift { None, ObsSmall, ObsLarge, UnobsSmall, UnobsLarge };

std::string to_string(EffectScenario effect);
std::string to_string(HistoricalShift shift);
EffectScenario parse_effect(const std::string& text);
HistoricalShift parse_shift(const std::string& text);

/// One simulation cell: effect surface, historical sampling shift, and the
/// two sample sizes.
struct ScenarioConfig {
  EffectScenario effect = EffectScenario::Heterogeneous;
  HistoricalShift shift = HistoricalShift::None;
  std::size_t n = 200;
  std::size_t n_hist = 4000;

  void validate() const;
};

/// "homogeneous", "heterogeneous", or "heterogeneous+obs-large" etc.
std::string scenario_label(const ScenarioConfig& config);

/// Effect size added to the control surface in the homogeneous scenario.
inline constexpr double kHomogeneousAte = 0.84;

/// Control-arm conditional mean m0(W, U); `w` must have 7 entries.
double m0(std::span<const double> w, double u);

/// Treated-arm conditional mean: homogeneous adds the constant effect to m0;
/// heterogeneous uses its own surface sharing m0's shift-activated terms.
double m1(std::span<const double> w, double u, EffectScenario effect);

/// Draws a complete simulated trial: seven observed covariates, the latent
/// U, randomized treatment, both potential outcomes with independent noise,
/// and the observed outcome by consistency. Per row the draw order is
/// W1..W7, U, A, noise(Y0), noise(Y1).
AugmentedTrialDataset sample_trial(std::size_t n, EffectScenario effect,
                                   Rng& rng);

/// Draws control-only historical data: Y = m0(W, U) + noise with exactly one
/// marginal (W1 or U) replaced according to `shift`. The effect scenario is
/// irrelevant to the sampled values (historical units are untreated) but is
/// accepted for symmetry with sample_trial.
HistoricalDataset sample_historical(std::size_t n_hist, HistoricalShift shift,
                                    Rng& rng);

/// Ground-truth average treatment effect under the trial marginals.
struct TrueAte {
  double value = 0.0;
  double mc_se = 0.0;  // Monte Carlo standard error (0 when exact)
};

/// Homogeneous: exactly the constant effect. Heterogeneous: a memoized
/// 10^7-draw Monte Carlo integral of m1 - m0 over the trial marginals with a
/// fixed internal seed, reported with its Monte Carlo standard error.
TrueAte true_ate(EffectScenario effect);

}  // namespace rctadjust
