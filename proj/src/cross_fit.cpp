#include "cross_fit.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "error.hpp"
#include "rng.hpp"
#include "super_learner.hpp"

namespace rctadjust {

namespace {

std::vector<std::size_t> shuffled(std::vector<std::size_t> items,
                                  std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j =
        static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(items[i - 1], items[j]);
  }
  return items;
}

}  // namespace

CrossFitPlan make_cross_fit_plan(const TrialDataset& data,
                                 CrossFitScheme scheme, std::size_t v,
                                 std::uint64_t seed) {
  data.validate();
  const std::size_t n = data.n();

  CrossFitPlan plan;
  plan.scheme = scheme;
  plan.seed = seed;

  if (scheme == CrossFitScheme::LeaveOneOut) {
    plan.v = n;
    plan.fold_of.resize(n);
    std::iota(plan.fold_of.begin(), plan.fold_of.end(), std::size_t{0});
    return plan;
  }

  if (v < 2) throw_invalid("cross-fit requires at least 2 folds");
  std::vector<std::size_t> treated;
  std::vector<std::size_t> control;
  for (std::size_t i = 0; i < n; ++i) {
    (data.a[i] == 1.0 ? treated : control).push_back(i);
  }
  if (v > treated.size() || v > control.size()) {
    throw_invalid(
        "stratified cross-fit requires at least v units in each arm (v=" +
        std::to_string(v) + ", treated=" + std::to_string(treated.size()) +
        ", control=" + std::to_string(control.size()) + ")");
  }

  plan.v = v;
  plan.fold_of.resize(n);
  const auto treated_order = shuffled(treated, Rng::derive_seed(seed, 0xA1));
  const auto control_order = shuffled(control, Rng::derive_seed(seed, 0xA0));
  for (std::size_t pos = 0; pos < treated_order.size(); ++pos) {
    plan.fold_of[treated_order[pos]] = pos % v;
  }
  for (std::size_t pos = 0; pos < control_order.size(); ++pos) {
    plan.fold_of[control_order[pos]] = pos % v;
  }
  return plan;
}

CrossFitResult cross_fit_predict(const std::vector<LearnerSpec>& candidates,
                                 const TrialDataset& data,
                                 const CrossFitPlan& plan,
                                 std::size_t sl_v) {
  if (candidates.empty()) {
    throw_invalid("cross-fit needs at least one candidate");
  }
  const std::size_t n = data.n();
  if (plan.fold_of.size() != n) {
    throw_invalid("cross-fit plan does not match the dataset");
  }
  const std::size_t p = data.p();

  // Features: treatment first, then covariates — the within-trial
  // regression conditions on (A, W) jointly.
  Matrix features(n, p + 1);
  for (std::size_t i = 0; i < n; ++i) {
    features(i, 0) = data.a[i];
    for (std::size_t j = 0; j < p; ++j) features(i, j + 1) = data.w(i, j);
  }

  CrossFitResult result;
  result.at_treated.resize(n);
  result.at_control.resize(n);
  result.observed.resize(n);
  result.fold_of = plan.fold_of;
  result.fold_winners.resize(plan.fold_count());
  result.fold_training_rows.resize(plan.fold_count());

  for (std::size_t f = 0; f < plan.fold_count(); ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> heldout;
    train.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      (plan.fold_of[i] == f ? heldout : train).push_back(i);
    }
    if (heldout.empty()) continue;
    if (train.empty()) {
      throw Error(ErrorCode::Estimation,
                  "cross-fit fold leaves no training rows");
    }

    Matrix Xt(train.size(), p + 1);
    std::vector<double> yt(train.size());
    for (std::size_t r = 0; r < train.size(); ++r) {
      const std::size_t i = train[r];
      Xt(r, 0) = data.a[i];
      for (std::size_t j = 0; j < p; ++j) Xt(r, j + 1) = data.w(i, j);
      yt[r] = data.y[i];
    }

    const std::uint64_t fit_seed = Rng::derive_seed(plan.seed, 0xF000 + f);
    std::shared_ptr<const FittedModel> model;
    std::string winner;
    if (candidates.size() == 1) {
      model = fit_model(candidates[0], Xt, yt, fit_seed);
      winner = candidates[0].name;
    } else {
      std::size_t v_eff = std::min(sl_v, train.size() / 2);
      if (v_eff < 2) v_eff = 2;
      const SuperLearnerFit fit =
          discrete_super_learner(candidates, Xt, yt, v_eff, fit_seed);
      model = fit.model;
      winner = fit.table.entries[fit.table.selected].spec.name;
    }
    result.fold_winners[f] = winner;
    result.fold_training_rows[f] = train;

    std::vector<double> x(p + 1);
    for (const std::size_t i : heldout) {
      for (std::size_t j = 0; j < p; ++j) x[j + 1] = data.w(i, j);
      x[0] = 1.0;
      result.at_treated[i] = model->predict(x);
      x[0] = 0.0;
      result.at_control[i] = model->predict(x);
      result.observed[i] =
          data.a[i] == 1.0 ? result.at_treated[i] : result.at_control[i];
    }
  }
  return result;
}

}  // namespace rctadjust
