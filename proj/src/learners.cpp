#include "learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <utility>

#include "error.hpp"
#include "least_squares.hpp"
#include "rng.hpp"

namespace rctadjust {

namespace {

void check_training_data(const Matrix& X, std::span<const double> y) {
  if (X.rows() == 0) {
    throw Error(ErrorCode::Estimation, "learner fit requires at least one row");
  }
  if (X.rows() != y.size()) {
    throw_invalid("learner fit: feature rows and response length differ");
  }
  if (!X.all_finite()) throw_invalid("learner fit: features must be finite");
  for (const double v : y) {
    if (!std::isfinite(v)) {
      throw_invalid("learner fit: responses must be finite");
    }
  }
}

double mean_of(std::span<const double> y) {
  double s = 0.0;
  for (const double v : y) s += v;
  return s / static_cast<double>(y.size());
}

struct Standardization {
  std::vector<double> means;
  std::vector<double> scales;  // population SD, or 1 where the SD is zero
};

Standardization standardize_stats(const Matrix& X) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  Standardization st;
  st.means.resize(d);
  st.scales.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    st.means[j] = X.column_mean(j);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = X(i, j) - st.means[j];
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    st.scales[j] = sd > 0.0 ? sd : 1.0;
  }
  return st;
}

// ----------------------------------------------------------------------
// mean-only

class MeanModel final : public FittedModel {
public:
  explicit MeanModel(double mu) : mu_(mu) {}
  double predict(std::span<const double>) const override { return mu_; }

private:
  double mu_;
};

// ----------------------------------------------------------------------
// main-effects OLS (intercept + features, rank-deficiency tolerant)

class LinearModel final : public FittedModel {
public:
  explicit LinearModel(std::vector<double> beta) : beta_(std::move(beta)) {}
  double predict(std::span<const double> x) const override {
    double value = beta_[0];
    for (std::size_t j = 0; j < x.size() && j + 1 < beta_.size(); ++j) {
      value += beta_[j + 1] * x[j];
    }
    return value;
  }

private:
  std::vector<double> beta_;  // intercept first
};

std::shared_ptr<const FittedModel> fit_ols(const Matrix& X,
                                           std::span<const double> y) {
  const std::size_t n = X.rows();
  Matrix design(n, X.cols() + 1);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < X.cols(); ++j) design(i, j + 1) = X(i, j);
  }
  const DroppingFit fit = solve_least_squares_dropping(design, y);
  return std::make_shared<LinearModel>(fit.beta);
}

// ----------------------------------------------------------------------
// ridge (standardized features, penalty chosen by nested CV)

class RidgeModel final : public FittedModel {
public:
  RidgeModel(Standardization st, double y_mean, std::vector<double> beta)
      : st_(std::move(st)), y_mean_(y_mean), beta_(std::move(beta)) {}
  double predict(std::span<const double> x) const override {
    double value = y_mean_;
    for (std::size_t j = 0; j < beta_.size() && j < x.size(); ++j) {
      value += beta_[j] * (x[j] - st_.means[j]) / st_.scales[j];
    }
    return value;
  }

private:
  Standardization st_;
  double y_mean_;
  std::vector<double> beta_;  // coefficients on the standardized scale
};

/// Solves min ||Zb - yc||^2 + lambda ||b||^2 through the augmented design
/// [Z; sqrt(lambda) I]; full rank for any lambda > 0.
std::vector<double> ridge_coefficients(const Matrix& Z,
                                       std::span<const double> yc,
                                       double lambda) {
  const std::size_t n = Z.rows();
  const std::size_t d = Z.cols();
  Matrix aug(n + d, d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug(i, j) = Z(i, j);
  }
  const double root = std::sqrt(lambda);
  for (std::size_t j = 0; j < d; ++j) aug(n + j, j) = root;
  std::vector<double> rhs(n + d, 0.0);
  std::copy(yc.begin(), yc.end(), rhs.begin());
  return solve_least_squares(aug, rhs);
}

std::shared_ptr<const FittedModel> fit_ridge(const Matrix& X,
                                             std::span<const double> y,
                                             std::uint64_t seed) {
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  if (n < 2) {
    throw Error(ErrorCode::Estimation, "ridge requires at least 2 rows");
  }
  const Standardization st = standardize_stats(X);
  Matrix Z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Z(i, j) = (X(i, j) - st.means[j]) / st.scales[j];
    }
  }
  const double y_mean = mean_of(y);
  std::vector<double> yc(n);
  for (std::size_t i = 0; i < n; ++i) yc[i] = y[i] - y_mean;

  if (d == 0) return std::make_shared<RidgeModel>(st, y_mean, std::vector<double>{});

  // Per-observation penalty grid; lambda = alpha * (training rows). The
  // winner (first on ties) is chosen by nested CV, then refit on all rows.
  const double alphas[] = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  const std::size_t v = std::min<std::size_t>(5, n);
  double best_score = std::numeric_limits<double>::infinity();
  double best_alpha = alphas[0];
  if (v >= 2) {
    const auto fold_of = seeded_folds(n, v, Rng::derive_seed(seed, 0x51D6E));
    for (const double alpha : alphas) {
      double sse = 0.0;
      bool ok = true;
      for (std::size_t f = 0; f < v && ok; ++f) {
        std::vector<std::size_t> train;
        train.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (fold_of[i] != f) train.push_back(i);
        }
        if (train.empty() || train.size() == n) continue;
        Matrix Zt(train.size(), d);
        std::vector<double> yt(train.size());
        double fold_mean = 0.0;
        for (const std::size_t i : train) fold_mean += y[i];
        fold_mean /= static_cast<double>(train.size());
        for (std::size_t r = 0; r < train.size(); ++r) {
          for (std::size_t j = 0; j < d; ++j) Zt(r, j) = Z(train[r], j);
          yt[r] = y[train[r]] - fold_mean;
        }
        try {
          const auto beta = ridge_coefficients(
              Zt, yt, alpha * static_cast<double>(train.size()));
          for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] != f) continue;
            double pred = fold_mean;
            for (std::size_t j = 0; j < d; ++j) pred += beta[j] * Z(i, j);
            const double e = y[i] - pred;
            sse += e * e;
          }
        } catch (const Error&) {
          ok = false;
        }
      }
      if (ok && sse < best_score) {
        best_score = sse;
        best_alpha = alpha;
      }
    }
  }

  const auto beta =
      ridge_coefficients(Z, yc, best_alpha * static_cast<double>(n));
  return std::make_shared<RidgeModel>(st, y_mean, beta);
}

// ----------------------------------------------------------------------
// k-nearest-neighbors (standardized features, mean of the k closest)

class KnnModel final : public FittedModel {
public:
  KnnModel(Matrix z, std::vector<double> y, Standardization st, std::size_t k)
      : z_(std::move(z)), y_(std::move(y)), st_(std::move(st)), k_(k) {}

  double predict(std::span<const double> x) const override {
    const std::size_t n = z_.rows();
    const std::size_t d = z_.cols();
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d && j < x.size(); ++j) {
        const double delta =
            (x[j] - st_.means[j]) / st_.scales[j] - z_(i, j);
        s += delta * delta;
      }
      dist[i] = {s, i};
    }
    const std::size_t k = std::min(k_, n);
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += y_[dist[i].second];
    return s / static_cast<double>(k);
  }

private:
  Matrix z_;  // standardized training features
  std::vector<double> y_;
  Standardization st_;
  std::size_t k_;
};

std::shared_ptr<const FittedModel> fit_knn(const Matrix& X,
                                           std::span<const double> y,
                                           std::size_t k) {
  const Standardization st = standardize_stats(X);
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  Matrix Z(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      Z(i, j) = (X(i, j) - st.means[j]) / st.scales[j];
    }
  }
  return std::make_shared<KnnModel>(std::move(Z),
                                    std::vector<double>(y.begin(), y.end()),
                                    st, k);
}

// ----------------------------------------------------------------------
// gradient-boosted depth-1 stumps

struct Stump {
  std::size_t feature = 0;
  double threshold = std::numeric_limits<double>::infinity();
  double left = 0.0;   // value when x[feature] <= threshold
  double right = 0.0;  // value when x[feature] >  threshold
};

double eval_stump(const Stump& s, std::span<const double> x) {
  const double v = s.feature < x.size() ? x[s.feature] : 0.0;
  return v <= s.threshold ? s.left : s.right;
}

class GbtModel final : public FittedModel {
public:
  GbtModel(double base, double shrinkage, std::vector<Stump> stumps)
      : base_(base), shrinkage_(shrinkage), stumps_(std::move(stumps)) {}
  double predict(std::span<const double> x) const override {
    double value = base_;
    for (const Stump& s : stumps_) value += shrinkage_ * eval_stump(s, x);
    return value;
  }

private:
  double base_;
  double shrinkage_;
  std::vector<Stump> stumps_;
};

/// Least-squares-optimal stump on the residuals of the given rows. `order`
/// holds, per feature, the row list sorted by that feature's value.
Stump best_stump(const Matrix& X,
                 const std::vector<std::vector<std::size_t>>& order,
                 const std::vector<std::size_t>& rows,
                 const std::vector<double>& residual_by_row) {
  const std::size_t d = X.cols();
  const std::size_t m = rows.size();
  double total = 0.0;
  for (const std::size_t row : rows) total += residual_by_row[row];

  Stump best;
  best.left = best.right =
      m > 0 ? total / static_cast<double>(m) : 0.0;  // leaf fallback
  double best_gain = -1.0;

  for (std::size_t j = 0; j < d; ++j) {
    const auto& rows = order[j];
    double left_sum = 0.0;
    for (std::size_t pos = 0; pos + 1 < m; ++pos) {
      left_sum += residual_by_row[rows[pos]];
      const double xv = X(rows[pos], j);
      const double xn = X(rows[pos + 1], j);
      if (xv == xn) continue;  // cannot split between equal values
      const double lc = static_cast<double>(pos + 1);
      const double rc = static_cast<double>(m - pos - 1);
      const double right_sum = total - left_sum;
      const double gain =
          left_sum * left_sum / lc + right_sum * right_sum / rc;
      if (gain > best_gain) {
        best_gain = gain;
        best.feature = j;
        best.threshold = 0.5 * (xv + xn);
        best.left = left_sum / lc;
        best.right = right_sum / rc;
      }
    }
  }
  return best;
}

std::vector<std::vector<std::size_t>> presort_features(
    const Matrix& X, const std::vector<std::size_t>& rows) {
  std::vector<std::vector<std::size_t>> order(X.cols());
  for (std::size_t j = 0; j < X.cols(); ++j) {
    order[j] = rows;
    std::stable_sort(order[j].begin(), order[j].end(),
                     [&](std::size_t a, std::size_t b) {
                       return X(a, j) < X(b, j);
                     });
  }
  return order;
}

double subset_mean(std::span<const double> y,
                   const std::vector<std::size_t>& rows) {
  double s = 0.0;
  for (const std::size_t row : rows) s += y[row];
  return s / static_cast<double>(rows.size());
}

/// Runs `rounds` boosting iterations on the given rows starting from the
/// constant fit `base`, invoking `per_round` after each fitted stump.
/// Residuals live in row-indexed storage so stumps evaluate on original
/// rows directly.
template <typename Callback>
void boost(const Matrix& X, std::span<const double> y,
           const std::vector<std::size_t>& rows, double base,
           std::size_t rounds, double shrinkage, Callback per_round) {
  std::vector<double> residual(X.rows(), 0.0);
  for (const std::size_t row : rows) residual[row] = y[row] - base;

  const auto order = presort_features(X, rows);
  for (std::size_t r = 0; r < rounds; ++r) {
    const Stump s = best_stump(X, order, rows, residual);
    for (const std::size_t row : rows) {
      residual[row] -= shrinkage * eval_stump(s, X.row(row));
    }
    per_round(s);
  }
}

std::shared_ptr<const FittedModel> fit_gbt(const Matrix& X,
                                           std::span<const double> y,
                                           std::size_t max_rounds,
                                           double shrinkage,
                                           std::uint64_t seed) {
  const std::size_t n = X.rows();
  if (n < 4) {
    throw Error(ErrorCode::Estimation,
                "gbt-stumps requires at least 4 rows");
  }

  // Choose the round count by v-fold CV on staged held-out error.
  const std::size_t v = std::min<std::size_t>(5, n / 2);
  const auto fold_of = seeded_folds(n, v, Rng::derive_seed(seed, 0x6B7));
  std::vector<double> staged_sse(max_rounds, 0.0);
  for (std::size_t f = 0; f < v; ++f) {
    std::vector<std::size_t> train;
    std::vector<std::size_t> heldout;
    for (std::size_t i = 0; i < n; ++i) {
      (fold_of[i] == f ? heldout : train).push_back(i);
    }
    if (train.empty() || heldout.empty()) continue;

    const double base = subset_mean(y, train);
    std::vector<double> heldout_pred(heldout.size(), base);
    std::size_t round = 0;
    boost(X, y, train, base, max_rounds, shrinkage, [&](const Stump& s) {
      double sse = 0.0;
      for (std::size_t h = 0; h < heldout.size(); ++h) {
        heldout_pred[h] += shrinkage * eval_stump(s, X.row(heldout[h]));
        const double e = y[heldout[h]] - heldout_pred[h];
        sse += e * e;
      }
      staged_sse[round++] += sse;
    });
  }

  std::size_t best_rounds = 1;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < max_rounds; ++r) {
    if (staged_sse[r] < best_sse) {
      best_sse = staged_sse[r];
      best_rounds = r + 1;
    }
  }

  std::vector<Stump> stumps;
  stumps.reserve(best_rounds);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double base = subset_mean(y, all);
  boost(X, y, all, base, best_rounds, shrinkage,
        [&](const Stump& s) { stumps.push_back(s); });
  return std::make_shared<GbtModel>(base, shrinkage, std::move(stumps));
}

// ----------------------------------------------------------------------
// registry

struct LearnerEntry {
  LearnerFactory factory;
  std::function<void(const LearnerSpec&)> validate;
};

void reject_unknown_keys(const LearnerSpec& spec,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : spec.hyperparameters) {
    (void)value;
    bool ok = false;
    for (const char* name : allowed) {
      if (key == name) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw_invalid("learner '" + spec.name + "': unknown hyperparameter '" +
                    key + "'");
    }
  }
}

double get_param(const LearnerSpec& spec, const std::string& key,
                 double fallback) {
  const auto it = spec.hyperparameters.find(key);
  return it == spec.hyperparameters.end() ? fallback : it->second;
}

std::size_t positive_integer_param(const LearnerSpec& spec,
                                   const std::string& key, double fallback) {
  const double raw = get_param(spec, key, fallback);
  if (!(raw >= 1.0) || raw != std::floor(raw)) {
    throw_invalid("learner '" + spec.name + "': hyperparameter '" + key +
                  "' must be a positive integer");
  }
  return static_cast<std::size_t>(raw);
}

std::map<std::string, LearnerEntry>& builtin_registry() {
  static std::map<std::string, LearnerEntry> reg = [] {
    std::map<std::string, LearnerEntry> r;
    r["mean"] = {
        [](const Matrix&, std::span<const double> y, const LearnerSpec&,
           std::uint64_t) -> std::shared_ptr<const FittedModel> {
          return std::make_shared<MeanModel>(mean_of(y));
        },
        [](const LearnerSpec& s) { reject_unknown_keys(s, {}); }};
    r["ols"] = {
        [](const Matrix& X, std::span<const double> y, const LearnerSpec&,
           std::uint64_t) { return fit_ols(X, y); },
        [](const LearnerSpec& s) { reject_unknown_keys(s, {}); }};
    r["ridge"] = {
        [](const Matrix& X, std::span<const double> y, const LearnerSpec&,
           std::uint64_t seed) { return fit_ridge(X, y, seed); },
        [](const LearnerSpec& s) { reject_unknown_keys(s, {}); }};
    r["knn"] = {
        [](const Matrix& X, std::span<const double> y, const LearnerSpec& s,
           std::uint64_t) {
          return fit_knn(X, y, positive_integer_param(s, "k", 5));
        },
        [](const LearnerSpec& s) {
          reject_unknown_keys(s, {"k"});
          (void)positive_integer_param(s, "k", 5);
        }};
    r["gbt-stumps"] = {
        [](const Matrix& X, std::span<const double> y, const LearnerSpec& s,
           std::uint64_t seed) {
          const std::size_t rounds = positive_integer_param(s, "rounds", 200);
          const double shrinkage = get_param(s, "shrinkage", 0.1);
          return fit_gbt(X, y, rounds, shrinkage, seed);
        },
        [](const LearnerSpec& s) {
          reject_unknown_keys(s, {"rounds", "shrinkage"});
          (void)positive_integer_param(s, "rounds", 200);
          const double shrinkage = get_param(s, "shrinkage", 0.1);
          if (!(shrinkage > 0.0 && shrinkage <= 1.0)) {
            throw_invalid(
                "learner 'gbt-stumps': shrinkage must lie in (0, 1]");
          }
        }};
    return r;
  }();
  return reg;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void register_learner(const std::string& name, LearnerFactory factory) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  builtin_registry()[name] = {std::move(factory),
                              [](const LearnerSpec&) {}};
}

void validate_learner_spec(const LearnerSpec& spec) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  const auto& reg = builtin_registry();
  const auto it = reg.find(spec.name);
  if (it == reg.end()) {
    throw_invalid("unknown learner '" + spec.name + "'");
  }
  it->second.validate(spec);
}

std::shared_ptr<const FittedModel> fit_model(const LearnerSpec& spec,
                                             const Matrix& X,
                                             std::span<const double> y,
                                             std::uint64_t seed) {
  validate_learner_spec(spec);
  check_training_data(X, y);
  LearnerFactory factory;
  {
    std::lock_guard<std::mutex> lock(registry_mutex());
    factory = builtin_registry().at(spec.name).factory;
  }
  return factory(X, y, spec, seed);
}

RegressionFn::RegressionFn(std::shared_ptr<const FittedModel> model,
                           FeatureMode mode, std::string learner_name,
                           std::vector<std::size_t> training_rows)
    : model_(std::move(model)),
      mode_(mode),
      learner_name_(std::move(learner_name)),
      training_rows_(std::move(training_rows)) {}

double RegressionFn::predict(double a, std::span<const double> w) const {
  if (mode_ == FeatureMode::CovariatesOnly) return model_->predict(w);
  std::vector<double> features;
  features.reserve(w.size() + 1);
  features.push_back(a);
  features.insert(features.end(), w.begin(), w.end());
  return model_->predict(features);
}

RegressionFn fit_learner(const LearnerSpec& spec, const Matrix& features,
                         std::span<const double> y, FeatureMode mode,
                         std::vector<std::size_t> training_rows,
                         std::uint64_t seed) {
  auto model = fit_model(spec, features, y, seed);
  return RegressionFn(std::move(model), mode, spec.name,
                      std::move(training_rows));
}

std::vector<LearnerSpec> default_candidate_library() {
  return {
      {"mean", {}},
      {"ols", {}},
      {"ridge", {}},
      {"knn", {{"k", 5.0}}},
      {"knn", {{"k", 10.0}}},
      {"gbt-stumps", {{"rounds", 200.0}, {"shrinkage", 0.1}}},
  };
}

std::vector<std::size_t> seeded_folds(std::size_t n, std::size_t v,
                                      std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j =
        static_cast<std::size_t>(rng.uniform01() * static_cast<double>(i));
    if (j >= i) j = i - 1;
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    fold_of[perm[pos]] = pos * v / n;
  }
  return fold_of;
}

}  // namespace rctadjust
