#include "design.hpp"

#include <optional>

#include "error.hpp"

namespace rctadjust {

namespace {

void check_spec(const TrialDataset& data, const DesignSpec& spec) {
  for (const std::size_t idx : spec.covariate_columns) {
    if (idx >= data.p()) {
      throw_invalid("design spec references covariate column " +
                    std::to_string(idx) + " but data has " +
                    std::to_string(data.p()) + " covariates");
    }
  }
  if (spec.score) {
    const auto& score = *spec.score;
    if (score.observed.size() != data.n()) {
      throw_invalid("design spec: score column length must match n");
    }
    if (score.at_treated.has_value() != score.at_control.has_value()) {
      throw_invalid(
          "design spec: counterfactual score values require both arms");
    }
    if (score.at_treated &&
        (score.at_treated->size() != data.n() ||
         score.at_control->size() != data.n())) {
      throw_invalid(
          "design spec: counterfactual score column length must match n");
    }
  }
}

/// Assembles one design given the treatment values to use (already in
/// {0,1}) and the score values appropriate for that treatment assignment.
BuiltDesign assemble(const TrialDataset& data, const DesignSpec& spec,
                     const std::vector<double>& treatment01,
                     const std::vector<double>* score_values) {
  const std::size_t n = data.n();
  const std::size_t n_cov = spec.covariate_columns.size();
  const std::size_t cols = (spec.include_intercept ? 1 : 0) + 1 + n_cov +
                           (spec.score ? 1 : 0) +
                           (spec.interactions ? n_cov : 0);

  BuiltDesign design;
  design.x = Matrix(n, cols);
  design.labels.reserve(cols);
  std::size_t c = 0;

  if (spec.include_intercept) {
    for (std::size_t i = 0; i < n; ++i) design.x(i, c) = 1.0;
    design.labels.push_back("intercept");
    ++c;
  }

  std::vector<double> coded(n);
  for (std::size_t i = 0; i < n; ++i) {
    coded[i] = spec.treatment_coding == TreatmentCoding::PlusMinus
                   ? 2.0 * treatment01[i] - 1.0
                   : treatment01[i];
  }
  design.treatment_column = c;
  for (std::size_t i = 0; i < n; ++i) design.x(i, c) = coded[i];
  design.labels.push_back("treatment");
  ++c;

  // Centering constants always come from the observed sample so the same
  // fitted function is evaluated across observed and forced designs.
  std::vector<std::vector<double>> centered_covs(n_cov);
  for (std::size_t k = 0; k < n_cov; ++k) {
    const std::size_t idx = spec.covariate_columns[k];
    centered_covs[k] = data.w.column(idx);
    if (spec.center_covariates) {
      const double mean = data.w.column_mean(idx);
      for (double& v : centered_covs[k]) v -= mean;
    }
    for (std::size_t i = 0; i < n; ++i) design.x(i, c) = centered_covs[k][i];
    design.labels.push_back("w" + std::to_string(idx + 1));
    ++c;
  }

  if (spec.score) {
    const std::vector<double>& values =
        score_values ? *score_values : spec.score->observed;
    for (std::size_t i = 0; i < n; ++i) design.x(i, c) = values[i];
    design.labels.push_back("score");
    ++c;
  }

  if (spec.interactions) {
    for (std::size_t k = 0; k < n_cov; ++k) {
      const std::size_t idx = spec.covariate_columns[k];
      for (std::size_t i = 0; i < n; ++i) {
        design.x(i, c) = coded[i] * centered_covs[k][i];
      }
      design.labels.push_back("treatment:w" + std::to_string(idx + 1));
      ++c;
    }
  }

  return design;
}

}  // namespace

BuiltDesign build_design(const TrialDataset& data, const DesignSpec& spec) {
  check_spec(data, spec);
  return assemble(data, spec, data.a, nullptr);
}

std::pair<BuiltDesign, BuiltDesign> counterfactual_designs(
    const TrialDataset& data, const DesignSpec& spec) {
  check_spec(data, spec);
  const std::vector<double> ones(data.n(), 1.0);
  const std::vector<double> zeros(data.n(), 0.0);

  const std::vector<double>* score1 = nullptr;
  const std::vector<double>* score0 = nullptr;
  if (spec.score && spec.score->at_treated) {
    score1 = &*spec.score->at_treated;
    score0 = &*spec.score->at_control;
  }
  return {assemble(data, spec, ones, score1),
          assemble(data, spec, zeros, score0)};
}

}  // namespace rctadjust
