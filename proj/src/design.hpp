#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dataset.hpp"
#include "matrix.hpp"

namespace rctadjust {

/// Assembled regression design: the matrix plus parallel column labels and
/// the index of the treatment column (present in every design).
struct BuiltDesign {
  Matrix x;
  std::vector<std::string> labels;
  std::size_t treatment_column = 0;
};

/// Builds the observed design with column order
/// [intercept?, treatment, covariates..., score?, interactions...].
/// Centering subtracts full-sample covariate means; treatment coding is
/// applied per the recipe (0/1 or +/-1); interaction columns multiply the
/// coded treatment with each (possibly centered) selected covariate.
BuiltDesign build_design(const TrialDataset& data, const DesignSpec& spec);

/// The same design with treatment forced to 1 (first) and 0 (second):
/// treatment and interaction columns are recomputed under the forced arm,
/// the score column switches to its forced-arm values when the recipe
/// carries them, and centering constants remain those of the observed
/// sample.
std::pair<BuiltDesign, BuiltDesign> counterfactual_designs(
    const TrialDataset& data, const DesignSpec& spec);

}  // namespace rctadjust
