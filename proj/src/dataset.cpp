#include "dataset.hpp"

#include <cmath>

#include "error.hpp"

namespace rctadjust {

std::size_t TrialDataset::arm_count(double arm) const {
  std::size_t count = 0;
  for (const double ai : a) {
    if (ai == arm) ++count;
  }
  return count;
}

void TrialDataset::validate() const {
  const std::size_t rows = y.size();
  if (a.size() != rows || w.rows() != rows) {
    throw_invalid("trial dataset: y, a, and W row counts must agree");
  }
  if (rows < 4) throw_invalid("trial dataset: need at least 4 rows");
  for (std::size_t i = 0; i < rows; ++i) {
    if (a[i] != 0.0 && a[i] != 1.0) {
      throw_invalid("trial dataset: treatment values must be 0 or 1");
    }
    if (!std::isfinite(y[i])) {
      throw_invalid("trial dataset: outcomes must be finite");
    }
  }
  if (!w.all_finite()) {
    throw_invalid("trial dataset: covariates must be finite");
  }
  if (!(pi1 > 0.0 && pi1 < 1.0)) {
    throw_invalid("trial dataset: pi1 must lie strictly inside (0, 1)");
  }
  if (arm_count(1.0) == 0 || arm_count(0.0) == 0) {
    throw_invalid("trial dataset: both arms must be represented");
  }
}

void HistoricalDataset::validate() const {
  if (w.rows() != y.size()) {
    throw_invalid("historical dataset: y and W row counts must agree");
  }
  if (y.empty()) throw_invalid("historical dataset: needs at least one row");
  for (const double yi : y) {
    if (!std::isfinite(yi)) {
      throw_invalid("historical dataset: outcomes must be finite");
    }
  }
  if (!w.all_finite()) {
    throw_invalid("historical dataset: covariates must be finite");
  }
}

void AugmentedTrialDataset::validate() const {
  trial.validate();
  const std::size_t rows = trial.n();
  if (u.size() != rows || y0.size() != rows || y1.size() != rows ||
      m0.size() != rows || m1.size() != rows) {
    throw_invalid("augmented dataset: latent column lengths must match n");
  }
  for (std::size_t i = 0; i < rows; ++i) {
    const double reconstructed =
        trial.a[i] * y1[i] + (1.0 - trial.a[i]) * y0[i];
    if (reconstructed != trial.y[i]) {
      throw_invalid(
          "augmented dataset: y must equal a*y1 + (1-a)*y0 exactly");
    }
  }
}

}  // namespace rctadjust
