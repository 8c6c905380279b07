#pragma once

#include <string>

#include "dataset.hpp"

namespace rctadjust {

/// Wire format: UTF-8 CSV, comma separator, '.' decimal point, mandatory
/// header row. Trial files carry columns y,a,w1..wp; historical files
/// y,w1..wp; augmented simulation exports append u,y0,y1,m0,m1. Numbers are
/// written with 12 significant digits, so read(write(x)) round-trips at that
/// precision. Missing or non-numeric cells are rejected with row/column
/// addressed errors; no imputation is attempted.

TrialDataset read_trial_csv(const std::string& path);
HistoricalDataset read_historical_csv(const std::string& path);
AugmentedTrialDataset read_augmented_trial_csv(const std::string& path);

void write_trial_csv(const TrialDataset& data, const std::string& path);
void write_historical_csv(const HistoricalDataset& data,
                          const std::string& path);
void write_augmented_trial_csv(const AugmentedTrialDataset& data,
                               const std::string& path);

/// Formats one number the way the CSV writers do (12 significant digits).
std::string format_csv_number(double value);

}  // namespace rctadjust
