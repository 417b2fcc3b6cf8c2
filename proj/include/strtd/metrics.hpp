#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "strtd/mask.hpp"
#include "strtd/tensor.hpp"

namespace strtd {

/// Truth values with |y| at or below this are left out of MAPE and increment rates.
inline constexpr double kZeroTruth = 1e-8;

struct MetricReport {
  double mape = 0.0;  // percent
  double nmae = 0.0;
  double rse = 0.0;
  std::size_t evaluated_count = 0;
  std::size_t excluded_zero_truth = 0;
  /// MAPE is undefined when every evaluated truth is zero.
  bool mape_defined = true;
};

struct MapeResult {
  double value = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};

/// Mean of |(y - y^)/y| * 100 over the entries flagged in `eval`.
/// Throws DegenerateError when no entry has nonzero truth.
MapeResult mape(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval);

/// sum |y - y^| / sum |y| over the flagged entries.
double nmae(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval);

/// ||y - y^||_2 / ||y||_2 over the flagged entries.
double rse(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval);

/// All three metrics on the flagged entries.
MetricReport evaluate(const DenseTensor& truth, const DenseTensor& estimate, const ObservationMask& eval);

/// Fills every entry outside `observed` with the mean of the observed entries.
DenseTensor mean_imputation(const DenseTensor& x, const ObservationMask& observed);

struct CorrelationCdf {
  std::vector<double> coefficients;  // ascending
  std::size_t excluded_pairs = 0;    // pairs involving a constant row
};

/// Pearson correlation between every pair of rows, sorted ascending.
CorrelationCdf spatial_correlation_cdf(const Matrix& rows);

struct IncrementRateCdf {
  std::vector<double> rates;  // ascending
  std::size_t skipped = 0;    // zero-denominator steps
};

/// |y_{t+1} - y_t| / |y_t| for every row and adjacent column pair, sorted ascending.
IncrementRateCdf increment_rate_cdf(const Matrix& rows);

}  // namespace strtd
