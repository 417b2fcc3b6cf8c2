#include "strtd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "strtd/error.hpp"

namespace strtd {

namespace {

void check_sizes(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval) {
  if (truth.size() != estimate.size() || truth.size() != eval.size()) {
    throw DimensionError("truth, estimate and evaluation mask sizes differ");
  }
  if (eval.observed_count() == 0) throw DegenerateError("evaluation set is empty");
}

}  // namespace

MapeResult mape(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval) {
  check_sizes(truth, estimate, eval);
  MapeResult r;
  double acc = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!eval.observed(i)) continue;
    if (std::abs(truth[i]) <= kZeroTruth) {
      ++r.excluded;
      continue;
    }
    acc += std::abs((truth[i] - estimate[i]) / truth[i]);
    ++r.used;
  }
  if (r.used == 0) throw DegenerateError("MAPE undefined: every evaluated truth value is zero");
  r.value = acc / static_cast<double>(r.used) * 100.0;
  return r;
}

double nmae(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval) {
  check_sizes(truth, estimate, eval);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!eval.observed(i)) continue;
    num += std::abs(truth[i] - estimate[i]);
    den += std::abs(truth[i]);
  }
  if (den == 0.0) throw DegenerateError("NMAE undefined: evaluated truth sums to zero");
  return num / den;
}

double rse(std::span<const double> truth, std::span<const double> estimate, const ObservationMask& eval) {
  check_sizes(truth, estimate, eval);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!eval.observed(i)) continue;
    const double d = truth[i] - estimate[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0) throw DegenerateError("RSE undefined: evaluated truth is zero");
  return std::sqrt(num / den);
}

MetricReport evaluate(const DenseTensor& truth, const DenseTensor& estimate, const ObservationMask& eval) {
  if (truth.dims() != estimate.dims() || truth.dims() != eval.dims()) {
    throw DimensionError("truth, estimate and evaluation mask extents differ");
  }
  MetricReport rep;
  rep.evaluated_count = eval.observed_count();
  try {
    const auto m = mape(truth.data(), estimate.data(), eval);
    rep.mape = m.value;
    rep.excluded_zero_truth = m.excluded;
  } catch (const DegenerateError&) {
    rep.mape_defined = false;
    rep.excluded_zero_truth = rep.evaluated_count;
  }
  rep.nmae = nmae(truth.data(), estimate.data(), eval);
  rep.rse = rse(truth.data(), estimate.data(), eval);
  return rep;
}

DenseTensor mean_imputation(const DenseTensor& x, const ObservationMask& observed) {
  if (x.dims() != observed.dims()) throw DimensionError("mask extents do not match the tensor");
  const std::size_t count = observed.observed_count();
  if (count == 0) throw DegenerateError("no observed entries to average");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (observed.observed(i)) sum += x[i];
  }
  const double mean = sum / static_cast<double>(count);
  DenseTensor out = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!observed.observed(i)) out[i] = mean;
  }
  return out;
}

CorrelationCdf spatial_correlation_cdf(const Matrix& rows) {
  if (rows.rows() < 2) throw std::invalid_argument("correlation needs at least 2 rows");
  const Eigen::Index n = rows.rows();
  Matrix centered = rows.colwise() - rows.rowwise().mean();
  const Vector norms = centered.rowwise().norm();

  CorrelationCdf out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (norms(i) == 0.0 || norms(j) == 0.0) {
        ++out.excluded_pairs;
        continue;
      }
      const double c = centered.row(i).dot(centered.row(j)) / (norms(i) * norms(j));
      out.coefficients.push_back(std::clamp(c, -1.0, 1.0));
    }
  }
  std::sort(out.coefficients.begin(), out.coefficients.end());
  return out;
}

IncrementRateCdf increment_rate_cdf(const Matrix& rows) {
  if (rows.cols() < 2) throw std::invalid_argument("increment rates need at least 2 time columns");
  IncrementRateCdf out;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index t = 0; t + 1 < rows.cols(); ++t) {
      const double base = rows(i, t);
      if (std::abs(base) <= kZeroTruth) {
        ++out.skipped;
        continue;
      }
      out.rates.push_back(std::abs(rows(i, t + 1) - base) / std::abs(base));
    }
  }
  std::sort(out.rates.begin(), out.rates.end());
  return out;
}

}  // namespace strtd
