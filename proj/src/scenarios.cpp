#include "strtd/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "strtd/error.hpp"

namespace strtd {

namespace {

std::size_t target_count(double ratio, std::size_t total) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
}

void require_ratio(double ratio, const char* what) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

void require_third_order(const Extents& dims) {
  if (dims.size() != 3) throw DimensionError("scenario needs (sensor, time, day) extents");
  for (auto d : dims) {
    if (d == 0) throw DimensionError("extents must be positive");
  }
}

}  // namespace

ObservationMask mask_rm(const Extents& dims, double missing_ratio, std::uint64_t seed) {
  require_ratio(missing_ratio, "missing ratio");
  ObservationMask mask(dims, true);
  const std::size_t total = mask.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t drop = target_count(missing_ratio, total);
  for (std::size_t k = 0; k < drop; ++k) mask.set(order[k], false);
  mask.scenario = Scenario::random;
  mask.params.missing_ratio = missing_ratio;
  mask.seed = seed;
  return mask;
}

ObservationMask mask_nm(const Extents& dims, double missing_ratio, std::size_t block_length, std::uint64_t seed) {
  require_ratio(missing_ratio, "missing ratio");
  require_third_order(dims);
  const std::size_t sensors = dims[0];
  const std::size_t slots = dims[1];
  const std::size_t days = dims[2];
  if (block_length == 0 || block_length > slots) {
    throw std::invalid_argument("block length " + std::to_string(block_length) + " must lie in [1, " +
                                std::to_string(slots) + "]");
  }
  ObservationMask mask(dims, true);
  const std::size_t target = target_count(missing_ratio, mask.size());
  const std::size_t pairs = sensors * days;

  std::vector<std::size_t> order(pairs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // Pass over the shuffled pairs, one block per pair per pass; later passes
  // place further blocks on still-observed runs of the same fiber.
  std::size_t missing = 0;
  std::vector<std::size_t> starts;
  while (missing < target) {
    const std::size_t before = missing;
    for (std::size_t k = 0; k < pairs && missing < target; ++k) {
      const std::size_t sensor = order[k] % sensors;
      const std::size_t day = order[k] / sensors;
      const auto at = [&](std::size_t t) { return sensor + sensors * (t + slots * day); };
      starts.clear();
      std::size_t run = 0;
      for (std::size_t t = 0; t < slots; ++t) {
        run = mask.observed(at(t)) ? run + 1 : 0;
        if (run >= block_length) starts.push_back(t + 1 - block_length);
      }
      if (starts.empty()) continue;
      std::uniform_int_distribution<std::size_t> pick(0, starts.size() - 1);
      const std::size_t start = starts[pick(rng)];
      for (std::size_t t = start; t < start + block_length; ++t) mask.set(at(t), false);
      missing += block_length;
    }
    if (missing == before) {
      throw std::invalid_argument("block length " + std::to_string(block_length) +
                                  " cannot reach the missing ratio: no fiber has room for another block");
    }
  }
  mask.scenario = Scenario::nonrandom;
  mask.params.missing_ratio = missing_ratio;
  mask.params.block_length = block_length;
  mask.seed = seed;
  return mask;
}

ObservationMask mask_bm(const Extents& dims, double window_fraction, std::uint64_t seed) {
  require_ratio(window_fraction, "window fraction");
  require_third_order(dims);
  const std::size_t sensors = dims[0];
  const std::size_t slots = dims[1];
  const std::size_t days = dims[2];
  const std::size_t removed = target_count(window_fraction, slots * days);
  const std::size_t base = removed / days;
  const std::size_t extra = removed % days;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> day_order(days);
  std::iota(day_order.begin(), day_order.end(), std::size_t{0});
  std::shuffle(day_order.begin(), day_order.end(), rng);
  std::vector<std::size_t> lengths(days, base);
  for (std::size_t k = 0; k < extra; ++k) ++lengths[day_order[k]];

  ObservationMask mask(dims, true);
  for (std::size_t day = 0; day < days; ++day) {
    const std::size_t len = lengths[day];
    if (len == 0) continue;
    std::uniform_int_distribution<std::size_t> start_dist(0, slots - len);
    const std::size_t start = start_dist(rng);
    for (std::size_t t = start; t < start + len; ++t) {
      for (std::size_t m = 0; m < sensors; ++m) mask.set(m + sensors * (t + slots * day), false);
    }
  }
  mask.scenario = Scenario::blackout;
  mask.params.window_fraction = window_fraction;
  mask.seed = seed;
  return mask;
}

SyntheticTucker make_synthetic_tucker(const Extents& dims, const Extents& core_dims, double core_density,
                                      std::uint64_t seed, double value_low, double value_high) {
  if (!(value_low >= 0.0 && value_high > value_low)) {
    throw std::invalid_argument("core value range must be nonnegative and nonempty");
  }
  if (dims.size() != core_dims.size()) throw DimensionError("core order differs from the tensor order");
  if (!(core_density > 0.0 && core_density <= 1.0)) throw std::invalid_argument("core density must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticTucker out;
  out.core = DenseTensor(core_dims);
  std::vector<std::size_t> order(out.core.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t nonzeros = std::max<std::size_t>(1, target_count(core_density, out.core.size()));
  for (std::size_t k = 0; k < nonzeros; ++k) {
    out.core[order[k]] = value_low + (value_high - value_low) * unit(rng);
  }

  for (std::size_t n = 0; n < dims.size(); ++n) {
    Matrix u(static_cast<Eigen::Index>(dims[n]), static_cast<Eigen::Index>(core_dims[n]));
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
      for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, j) = unit(rng);
      u.col(j) /= u.col(j).norm();
    }
    out.factors.push_back(std::move(u));
  }
  out.truth = multi_mode_product(out.core, out.factors);
  return out;
}

}  // namespace strtd
