#pragma once

// Missing-data scenario generators. Every generator is deterministic in its
// (extents, parameters, seed) and owns its random engine.
//
// The third-order layout is (sensor, time-of-day, day).

#include <cstdint>

#include "strtd/mask.hpp"
#include "strtd/tensor.hpp"

namespace strtd {

/// Removes exactly round(ratio * size) entries chosen uniformly at random.
ObservationMask mask_rm(const Extents& dims, double missing_ratio, std::uint64_t seed);

/// Visits (sensor, day) pairs in shuffled order and removes one contiguous
/// run of `block_length` time slots from each, until the missing count reaches
/// round(ratio * size). When one block per pair is not enough, further passes
/// place additional blocks on still-observed stretches of the same fibers.
/// Overshoots by less than one block.
ObservationMask mask_nm(const Extents& dims, double missing_ratio, std::size_t block_length, std::uint64_t seed);

/// Removes round(fraction * I * J) (time, day) slots across all sensors: one
/// contiguous window per day, window lengths spread evenly over the days.
ObservationMask mask_bm(const Extents& dims, double window_fraction, std::uint64_t seed);

struct SyntheticTucker {
  DenseTensor truth;
  DenseTensor core;
  std::vector<Matrix> factors;
};

/// Nonnegative Tucker tensor: a core with the given density of nonzeros,
/// each uniform in [value_low, value_high), times uniform [0,1) factors with
/// unit columns.
SyntheticTucker make_synthetic_tucker(const Extents& dims, const Extents& core_dims, double core_density,
                                      std::uint64_t seed, double value_low = 5.0, double value_high = 15.0);

}  // namespace strtd
