#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "strtd/tensor.hpp"

namespace strtd {

enum class Scenario { random, nonrandom, blackout, external };

std::string_view to_string(Scenario s);
Scenario scenario_from_string(std::string_view name);

struct ScenarioParams {
  double missing_ratio = 0.0;
  std::size_t block_length = 0;  // NM: consecutive time slots per (sensor, day)
  double window_fraction = 0.0;  // BM
};

/// The observed index set and its complement over a fixed extent.
class ObservationMask {
 public:
  ObservationMask() = default;
  /// All entries observed when `observed` is true, none otherwise.
  explicit ObservationMask(Extents dims, bool observed = true);
  ObservationMask(Extents dims, std::vector<std::uint8_t> flags);

  const Extents& dims() const { return dims_; }
  std::size_t size() const { return flags_.size(); }
  std::size_t observed_count() const;
  std::size_t missing_count() const { return size() - observed_count(); }

  bool observed(std::size_t linear) const { return flags_[linear] != 0; }
  void set(std::size_t linear, bool observed) { flags_[linear] = observed ? 1 : 0; }
  const std::vector<std::uint8_t>& flags() const { return flags_; }

  /// Linear offsets of observed entries in ascending order.
  std::vector<std::size_t> observed_offsets() const;
  std::vector<std::size_t> missing_offsets() const;

  ObservationMask complement() const;
  /// Observed in both.
  ObservationMask intersect(const ObservationMask& other) const;
  /// Observed here but not in `other`.
  ObservationMask minus(const ObservationMask& other) const;

  Scenario scenario = Scenario::external;
  ScenarioParams params;
  std::uint64_t seed = 0;

  friend bool operator==(const ObservationMask& a, const ObservationMask& b) {
    return a.dims_ == b.dims_ && a.flags_ == b.flags_;
  }

 private:
  Extents dims_;
  std::vector<std::uint8_t> flags_;
};

}  // namespace strtd
