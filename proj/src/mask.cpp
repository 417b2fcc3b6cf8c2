#include "strtd/mask.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <string>

#include "strtd/error.hpp"

namespace strtd {

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::random:
      return "RM";
    case Scenario::nonrandom:
      return "NM";
    case Scenario::blackout:
      return "BM";
    case Scenario::external:
      return "external";
  }
  return "external";
}

Scenario scenario_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "rm" || lower == "random") return Scenario::random;
  if (lower == "nm" || lower == "nonrandom") return Scenario::nonrandom;
  if (lower == "bm" || lower == "blackout") return Scenario::blackout;
  if (lower == "external" || lower == "none") return Scenario::external;
  throw std::invalid_argument("unknown missing scenario '" + std::string(name) + "'");
}

ObservationMask::ObservationMask(Extents dims, bool observed) : dims_(std::move(dims)) {
  flags_.assign(product(dims_), observed ? 1 : 0);
}

ObservationMask::ObservationMask(Extents dims, std::vector<std::uint8_t> flags)
    : dims_(std::move(dims)), flags_(std::move(flags)) {
  if (flags_.size() != product(dims_)) throw DimensionError("mask flag count does not match extents");
  for (auto& f : flags_) f = f ? 1 : 0;
}

std::size_t ObservationMask::observed_count() const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> ObservationMask::observed_offsets() const {
  std::vector<std::size_t> out;
  out.reserve(observed_count());
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (flags_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> ObservationMask::missing_offsets() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flags_.size(); ++i) {
    if (!flags_[i]) out.push_back(i);
  }
  return out;
}

ObservationMask ObservationMask::complement() const {
  ObservationMask out = *this;
  for (auto& f : out.flags_) f = f ? 0 : 1;
  return out;
}

ObservationMask ObservationMask::intersect(const ObservationMask& other) const {
  if (other.dims_ != dims_) throw DimensionError("mask extents differ");
  ObservationMask out = *this;
  for (std::size_t i = 0; i < flags_.size(); ++i) out.flags_[i] = flags_[i] & other.flags_[i];
  return out;
}

ObservationMask ObservationMask::minus(const ObservationMask& other) const {
  if (other.dims_ != dims_) throw DimensionError("mask extents differ");
  ObservationMask out = *this;
  for (std::size_t i = 0; i < flags_.size(); ++i) out.flags_[i] = flags_[i] & (other.flags_[i] ^ 1);
  return out;
}

}  // namespace strtd
