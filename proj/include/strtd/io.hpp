#pragma once

// File formats:
//  * matrix CSV: headerless, rows = sensors, columns = time in day-major order
//    (column j*I + i holds slot i of day j), empty cell = missing value.
//  * mask CSV: a "# dims=..." header line, then one observed coordinate per
//    line as 1-based "i1,i2,...".
//  * trace CSV: header "iter,objective,objective_omega,rse,omega_k".
// Numbers are written in the shortest form that reads back to the same double.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "strtd/mask.hpp"
#include "strtd/solver.hpp"
#include "strtd/tensor.hpp"

namespace strtd {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Sensor x (time . day) matrix with the per-cell observation flags.
struct TrafficMatrix {
  std::size_t sensors = 0;
  std::size_t slots = 0;  // time points per day
  std::size_t days = 0;
  Matrix values;       // sensors x (slots * days); missing cells hold 0
  BoolArray observed;  // same shape as values

  void validate() const;
};

std::string format_double(double v);
double parse_double(std::string_view text);

/// Reads a headerless CSV. Rows must have equal length.
TrafficMatrix read_matrix_csv(std::istream& in, std::size_t days = 1);
TrafficMatrix read_matrix_csv(const std::filesystem::path& path, std::size_t days = 1);

/// Missing cells are written as empty fields when `with_missing` is set.
void write_matrix_csv(std::ostream& out, const Matrix& values, const BoolArray* observed = nullptr);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& values, const BoolArray* observed = nullptr);

/// (M, I, J) tensor with X(m, i, j) = Y(m, j*I + i).
DenseTensor tensorize(const TrafficMatrix& y);
/// Observation flags of `y` as a mask over the tensorized extents.
ObservationMask tensorize_mask(const TrafficMatrix& y);

/// Exact inverse of tensorize; every cell is marked observed.
TrafficMatrix inverse_tensorize(const DenseTensor& x);

void write_mask_csv(std::ostream& out, const ObservationMask& mask);
void write_mask_csv(const std::filesystem::path& path, const ObservationMask& mask);
ObservationMask read_mask_csv(std::istream& in);
ObservationMask read_mask_csv(const std::filesystem::path& path);

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace);
void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& trace);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace strtd
