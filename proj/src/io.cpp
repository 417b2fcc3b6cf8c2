#include "strtd/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "strtd/error.hpp"

namespace strtd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::size_t parse_size(std::string_view text) {
  text = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a nonnegative integer: '" + std::string(text) + "'");
  }
  return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  return in;
}

}  // namespace

void TrafficMatrix::validate() const {
  if (static_cast<std::size_t>(values.rows()) != sensors || static_cast<std::size_t>(values.cols()) != slots * days) {
    throw DimensionError("matrix is " + std::to_string(values.rows()) + "x" + std::to_string(values.cols()) +
                         " but sensors=" + std::to_string(sensors) + ", slots*days=" + std::to_string(slots * days));
  }
  if (observed.rows() != values.rows() || observed.cols() != values.cols()) {
    throw DimensionError("observation flags do not match the matrix shape");
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("failed to format a double");
  return {buf, ptr};
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

TrafficMatrix read_matrix_csv(std::istream& in, std::size_t days) {
  if (days == 0) throw std::invalid_argument("day count must be positive");
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> flags;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (rows.empty()) {
      width = cells.size();
    } else if (cells.size() != width) {
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                  " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size(), 0.0);
    std::vector<bool> obs(cells.size(), false);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = trim(cells[c]);
      if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan") continue;
      try {
        row[c] = parse_double(cell);
      } catch (const std::invalid_argument&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                                    ": not a number: '" + std::string(cell) + "'");
      }
      obs[c] = true;
    }
    rows.push_back(std::move(row));
    flags.push_back(std::move(obs));
  }
  if (rows.empty()) throw std::invalid_argument("matrix CSV is empty");
  if (width % days != 0) {
    throw DimensionError(std::to_string(width) + " columns are not divisible into " + std::to_string(days) + " days");
  }

  TrafficMatrix y;
  y.sensors = rows.size();
  y.days = days;
  y.slots = width / days;
  y.values.resize(static_cast<Eigen::Index>(y.sensors), static_cast<Eigen::Index>(width));
  y.observed.resize(y.values.rows(), y.values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      y.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      y.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flags[r][c];
    }
  }
  return y;
}

TrafficMatrix read_matrix_csv(const std::filesystem::path& path, std::size_t days) {
  auto in = open_in(path);
  try {
    return read_matrix_csv(in, days);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(std::ostream& out, const Matrix& values, const BoolArray* observed) {
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c > 0) out << ',';
      if (observed == nullptr || (*observed)(r, c)) out << format_double(values(r, c));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& values, const BoolArray* observed) {
  std::ostringstream os;
  write_matrix_csv(os, values, observed);
  write_file_atomic(path, os.str());
}

DenseTensor tensorize(const TrafficMatrix& y) {
  y.validate();
  // Column-major storage of the M x (I J) matrix is already the (M, I, J)
  // tensor layout: offset m + M (i + I j).
  std::vector<double> data(y.values.data(), y.values.data() + y.values.size());
  return DenseTensor({y.sensors, y.slots, y.days}, std::move(data));
}

ObservationMask tensorize_mask(const TrafficMatrix& y) {
  y.validate();
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(y.observed.size()));
  for (Eigen::Index k = 0; k < y.observed.size(); ++k) flags[static_cast<std::size_t>(k)] = y.observed(k) ? 1 : 0;
  return ObservationMask({y.sensors, y.slots, y.days}, std::move(flags));
}

TrafficMatrix inverse_tensorize(const DenseTensor& x) {
  if (x.order() != 3) throw DimensionError("inverse tensorization needs a third-order tensor");
  TrafficMatrix y;
  y.sensors = x.dim(0);
  y.slots = x.dim(1);
  y.days = x.dim(2);
  y.values = Eigen::Map<const Matrix>(x.data().data(), static_cast<Eigen::Index>(y.sensors),
                                      static_cast<Eigen::Index>(y.slots * y.days));
  y.observed = BoolArray::Constant(y.values.rows(), y.values.cols(), true);
  return y;
}

void write_mask_csv(std::ostream& out, const ObservationMask& mask) {
  out << "# dims=";
  for (std::size_t n = 0; n < mask.dims().size(); ++n) out << (n ? "," : "") << mask.dims()[n];
  out << " scenario=" << to_string(mask.scenario) << " seed=" << mask.seed
      << " missing_ratio=" << format_double(mask.params.missing_ratio) << " block_length=" << mask.params.block_length
      << " window_fraction=" << format_double(mask.params.window_fraction) << '\n';
  Extents idx(mask.dims().size());
  for (std::size_t linear = 0; linear < mask.size(); ++linear) {
    if (!mask.observed(linear)) continue;
    std::size_t rest = linear;
    for (std::size_t n = 0; n < idx.size(); ++n) {
      idx[n] = rest % mask.dims()[n];
      rest /= mask.dims()[n];
    }
    for (std::size_t n = 0; n < idx.size(); ++n) out << (n ? "," : "") << idx[n] + 1;
    out << '\n';
  }
}

void write_mask_csv(const std::filesystem::path& path, const ObservationMask& mask) {
  std::ostringstream os;
  write_mask_csv(os, mask);
  write_file_atomic(path, os.str());
}

ObservationMask read_mask_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  Extents dims;
  Scenario scenario = Scenario::external;
  ScenarioParams params;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> flags;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const std::string where = "mask line " + std::to_string(line_no) + ": ";
    if (text.front() == '#') {
      std::istringstream fields{std::string(text.substr(1))};
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "dims") {
          for (auto part : split(value, ',')) dims.push_back(parse_size(part));
        } else if (key == "scenario") {
          scenario = scenario_from_string(value);
        } else if (key == "seed") {
          seed = parse_size(value);
        } else if (key == "missing_ratio") {
          params.missing_ratio = parse_double(value);
        } else if (key == "block_length") {
          params.block_length = parse_size(value);
        } else if (key == "window_fraction") {
          params.window_fraction = parse_double(value);
        }
      }
      if (!dims.empty() && flags.empty()) flags.assign(product(dims), 0);
      continue;
    }
    if (dims.empty()) throw std::invalid_argument(where + "coordinates before the '# dims=' header");
    const auto parts = split(text, ',');
    if (parts.size() != dims.size()) {
      throw std::invalid_argument(where + "expected " + std::to_string(dims.size()) + " coordinates");
    }
    std::size_t linear = 0;
    std::size_t stride = 1;
    for (std::size_t n = 0; n < dims.size(); ++n) {
      const auto i = parse_size(parts[n]);
      if (i < 1 || i > dims[n]) throw std::invalid_argument(where + "coordinate out of range");
      linear += (i - 1) * stride;
      stride *= dims[n];
    }
    flags[linear] = 1;
  }
  if (dims.empty()) throw std::invalid_argument("mask CSV lacks a '# dims=' header");
  ObservationMask mask(dims, std::move(flags));
  mask.scenario = scenario;
  mask.params = params;
  mask.seed = seed;
  return mask;
}

ObservationMask read_mask_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_mask_csv(in);
}

void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& trace) {
  out << "iter,objective,objective_omega,rse,omega_k\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << format_double(r.objective) << ',' << format_double(r.objective_observed) << ','
        << format_double(r.rse) << ',' << format_double(r.omega) << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  write_file_atomic(path, os.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace strtd
