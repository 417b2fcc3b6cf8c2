#include "strtd/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "strtd/error.hpp"
#include "strtd/mask.hpp"

namespace strtd {

namespace {

using ConstBlock = Eigen::Map<const Matrix>;
using Block = Eigen::Map<Matrix>;

struct ModeSplit {
  std::size_t left = 1;  // product of extents before the mode
  std::size_t extent = 1;
  std::size_t right = 1;  // product of extents after the mode
};

ModeSplit split(const Extents& dims, std::size_t mode) {
  if (mode >= dims.size()) {
    throw DimensionError("mode " + std::to_string(mode) + " out of range for order " + std::to_string(dims.size()));
  }
  ModeSplit s;
  for (std::size_t j = 0; j < mode; ++j) s.left *= dims[j];
  s.extent = dims[mode];
  for (std::size_t j = mode + 1; j < dims.size(); ++j) s.right *= dims[j];
  return s;
}

void check_extents(const Extents& dims) {
  if (dims.empty()) throw DimensionError("tensor order must be at least 1");
  for (auto d : dims) {
    if (d == 0) throw DimensionError("tensor extents must be positive");
  }
}

Eigen::Index ix(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

std::size_t product(std::span<const std::size_t> extents) {
  return std::accumulate(extents.begin(), extents.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Extents dims) : dims_(std::move(dims)) {
  check_extents(dims_);
  data_.assign(product(dims_), 0.0);
}

DenseTensor::DenseTensor(Extents dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data)) {
  check_extents(dims_);
  if (data_.size() != product(dims_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) + " does not match extents product " +
                         std::to_string(product(dims_)));
  }
}

DenseTensor DenseTensor::constant(Extents dims, double value) {
  DenseTensor t(std::move(dims));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw DimensionError("index arity does not match tensor order");
  std::size_t off = 0;
  std::size_t stride = 1;
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    if (index[n] >= dims_[n]) throw DimensionError("index out of range");
    off += index[n] * stride;
    stride *= dims_[n];
  }
  return off;
}

Extents DenseTensor::index_of(std::size_t linear) const {
  Extents idx(dims_.size());
  for (std::size_t n = 0; n < dims_.size(); ++n) {
    idx[n] = linear % dims_[n];
    linear /= dims_[n];
  }
  return idx;
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& other) {
  if (other.dims_ != dims_) throw DimensionError("extent mismatch in tensor addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& other) {
  if (other.dims_ != dims_) throw DimensionError("extent mismatch in tensor subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

DenseTensor operator+(DenseTensor lhs, const DenseTensor& rhs) { return lhs += rhs; }
DenseTensor operator-(DenseTensor lhs, const DenseTensor& rhs) { return lhs -= rhs; }
DenseTensor operator*(double scale, DenseTensor t) { return t *= scale; }

Matrix unfold(const DenseTensor& t, std::size_t mode) {
  const auto s = split(t.dims(), mode);
  Matrix m(ix(s.extent), ix(s.left * s.right));
  const double* src = t.data().data();
  for (std::size_t r = 0; r < s.right; ++r) {
    ConstBlock block(src + r * s.left * s.extent, ix(s.left), ix(s.extent));
    m.middleCols(ix(r * s.left), ix(s.left)) = block.transpose();
  }
  return m;
}

DenseTensor fold(const Matrix& m, std::size_t mode, const Extents& dims) {
  check_extents(dims);
  const auto s = split(dims, mode);
  if (static_cast<std::size_t>(m.rows()) != s.extent || static_cast<std::size_t>(m.cols()) != s.left * s.right) {
    throw DimensionError("matrix shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         " does not match mode-" + std::to_string(mode) + " unfolding of the extents");
  }
  DenseTensor t(dims);
  double* dst = t.data().data();
  for (std::size_t r = 0; r < s.right; ++r) {
    Block block(dst + r * s.left * s.extent, ix(s.left), ix(s.extent));
    block = m.middleCols(ix(r * s.left), ix(s.left)).transpose();
  }
  return t;
}

DenseTensor mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode) {
  const auto s = split(t.dims(), mode);
  if (static_cast<std::size_t>(m.cols()) != s.extent) {
    throw DimensionError("mode product: matrix has " + std::to_string(m.cols()) + " columns but mode " +
                         std::to_string(mode) + " has extent " + std::to_string(s.extent));
  }
  if (m.rows() == 0) throw DimensionError("mode product: matrix has no rows");
  Extents out_dims = t.dims();
  out_dims[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(out_dims);
  const std::size_t rows = out_dims[mode];
  const double* src = t.data().data();
  double* dst = out.data().data();
  if (s.left == 1) {
    // The storage already is the mode-0 unfolding of each right-slab.
    ConstBlock in(src, ix(s.extent), ix(s.right));
    Block res(dst, ix(rows), ix(s.right));
    res.noalias() = m * in;
    return out;
  }
  for (std::size_t r = 0; r < s.right; ++r) {
    ConstBlock in(src + r * s.left * s.extent, ix(s.left), ix(s.extent));
    Block res(dst + r * s.left * rows, ix(s.left), ix(rows));
    res.noalias() = in * m.transpose();
  }
  return out;
}

DenseTensor multi_mode_product(const DenseTensor& t, std::span<const Matrix> factors) {
  if (factors.size() != t.order()) throw DimensionError("one factor per mode is required");
  DenseTensor out = t;
  for (std::size_t n = 0; n < factors.size(); ++n) out = mode_n_product(out, factors[n], n);
  return out;
}

DenseTensor multi_mode_product_transposed(const DenseTensor& t, std::span<const Matrix> factors) {
  if (factors.size() != t.order()) throw DimensionError("one factor per mode is required");
  DenseTensor out = t;
  for (std::size_t n = 0; n < factors.size(); ++n) {
    out = mode_n_product(out, factors[n].transpose(), n);
  }
  return out;
}

Matrix multi_mode_product_skip(const DenseTensor& g, std::span<const Matrix> factors, std::size_t skip) {
  if (factors.size() != g.order()) throw DimensionError("one factor per mode is required");
  if (skip >= g.order()) throw DimensionError("skip mode out of range");
  DenseTensor y = g;
  for (std::size_t p = 0; p < factors.size(); ++p) {
    if (p == skip) continue;
    y = mode_n_product(y, factors[p], p);
  }
  return unfold(y, skip);
}

double squared_norm(const DenseTensor& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += v * v;
  return acc;
}

double frobenius_norm(const DenseTensor& t) { return std::sqrt(squared_norm(t)); }

double l1_norm(const DenseTensor& t) {
  double acc = 0.0;
  for (double v : t.data()) acc += std::abs(v);
  return acc;
}

DenseTensor masked_project(const DenseTensor& t, const ObservationMask& mask) {
  if (mask.dims() != t.dims()) throw DimensionError("mask extents do not match tensor");
  DenseTensor out(t.dims());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (mask.observed(i)) out[i] = t[i];
  }
  return out;
}

}  // namespace strtd
