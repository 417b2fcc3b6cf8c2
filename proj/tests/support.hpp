#pragma once

// Shared helpers for the test binaries: random instances and slow,
// definition-level oracles that do not reuse the library kernels.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "strtd/tensor.hpp"

namespace strtd::test {

inline Extents random_dims(std::mt19937_64& rng, std::size_t order, std::size_t max_extent) {
  Extents dims(order);
  for (auto& d : dims) d = 1 + rng() % max_extent;
  return dims;
}

inline DenseTensor random_tensor(const Extents& dims, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  DenseTensor t(dims);
  for (double& v : t.data()) v = u(rng);
  return t;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = u(rng);
  }
  return m;
}

inline double max_abs_diff(const DenseTensor& a, const DenseTensor& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// Walks every coordinate; column index counts the other modes, earliest fastest.
inline Matrix unfold_oracle(const DenseTensor& t, std::size_t mode) {
  const auto& dims = t.dims();
  Matrix m(static_cast<Eigen::Index>(dims[mode]), static_cast<Eigen::Index>(t.size() / dims[mode]));
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Extents idx = t.index_of(k);
    std::size_t col = 0;
    std::size_t stride = 1;
    for (std::size_t n = 0; n < dims.size(); ++n) {
      if (n == mode) continue;
      col += idx[n] * stride;
      stride *= dims[n];
    }
    m(static_cast<Eigen::Index>(idx[mode]), static_cast<Eigen::Index>(col)) = t[k];
  }
  return m;
}

// (t x_n m)(.., j, ..) = sum_i m(j, i) t(.., i, ..), by explicit loops.
inline DenseTensor mode_product_oracle(const DenseTensor& t, const Matrix& m, std::size_t mode) {
  Extents dims = t.dims();
  dims[mode] = static_cast<std::size_t>(m.rows());
  DenseTensor out(dims);
  for (std::size_t k = 0; k < out.size(); ++k) {
    Extents idx = out.index_of(k);
    const std::size_t j = idx[mode];
    double sum = 0.0;
    for (std::size_t i = 0; i < t.dim(mode); ++i) {
      idx[mode] = i;
      sum += m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * t(idx);
    }
    out[k] = sum;
  }
  return out;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// U_{N-1} kron ... kron U_0 without the factor at `skip` (skip >= N keeps all).
inline Matrix kron_all(const std::vector<Matrix>& us, std::size_t skip) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t n = 0; n < us.size(); ++n) {
    if (n == skip) continue;
    out = kron(us[n], out);
  }
  return out;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

}  // namespace strtd::test
