#pragma once

// Dense N-way tensors and the Tucker algebra used by the solver.
//
// Storage is column-major over the modes: the first index varies fastest, so
// the linear offset of (i_0, ..., i_{N-1}) is sum_n i_n * prod_{j<n} I_j. This
// is the ordering under which vec(G x_0 U_0 ... x_{N-1} U_{N-1}) equals
// (U_{N-1} kron ... kron U_0) vec(G).
//
// The mode-n unfolding places i_n on the rows; the column index enumerates the
// remaining indices with the earliest mode fastest. Modes are 0-based here.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace strtd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Extents = std::vector<std::size_t>;

class ObservationMask;

std::size_t product(std::span<const std::size_t> extents);

class DenseTensor {
 public:
  DenseTensor() = default;
  /// Zero-filled tensor.
  explicit DenseTensor(Extents dims);
  DenseTensor(Extents dims, std::vector<double> data);

  static DenseTensor constant(Extents dims, double value);

  std::size_t order() const { return dims_.size(); }
  const Extents& dims() const { return dims_; }
  std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::size_t linear) { return data_[linear]; }
  double operator[](std::size_t linear) const { return data_[linear]; }

  double& operator()(std::span<const std::size_t> index) { return data_[offset(index)]; }
  double operator()(std::span<const std::size_t> index) const { return data_[offset(index)]; }
  double& at(std::initializer_list<std::size_t> index) { return data_[offset({index.begin(), index.size()})]; }
  double at(std::initializer_list<std::size_t> index) const { return data_[offset({index.begin(), index.size()})]; }

  std::size_t offset(std::span<const std::size_t> index) const;
  Extents index_of(std::size_t linear) const;

  /// Column vector view over the storage (vec(X) in column-major order).
  Eigen::Map<const Vector> vec() const { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  Eigen::Map<Vector> vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }

  DenseTensor& operator+=(const DenseTensor& other);
  DenseTensor& operator-=(const DenseTensor& other);
  DenseTensor& operator*=(double scale);

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  Extents dims_;
  std::vector<double> data_;
};

DenseTensor operator+(DenseTensor lhs, const DenseTensor& rhs);
DenseTensor operator-(DenseTensor lhs, const DenseTensor& rhs);
DenseTensor operator*(double scale, DenseTensor t);

/// I_mode x prod_{j != mode} I_j matrix.
Matrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold for the given full extents.
DenseTensor fold(const Matrix& m, std::size_t mode, const Extents& dims);

/// t x_mode m: contracts mode `mode` of t with the columns of m.
DenseTensor mode_n_product(const DenseTensor& t, const Matrix& m, std::size_t mode);

/// t x_0 m[0] x_1 m[1] ... applied in ascending mode order.
DenseTensor multi_mode_product(const DenseTensor& t, std::span<const Matrix> factors);

/// Same as multi_mode_product with every factor transposed.
DenseTensor multi_mode_product_transposed(const DenseTensor& t, std::span<const Matrix> factors);

/// unfold(g x_{p != skip} factors[p], skip), i.e. G_(skip) V_skip^T, computed by
/// sequential mode products without forming the Kronecker product V_skip.
Matrix multi_mode_product_skip(const DenseTensor& g, std::span<const Matrix> factors, std::size_t skip);

double frobenius_norm(const DenseTensor& t);
double squared_norm(const DenseTensor& t);
double l1_norm(const DenseTensor& t);

/// Keeps the observed entries, zeroes the rest.
DenseTensor masked_project(const DenseTensor& t, const ObservationMask& mask);

}  // namespace strtd
