#pragma once

// Per-mode constraint matrices: kNN Gaussian-kernel graphs and their
// Laplacians for spatial modes, forward-difference operators for temporal
// modes, and the spectral norms that set their weights.

#include <optional>
#include <string_view>

#include "strtd/tensor.hpp"

namespace strtd {

enum class PriorKind { none, laplacian, temporal };

std::string_view to_string(PriorKind kind);
PriorKind prior_kind_from_string(std::string_view name);

struct GraphPriorConfig {
  std::size_t neighbors = 5;
  double bandwidth = 1.0;  // sigma^2 of the Gaussian kernel
};

struct PriorMatrix {
  PriorKind kind = PriorKind::none;
  /// L for laplacian, T ((I-1) x I) for temporal, empty for none.
  Matrix matrix;
  /// The matrix P with regularizer (beta/2) tr(U^T P U): L or T^T T.
  Matrix penalty;
  /// ||P||_2.
  double spectral_norm = 0.0;
};

struct SimilarityGraph {
  Matrix weights;
  /// Node pairs with no commonly observed column; their weight is forced to 0.
  std::size_t disjoint_pairs = 0;
};

/// Gaussian-kernel kNN similarity between the rows of `rows`. Only columns
/// observed in both rows enter a distance, scaled by (columns / common columns).
/// Symmetrized with W <- max(W, W^T); zero diagonal.
SimilarityGraph similarity_matrix(const Matrix& rows,
                                  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& observed,
                                  const GraphPriorConfig& cfg);

/// Fully observed convenience overload.
SimilarityGraph similarity_matrix(const Matrix& rows, const GraphPriorConfig& cfg);

/// L = D - W.
PriorMatrix laplacian(const Matrix& w);

/// (I-1) x I forward differences: (T u)_j = u_{j+1} - u_j.
PriorMatrix temporal_operator(std::size_t extent);

PriorMatrix no_prior();

struct PowerIterationResult {
  double value = 0.0;
  Vector vector;
  int iterations = 0;
};

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration. `warm` seeds the iteration when its size matches; otherwise a
/// fixed deterministic start vector is used.
PowerIterationResult dominant_eigenvalue_psd(const Matrix& a, const Vector* warm = nullptr);

/// Largest singular value of m, via power iteration on m^T m.
double spectral_norm(const Matrix& m);

/// 1 / (0.2 * ||P||_2). Empty when the norm is zero (the regularizer is inactive).
std::optional<double> beta_from_prior(const PriorMatrix& p);

}  // namespace strtd
