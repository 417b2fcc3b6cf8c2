#include "strtd/priors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "strtd/error.hpp"

namespace strtd {

namespace {

constexpr int kMaxPowerIterations = 200000;
constexpr double kResidualTolerance = 1e-11;

Vector default_start(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 0.7390851 * static_cast<double>(i));
  return v.normalized();
}

}  // namespace

std::string_view to_string(PriorKind kind) {
  switch (kind) {
    case PriorKind::none:
      return "none";
    case PriorKind::laplacian:
      return "laplacian";
    case PriorKind::temporal:
      return "temporal";
  }
  return "none";
}

PriorKind prior_kind_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "none") return PriorKind::none;
  if (lower == "laplacian" || lower == "manifold" || lower == "spatial") return PriorKind::laplacian;
  if (lower == "temporal" || lower == "toeplitz") return PriorKind::temporal;
  throw std::invalid_argument("unknown regularizer kind '" + std::string(name) + "'");
}

SimilarityGraph similarity_matrix(const Matrix& rows,
                                  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& observed,
                                  const GraphPriorConfig& cfg) {
  const auto nodes = static_cast<std::size_t>(rows.rows());
  if (nodes < 2) throw std::invalid_argument("similarity graph needs at least 2 nodes");
  if (cfg.neighbors >= nodes) {
    throw std::invalid_argument("neighbor count " + std::to_string(cfg.neighbors) + " must be below the node count " +
                                std::to_string(nodes));
  }
  if (!(cfg.bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  if (observed.rows() != rows.rows() || observed.cols() != rows.cols()) {
    throw DimensionError("observation flags do not match the feature matrix");
  }

  const Eigen::Index n = rows.rows();
  const Eigen::Index cols = rows.cols();
  // Squared distances; negative marks "no common column".
  Matrix dist2 = Matrix::Constant(n, n, -1.0);
  SimilarityGraph out;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double acc = 0.0;
      Eigen::Index common = 0;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (observed(i, c) && observed(j, c)) {
          const double d = rows(i, c) - rows(j, c);
          acc += d * d;
          ++common;
        }
      }
      if (common == 0) {
        ++out.disjoint_pairs;
        continue;
      }
      const double d2 = acc * static_cast<double>(cols) / static_cast<double>(common);
      dist2(i, j) = d2;
      dist2(j, i) = d2;
    }
  }

  out.weights = Matrix::Zero(n, n);
  std::vector<std::pair<double, Eigen::Index>> candidates;
  for (Eigen::Index i = 0; i < n; ++i) {
    candidates.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && dist2(i, j) >= 0.0) candidates.emplace_back(dist2(i, j), j);
    }
    const auto keep = std::min(cfg.neighbors, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end());
    for (std::size_t k = 0; k < keep; ++k) {
      out.weights(i, candidates[k].second) = std::exp(-candidates[k].first / cfg.bandwidth);
    }
  }
  out.weights = out.weights.cwiseMax(out.weights.transpose()).eval();
  return out;
}

SimilarityGraph similarity_matrix(const Matrix& rows, const GraphPriorConfig& cfg) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> all =
      Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows.rows(), rows.cols(), true);
  return similarity_matrix(rows, all, cfg);
}

PriorMatrix laplacian(const Matrix& w) {
  if (w.rows() != w.cols()) throw DimensionError("similarity matrix must be square");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (w(i, j) < 0.0) throw std::invalid_argument("similarity matrix has negative entries");
      if (std::abs(w(i, j) - w(j, i)) > 1e-12 * scale) {
        throw std::invalid_argument("similarity matrix is not symmetric");
      }
    }
  }
  Matrix off = w;
  off.diagonal().setZero();
  PriorMatrix p;
  p.kind = PriorKind::laplacian;
  p.matrix = -off;
  p.matrix.diagonal() = off.rowwise().sum();
  p.penalty = p.matrix;
  p.spectral_norm = dominant_eigenvalue_psd(p.penalty).value;
  return p;
}

PriorMatrix temporal_operator(std::size_t extent) {
  if (extent < 2) throw std::invalid_argument("temporal operator needs an extent of at least 2");
  const auto n = static_cast<Eigen::Index>(extent);
  PriorMatrix p;
  p.kind = PriorKind::temporal;
  p.matrix = Matrix::Zero(n - 1, n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    p.matrix(j, j) = -1.0;
    p.matrix(j, j + 1) = 1.0;
  }
  p.penalty = p.matrix.transpose() * p.matrix;
  p.spectral_norm = dominant_eigenvalue_psd(p.penalty).value;
  return p;
}

PriorMatrix no_prior() { return PriorMatrix{}; }

PowerIterationResult dominant_eigenvalue_psd(const Matrix& a, const Vector* warm) {
  if (a.rows() != a.cols()) throw DimensionError("power iteration needs a square matrix");
  PowerIterationResult res;
  const Eigen::Index n = a.rows();
  if (n == 0) return res;

  Vector v = (warm != nullptr && warm->size() == n && warm->norm() > 0.0) ? warm->normalized() : default_start(n);
  Vector av = a * v;
  // A start vector inside the null space; walk the basis until one is not.
  for (Eigen::Index j = 0; av.norm() == 0.0 && j < n; ++j) {
    v = Vector::Unit(n, j);
    av = a * v;
  }
  if (av.norm() == 0.0) {
    res.vector = v;
    return res;
  }

  double lambda = v.dot(av);
  for (int it = 1; it <= kMaxPowerIterations; ++it) {
    res.iterations = it;
    v = av / av.norm();
    av.noalias() = a * v;
    lambda = v.dot(av);
    const double residual = (av - lambda * v).norm();
    if (residual <= kResidualTolerance * std::abs(lambda)) break;
  }
  res.value = std::max(lambda, 0.0);
  res.vector = std::move(v);
  return res;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.rows() < m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  return std::sqrt(dominant_eigenvalue_psd(gram).value);
}

std::optional<double> beta_from_prior(const PriorMatrix& p) {
  if (p.kind == PriorKind::none || !(p.spectral_norm > 0.0)) return std::nullopt;
  return 1.0 / (0.2 * p.spectral_norm);
}

}  // namespace strtd
