#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "strtd/error.hpp"
#include "strtd/priors.hpp"
#include "support.hpp"

using namespace strtd;

namespace {

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

Matrix random_symmetric_weights(Eigen::Index n, std::mt19937_64& rng) {
  Matrix w = test::random_matrix(n, n, rng, 0.0, 1.0);
  w = (w + w.transpose()).eval();
  w.diagonal().setZero();
  return w;
}

Matrix path_weights() {
  Matrix w(3, 3);
  w << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  return w;
}

double svd_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace

TEST_CASE("similarity kernel values") {
  GraphPriorConfig cfg{1, 1.0};
  SUBCASE("identical rows") {
    Matrix rows(2, 3);
    rows << 1, 2, 3, 1, 2, 3;
    const auto g = similarity_matrix(rows, cfg);
    CHECK(g.weights(0, 1) == 1.0);
    CHECK(g.weights(1, 0) == 1.0);
    CHECK(g.weights(0, 0) == 0.0);
  }
  SUBCASE("unit squared distance") {
    Matrix rows(2, 2);
    rows << 0, 0, 1, 0;
    const auto g = similarity_matrix(rows, cfg);
    CHECK(g.weights(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(g.weights(0, 1) == doctest::Approx(0.367879).epsilon(1e-6));
  }
  SUBCASE("no neighbors") {
    std::mt19937_64 rng(1);
    const auto g = similarity_matrix(test::random_matrix(4, 3, rng), GraphPriorConfig{0, 1.0});
    CHECK(g.weights.isZero(0.0));
  }
  SUBCASE("bandwidth scales the exponent") {
    Matrix rows(2, 1);
    rows << 0, 2;
    const auto g = similarity_matrix(rows, GraphPriorConfig{1, 2.0});
    CHECK(g.weights(0, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  }
}

TEST_CASE("similarity with partial observations") {
  Matrix rows(3, 4);
  rows << 0, 0, 0, 0, 1, 9, 1, 9, 5, 5, 5, 5;
  BoolArray obs = BoolArray::Constant(3, 4, true);
  obs(1, 1) = false;
  obs(1, 3) = false;
  const auto g = similarity_matrix(rows, obs, GraphPriorConfig{2, 4.0});
  // rows 0,1 share columns {0,2}: distance 2, rescaled by 4/2.
  CHECK(g.weights(0, 1) == doctest::Approx(std::exp(-4.0 / 4.0)).epsilon(1e-15));
  CHECK(g.disjoint_pairs == 0);

  BoolArray none = BoolArray::Constant(3, 4, true);
  none.row(2).setConstant(false);
  const auto h = similarity_matrix(rows, none, GraphPriorConfig{2, 4.0});
  CHECK(h.disjoint_pairs == 2);
  CHECK(h.weights(0, 2) == 0.0);
  CHECK(h.weights(2, 1) == 0.0);
}

TEST_CASE("kNN graph is symmetric, nonnegative with zero diagonal") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 8);
    const std::size_t p = 1 + rng() % static_cast<std::size_t>(n - 1);
    const auto g = similarity_matrix(test::random_matrix(n, 5, rng), GraphPriorConfig{p, 1.0});
    CHECK(g.weights == g.weights.transpose());
    CHECK(g.weights.minCoeff() >= 0.0);
    CHECK(g.weights.diagonal().isZero(0.0));
    // symmetrizing can only add edges to the p nearest
    for (Eigen::Index i = 0; i < n; ++i) {
      CHECK(static_cast<std::size_t>((g.weights.row(i).array() > 0.0).count()) >= p);
    }
  }
}

TEST_CASE("similarity preconditions") {
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(similarity_matrix(test::random_matrix(1, 3, rng), GraphPriorConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(similarity_matrix(test::random_matrix(4, 3, rng), GraphPriorConfig{4, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(similarity_matrix(test::random_matrix(4, 3, rng), GraphPriorConfig{2, 0.0}), std::invalid_argument);
}

TEST_CASE("laplacian examples") {
  const auto p = laplacian(path_weights());
  Matrix expected(3, 3);
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK(p.kind == PriorKind::laplacian);
  CHECK(p.matrix == expected);
  CHECK(p.penalty == expected);
  CHECK(p.spectral_norm == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(spectral_norm(p.matrix) == doctest::Approx(3.0).epsilon(1e-10));

  const auto z = laplacian(Matrix::Zero(4, 4));
  CHECK(z.matrix.isZero(0.0));
  CHECK(z.spectral_norm == 0.0);
  CHECK_FALSE(beta_from_prior(z).has_value());
}

TEST_CASE("laplacian rejects invalid weights") {
  Matrix asym = path_weights();
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(laplacian(asym), std::invalid_argument);
  Matrix neg = path_weights();
  neg(0, 2) = neg(2, 0) = -0.1;
  CHECK_THROWS_AS(laplacian(neg), std::invalid_argument);
  CHECK_THROWS_AS(laplacian(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("laplacian properties") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 9);
    const Matrix w = trial % 2 ? random_symmetric_weights(n, rng)
                               : similarity_matrix(test::random_matrix(n, 4, rng), GraphPriorConfig{1, 1.0}).weights;
    const auto p = laplacian(w);
    CHECK(p.matrix == p.matrix.transpose());
    CHECK((p.matrix * Vector::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
    for (int k = 0; k < 100; ++k) {
      const Vector x = test::random_matrix(n, 1, rng);
      CHECK(x.dot(p.matrix * x) >= -1e-10);
    }
    // sum_ij w_ij ||u_i - u_j||^2 = 2 tr(U^T L U) for rows u_i of U.
    const Matrix u = test::random_matrix(n, 3, rng);
    double lhs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) lhs += w(i, j) * (u.row(i) - u.row(j)).squaredNorm();
    }
    const double rhs = 2.0 * (u.transpose() * p.matrix * u).trace();
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("temporal operator") {
  const auto p = temporal_operator(3);
  CHECK(p.kind == PriorKind::temporal);
  CHECK(p.matrix.rows() == 2);
  CHECK(p.matrix.cols() == 3);
  Vector u(3);
  u << 1, 2, 4;
  const Vector tu = p.matrix * u;
  CHECK(tu(0) == 1.0);
  CHECK(tu(1) == 2.0);
  CHECK((p.matrix * Vector::Constant(3, 7.5)).isZero(0.0));
  CHECK(p.spectral_norm == doctest::Approx(3.0).epsilon(1e-10));

  Eigen::SelfAdjointEigenSolver<Matrix> es(p.penalty);
  CHECK(es.eigenvalues().maxCoeff() == doctest::Approx(3.0).epsilon(1e-12));

  for (std::size_t n = 2; n < 30; ++n) {
    const auto t = temporal_operator(n);
    Eigen::FullPivLU<Matrix> lu(t.matrix);
    CHECK(lu.rank() == static_cast<Eigen::Index>(n - 1));
    CHECK((t.matrix * Vector::Constant(static_cast<Eigen::Index>(n), -2.0)).isZero(0.0));
    Eigen::SelfAdjointEigenSolver<Matrix> e(t.penalty);
    CHECK(e.eigenvalues().minCoeff() >= -1e-12);
    CHECK(std::abs(t.spectral_norm - e.eigenvalues().maxCoeff()) < 1e-8);
  }
  CHECK_THROWS_AS(temporal_operator(1), std::invalid_argument);
}

TEST_CASE("spectral norm by power iteration") {
  CHECK(spectral_norm(Matrix::Identity(4, 4)) == doctest::Approx(1.0).epsilon(1e-12));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = -5;
  CHECK(spectral_norm(d) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(spectral_norm(Matrix::Zero(3, 2)) == 0.0);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng() % 50);
    const Eigen::Index c = 1 + static_cast<Eigen::Index>(rng() % 50);
    const Matrix m = test::random_matrix(r, c, rng);
    const double oracle = svd_norm(m);
    CHECK(std::abs(spectral_norm(m) - oracle) <= 1e-8 * std::max(1.0, oracle));
  }
}

TEST_CASE("power iteration warm start and null-space start") {
  std::mt19937_64 rng(6);
  const Matrix a = test::random_matrix(12, 12, rng);
  const Matrix s = a.transpose() * a;
  const auto cold = dominant_eigenvalue_psd(s);
  const auto warm = dominant_eigenvalue_psd(s, &cold.vector);
  CHECK(warm.iterations <= 2);
  CHECK(std::abs(warm.value - cold.value) <= 1e-10 * cold.value);

  // rank one along e_0: the deterministic start still finds it
  Matrix e = Matrix::Zero(3, 3);
  e(0, 0) = 2.0;
  CHECK(dominant_eigenvalue_psd(e).value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("beta from the spectral rule") {
  PriorMatrix p;
  p.kind = PriorKind::laplacian;
  p.spectral_norm = 5.0;
  CHECK(*beta_from_prior(p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*beta_from_prior(temporal_operator(3)) == doctest::Approx(1.0 / 0.6).epsilon(1e-10));
  CHECK(*beta_from_prior(laplacian(path_weights())) == doctest::Approx(1.0 / 0.6).epsilon(1e-10));
  CHECK_FALSE(beta_from_prior(no_prior()).has_value());
}

TEST_CASE("prior kind names") {
  CHECK(prior_kind_from_string("laplacian") == PriorKind::laplacian);
  CHECK(prior_kind_from_string("Temporal") == PriorKind::temporal);
  CHECK(prior_kind_from_string("none") == PriorKind::none);
  CHECK_THROWS_AS(prior_kind_from_string("cubic"), std::invalid_argument);
  for (auto k : {PriorKind::none, PriorKind::laplacian, PriorKind::temporal}) {
    CHECK(prior_kind_from_string(to_string(k)) == k);
  }
}
