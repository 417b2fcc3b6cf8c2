#include <doctest.h>

#include "strtd/error.hpp"
#include "strtd/mask.hpp"
#include "strtd/tensor.hpp"
#include "support.hpp"

using namespace strtd;

namespace {

DenseTensor example_222() { return DenseTensor({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}); }

}  // namespace

TEST_CASE("unfold of the 2x2x2 example") {
  const auto t = example_222();
  CHECK(t.at({0, 1, 0}) == 3);
  CHECK(t.at({1, 0, 1}) == 6);
  Matrix expected(2, 4);
  expected << 1, 3, 5, 7, 2, 4, 6, 8;
  CHECK(unfold(t, 0) == expected);
}

TEST_CASE("unfold matches a coordinate loop") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = test::random_tensor(test::random_dims(rng, 4, 4), rng);
    for (std::size_t n = 0; n < t.order(); ++n) {
      CHECK(unfold(t, n) == test::unfold_oracle(t, n));
    }
  }
}

TEST_CASE("unfold of an order-1 tensor is a column") {
  const DenseTensor t({4}, {1, 2, 3, 4});
  const Matrix m = unfold(t, 0);
  CHECK(m.rows() == 4);
  CHECK(m.cols() == 1);
  CHECK(m(2, 0) == 3);
}

TEST_CASE("unfold rejects a bad mode") { CHECK_THROWS_AS(unfold(example_222(), 3), DimensionError); }

TEST_CASE("fold inverts unfold") {
  Matrix m(2, 4);
  m << 1, 3, 5, 7, 2, 4, 6, 8;
  CHECK(fold(m, 0, {2, 2, 2}) == example_222());

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = test::random_tensor({3, 4, 5}, rng);
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(fold(unfold(t, n), n, t.dims()) == t);
      const Matrix u = unfold(t, n);
      CHECK(unfold(fold(u, n, t.dims()), n) == u);
    }
  }
}

TEST_CASE("fold rejects a wrong shape") {
  CHECK_THROWS_AS(fold(Matrix::Zero(2, 3), 0, {2, 2, 2}), DimensionError);
  CHECK_THROWS_AS(fold(Matrix::Zero(3, 4), 1, {2, 2, 2}), DimensionError);
}

TEST_CASE("mode product examples") {
  const auto t = example_222();
  SUBCASE("column sums") {
    Matrix ones(1, 2);
    ones << 1, 1;
    const auto r = mode_n_product(t, ones, 0);
    CHECK(r.dims() == Extents{1, 2, 2});
    CHECK(r.at({0, 0, 0}) == 3);
    CHECK(r.at({0, 1, 0}) == 7);
    CHECK(r.at({0, 0, 1}) == 11);
    CHECK(r.at({0, 1, 1}) == 15);
  }
  SUBCASE("identity") {
    for (std::size_t n = 0; n < 3; ++n) CHECK(mode_n_product(t, Matrix::Identity(2, 2), n) == t);
  }
  SUBCASE("zero matrix") {
    const auto r = mode_n_product(t, Matrix::Zero(3, 2), 2);
    CHECK(r.dims() == Extents{2, 2, 3});
    CHECK(frobenius_norm(r) == 0.0);
  }
  SUBCASE("dimension mismatch") { CHECK_THROWS_AS(mode_n_product(t, Matrix::Zero(2, 3), 1), DimensionError); }
}

TEST_CASE("mode product matches the triple loop and the unfolding identity") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto t = test::random_tensor(test::random_dims(rng, 3, 5), rng);
    for (std::size_t n = 0; n < 3; ++n) {
      const Matrix m =
          test::random_matrix(static_cast<Eigen::Index>(1 + rng() % 5), static_cast<Eigen::Index>(t.dim(n)), rng);
      const auto r = mode_n_product(t, m, n);
      const auto oracle = test::mode_product_oracle(t, m, n);
      CHECK(test::max_abs_diff(r, oracle) < 1e-12);
      auto dims = t.dims();
      dims[n] = static_cast<std::size_t>(m.rows());
      CHECK(test::max_abs_diff(r, fold(m * unfold(t, n), n, dims)) < 1e-12);
    }
  }
}

TEST_CASE("vec(G x U) equals the Kronecker product times vec(G)") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = test::random_tensor(test::random_dims(rng, 3, 4), rng);
    std::vector<Matrix> us;
    for (std::size_t n = 0; n < 3; ++n) {
      us.push_back(
          test::random_matrix(static_cast<Eigen::Index>(1 + rng() % 4), static_cast<Eigen::Index>(g.dim(n)), rng));
    }
    const auto z = multi_mode_product(g, us);
    const Vector oracle = test::kron_all(us, us.size()) * g.vec();
    CHECK((z.vec() - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("multi_mode_product_skip equals the explicit Kronecker formula") {
  std::mt19937_64 rng(23);
  SUBCASE("3x4x2 instances") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto g = test::random_tensor({3, 4, 2}, rng);
      std::vector<Matrix> us;
      for (std::size_t n = 0; n < 3; ++n) {
        us.push_back(
            test::random_matrix(static_cast<Eigen::Index>(g.dim(n)), static_cast<Eigen::Index>(g.dim(n)), rng));
      }
      for (std::size_t skip = 0; skip < 3; ++skip) {
        const Matrix oracle = unfold(g, skip) * test::kron_all(us, skip).transpose();
        CHECK((multi_mode_product_skip(g, us, skip) - oracle).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
  SUBCASE("identity factors") {
    const auto g = test::random_tensor({3, 4, 2}, rng);
    const std::vector<Matrix> ids{Matrix::Identity(3, 3), Matrix::Identity(4, 4), Matrix::Identity(2, 2)};
    for (std::size_t skip = 0; skip < 3; ++skip) CHECK(multi_mode_product_skip(g, ids, skip) == unfold(g, skip));
  }
  SUBCASE("order one") {
    const DenseTensor g({3}, {1, 2, 3});
    const std::vector<Matrix> us{Matrix::Constant(3, 3, 7.0)};
    CHECK(multi_mode_product_skip(g, us, 0) == unfold(g, 0));
  }
  SUBCASE("mismatch") {
    const auto g = test::random_tensor({3, 4, 2}, rng);
    const std::vector<Matrix> us{Matrix::Identity(3, 3), Matrix::Identity(5, 5), Matrix::Identity(2, 2)};
    CHECK_THROWS_AS(multi_mode_product_skip(g, us, 0), DimensionError);
  }
}

TEST_CASE("mode products on distinct modes commute") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = test::random_tensor({3, 3, 3}, rng);
    const Matrix a = test::random_matrix(3, 3, rng);
    const Matrix b = test::random_matrix(3, 3, rng);
    const auto ab = mode_n_product(mode_n_product(t, a, 0), b, 1);
    const auto ba = mode_n_product(mode_n_product(t, b, 1), a, 0);
    CHECK(test::max_abs_diff(ab, ba) < 1e-12);
  }
}

TEST_CASE("norms") {
  CHECK(frobenius_norm(DenseTensor({2, 3})) == 0.0);
  CHECK(frobenius_norm(DenseTensor({2}, {3, 4})) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(l1_norm(DenseTensor({3}, {-1, 2, -3})) == 6.0);

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = test::random_tensor(test::random_dims(rng, 3, 5), rng);
    double sum = 0.0;
    for (double v : t.data()) sum += v * v;
    CHECK(std::abs(squared_norm(t) - sum) <= 1e-12 * sum);
    for (std::size_t n = 0; n < 3; ++n) {
      CHECK(std::abs(unfold(t, n).norm() - frobenius_norm(t)) <= 1e-12 * frobenius_norm(t));
    }
  }
}

TEST_CASE("masked projection") {
  std::mt19937_64 rng(37);
  const auto t = test::random_tensor({3, 4, 2}, rng);
  CHECK(masked_project(t, ObservationMask(t.dims(), true)) == t);
  CHECK(frobenius_norm(masked_project(t, ObservationMask(t.dims(), false))) == 0.0);

  ObservationMask single(t.dims(), false);
  const std::size_t where = t.offset(std::vector<std::size_t>{2, 1, 1});
  single.set(where, true);
  const auto p = masked_project(t, single);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(p[k] == (k == where ? t[k] : 0.0));

  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::uint8_t> flags(t.size());
    for (auto& f : flags) f = static_cast<std::uint8_t>(rng() % 2);
    const ObservationMask m(t.dims(), flags);
    CHECK(masked_project(masked_project(t, m), m) == masked_project(t, m));
  }
}

TEST_CASE("tensor construction checks") {
  CHECK_THROWS_AS(DenseTensor({2, 2}, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(DenseTensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(DenseTensor(Extents{}), DimensionError);
  const auto t = example_222();
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.offset(t.index_of(k)) == k);
}
