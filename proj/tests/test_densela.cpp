#include <doctest.h>

#include "oracles.hpp"
#include "support.hpp"
#include "pnewton/densela.hpp"
#include "pnewton/error.hpp"

using namespace pnewton;
using support::code_of;

TEST_CASE("lu_solve examples") {
  const Vector s = densela::lu_solve(Matrix::Identity(3, 3), Vector::LinSpaced(3, 1, 3));
  CHECK(s == Vector::LinSpaced(3, 1, 3));

  Matrix d(2, 2);
  d << 2, 0, 0, 4;
  const Vector s2 = densela::lu_solve(d, support::vec({2, 8}));
  CHECK(s2[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s2[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("lu_solve multiplies back on random well-conditioned systems") {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Matrix m = oracle::random_matrix(20, 20, seed) + 10.0 * Matrix::Identity(20, 20);
    const Vector rhs = oracle::random_vector(20, seed + 100);
    const Vector s = densela::lu_solve(m, rhs);
    CHECK((m * s - rhs).norm() <= 1e-12 * rhs.norm());
  }
}

// Relative residual in the normwise backward-error sense
// ||m s - rhs|| / (||m|| ||s|| + ||rhs||); relative to ||rhs|| alone the
// rounding floor at condition 1e8 is about 1e-9.
TEST_CASE("lu_solve backward error stays small up to condition 1e8") {
  const Index n = 30;
  const Matrix q = oracle::random_matrix(n, n, 7).householderQr().householderQ();
  const Matrix p = oracle::random_matrix(n, n, 8).householderQr().householderQ();
  Vector sv(n);
  for (Index i = 0; i < n; ++i) sv[i] = std::pow(1e-8, static_cast<double>(i) / (n - 1));
  const Matrix m = q * sv.asDiagonal() * p.transpose();
  const Vector rhs = oracle::random_vector(n, 9);
  const Vector s = densela::lu_solve(m, rhs);
  CHECK((m * s - rhs).norm() <= 1e-10 * (m.norm() * s.norm() + rhs.norm()));
}

TEST_CASE("lu_solve errors") {
  Matrix sing = Matrix::Zero(3, 3);
  sing(0, 0) = 1.0;
  sing(1, 1) = 1.0;
  CHECK(code_of([&] { densela::lu_solve(sing, Vector::Ones(3)); }) == ErrorCode::SingularMatrix);
  CHECK(code_of([&] { densela::lu_solve(Matrix::Identity(3, 3), Vector::Ones(2)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { densela::lu_solve(Matrix::Ones(2, 3), Vector::Ones(2)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("cholesky examples and reconstruction") {
  CHECK(densela::cholesky(Matrix::Identity(4, 4)) == Matrix::Identity(4, 4));
  Matrix d(2, 2);
  d << 4, 0, 0, 9;
  const Matrix l = densela::cholesky(d);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(1, 1) == doctest::Approx(3.0));
  CHECK(l(0, 1) == 0.0);

  // Gaussian kernel covariance on 50 points, built directly.
  const Index n = 50;
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const double r = static_cast<double>(i - j) / (n - 1);
      k(i, j) = std::exp(-r * r / (2 * 0.1 * 0.1)) + (i == j ? 1e-10 : 0.0);
    }
  const Matrix lk = densela::cholesky(k);
  CHECK((lk * lk.transpose() - k).norm() <= 1e-10 * k.norm());
  CHECK(lk.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0));
}

TEST_CASE("cholesky rejects indefinite matrices") {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  CHECK(code_of([&] { densela::cholesky(m); }) == ErrorCode::NotPositiveDefinite);
  CHECK(code_of([&] { densela::cholesky(Matrix::Zero(2, 2)); }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("condition_estimate_1norm") {
  CHECK(densela::condition_estimate_1norm(Matrix::Identity(5, 5)) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 1e-6;
  const double kd = densela::condition_estimate_1norm(d);
  CHECK(kd >= 0.5e6);
  CHECK(kd <= 2e6);

  const Matrix s = oracle::random_spd(30, 3, 1e-2);
  const Matrix sinv = s.inverse();
  const double exact = s.cwiseAbs().colwise().sum().maxCoeff() *
                       sinv.cwiseAbs().colwise().sum().maxCoeff();
  const double est = densela::condition_estimate_1norm(s);
  CHECK(est >= exact / 3.0);
  CHECK(est <= exact * 3.0);
}

TEST_CASE("condition_estimate_1norm estimator above dimension 500") {
  const Index n = 520;
  Vector d = Vector::LinSpaced(n, 1.0, 1e4);
  const Matrix q = oracle::random_matrix(n, n, 5).householderQr().householderQ();
  const Matrix m = q * d.asDiagonal() * q.transpose();
  const double exact =
      m.cwiseAbs().colwise().sum().maxCoeff() * m.inverse().cwiseAbs().colwise().sum().maxCoeff();
  const double est = densela::condition_estimate_1norm(m);
  CHECK(est >= exact / 10.0);
  CHECK(est <= exact * 10.0);
}

TEST_CASE("min_norm_least_squares examples") {
  const Vector rhs = oracle::random_vector(4, 2);
  const Vector x = densela::min_norm_least_squares(Matrix::Identity(4, 4), rhs,
                                                   Matrix::Identity(4, 4), Matrix::Identity(4, 4));
  CHECK((x - rhs).norm() <= 1e-14 * rhs.norm());

  const Vector x1 = densela::min_norm_least_squares(Matrix::Ones(2, 1), Vector::Ones(2),
                                                    Matrix::Identity(2, 2), Matrix::Identity(1, 1));
  REQUIRE(x1.size() == 1);
  CHECK(x1[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("min_norm_least_squares stationarity and minimality on rank-deficient systems") {
  for (unsigned seed = 11; seed <= 14; ++seed) {
    // 10 x 6 of rank 4.
    const Matrix a = oracle::random_matrix(10, 4, seed) * oracle::random_matrix(4, 6, seed + 50);
    const Vector rhs = oracle::random_vector(10, seed + 80);
    const Matrix wr = oracle::random_spd(10, seed + 90);
    const Matrix wc = oracle::random_spd(6, seed + 95);
    const Vector x = densela::min_norm_least_squares(a, rhs, wr, wc);

    const Vector grad = a.transpose() * wr.llt().solve(a * x - rhs);
    const double scale = a.norm() * wr.inverse().norm() * (a.norm() * x.norm() + rhs.norm());
    CHECK(grad.norm() <= 1e-10 * scale);

    // Null space of the whitened a: a z = 0. Moving along it keeps the
    // residual and must not decrease ||x||_{wc^-1}.
    Eigen::FullPivLU<Matrix> lu(a);
    const Matrix ker = lu.kernel();
    REQUIRE(ker.cols() == 2);
    const double base = x.dot(wc.llt().solve(x));
    for (Index j = 0; j < ker.cols(); ++j)
      for (double t : {1e-3, -1e-3, 0.5, -0.5}) {
        const Vector xp = x + t * ker.col(j);
        CHECK(xp.dot(wc.llt().solve(xp)) > base);
      }
  }
}

TEST_CASE("min_norm_least_squares rejects indefinite weights") {
  Matrix bad(2, 2);
  bad << 1, 3, 3, 1;
  CHECK(code_of([&] {
    densela::min_norm_least_squares(Matrix::Identity(2, 2), Vector::Ones(2), bad,
                                    Matrix::Identity(2, 2));
  }) == ErrorCode::NotPositiveDefinite);
}

TEST_CASE("all_finite") {
  Matrix m = Matrix::Ones(2, 2);
  CHECK(densela::all_finite(m));
  m(1, 0) = std::nan("");
  CHECK_FALSE(densela::all_finite(m));
}
