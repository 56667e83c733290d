#pragma once

// Small dense linear algebra used by the projected systems and by the
// desk-scale oracles. Storage is Eigen; the functions here add the error
// contract (singularity thresholds, SPD checks) the solvers rely on.

#include <Eigen/Dense>

namespace pnewton {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace densela {

/// Relative pivot threshold below which a matrix is reported singular.
inline constexpr double kSingularRelTol = 1e-14;

/// Partial-pivot LU with the library's singularity test.
class LuFactor {
 public:
  explicit LuFactor(const Matrix& m);

  Vector solve(const Vector& rhs) const;
  Matrix inverse() const;
  Index dim() const { return lu_.rows(); }
  /// Reciprocal 1-norm condition estimate from the factorization.
  double rcond() const { return lu_.rcond(); }

 private:
  Eigen::PartialPivLU<Matrix> lu_;
};

Vector lu_solve(const Matrix& m, const Vector& rhs);

/// Lower Cholesky factor L with L * L^T = m.
Matrix cholesky(const Matrix& m);

/// kappa_1(m) = ||m||_1 ||m^{-1}||_1. Exact up to dimension 500, Higham/Hager
/// estimate above.
double condition_estimate_1norm(const Matrix& m);

/// Minimizer of ||x||_{w_col^{-1}} among the minimizers of
/// ||a x - rhs||_{w_row^{-1}}. Both weights are passed un-inverted (the
/// covariances), so w_row = M and w_col = N for the inverse problem.
Vector min_norm_least_squares(const Matrix& a, const Vector& rhs, const Matrix& w_row,
                              const Matrix& w_col);

bool all_finite(const Matrix& m);

}  // namespace densela
}  // namespace pnewton
