#pragma once

// Dense oracles: direct Tikhonov solves, the discrepancy parameter by
// bisection, an optimal-parameter grid search and full-space Newton.

#include <vector>

#include "pnewton/densela.hpp"
#include "pnewton/pnt.hpp"
#include "pnewton/problems.hpp"

namespace pnewton {

struct DenseProblem {
  Matrix a;
  Matrix m_inv;
  Matrix m_mat;
  Matrix n_inv;
  Matrix n_mat;
  Vector b;
  double tau_m = 0.0;

  // Cached products.
  Matrix gram;     // A' M^-1 A
  Vector atb;      // A' M^-1 b
  Matrix n_at;     // N A'
  Matrix a_n_at;   // A N A'
  Matrix n_chol;   // lower L with L L' = N
};

struct LambdaSolution {
  double lambda = 0.0;
  Vector x;
};

namespace baselines {

/// Materializes every operator; throws TooLarge beyond the dense guard.
DenseProblem make_dense_problem(const ProblemInstance& p, double tau);

/// x_lambda solving (N^-1 + lambda A'M^-1A) x = lambda A'M^-1 b.
Vector tikhonov_solve(const DenseProblem& dp, double lambda);

/// H(lambda) = (||A x_lambda - b||^2_{M^-1} - tau m) / 2.
double discrepancy_h(const DenseProblem& dp, double lambda);

LambdaSolution dp_lambda_bisection(const DenseProblem& dp, double tol_lambda = 1e-12);

/// 60 points log-spaced over [1e-4, 1e6].
std::vector<double> default_lambda_grid();

/// Grid argmin of ||x_lambda - x_true||, refined once with 20 points between
/// the neighbours of the coarse minimizer.
LambdaSolution optimal_lambda_grid(const DenseProblem& dp, const Vector& x_true,
                                   const std::vector<double>& grid);

/// Full-space KKT residual F(x, lambda) with the dense N^-1.
Vector full_gradient(const DenseProblem& dp, const Vector& x, double lambda);
Matrix full_jacobian(const DenseProblem& dp, const Vector& x, double lambda);

/// Newton on F(x, lambda) = 0 with merit h_w = ||F||^2 / 2 (w = 1).
PntResult full_newton_solve(const DenseProblem& dp, const PntOptions& opts,
                            const Vector* x_true = nullptr);

}  // namespace baselines
}  // namespace pnewton
