#include "pnewton/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pnewton/error.hpp"
#include "pnewton/linop.hpp"

namespace pnewton::baselines {
namespace {

Matrix spd_inverse_from_factor(const Matrix& l) {
  Matrix inv = Matrix::Identity(l.rows(), l.cols());
  l.triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return 0.5 * (inv + inv.transpose());
}

// w = (M + lambda A N A')^-1 b; then x_lambda = lambda N A' w and
// A x_lambda - b = -M w.
Vector dual_weights(const DenseProblem& dp, double lambda) {
  const Matrix k = dp.m_mat + lambda * dp.a_n_at;
  Eigen::LLT<Matrix> llt(0.5 * (k + k.transpose()));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Tikhonov system not positive definite");
  }
  return llt.solve(dp.b);
}

double m_norm_sq(const DenseProblem& dp, const Vector& r) { return r.dot(dp.m_inv * r); }

}  // namespace

DenseProblem make_dense_problem(const ProblemInstance& p, double tau) {
  p.validate();
  DenseProblem dp;
  dp.a = linop::materialize(*p.a);
  dp.m_inv = linop::materialize(*p.m_inv);
  dp.m_mat = p.m_inv->has_inverse() ? linop::materialize_inverse(*p.m_inv)
                                    : spd_inverse_from_factor(densela::cholesky(dp.m_inv));
  dp.n_mat = linop::materialize(*p.n_cov);
  dp.n_chol = densela::cholesky(dp.n_mat);
  dp.n_inv = spd_inverse_from_factor(dp.n_chol);
  dp.b = p.b;
  dp.tau_m = tau * static_cast<double>(p.rows());

  const Matrix mia = dp.m_inv * dp.a;
  dp.gram = dp.a.transpose() * mia;
  dp.gram = 0.5 * (dp.gram + dp.gram.transpose()).eval();
  dp.atb = mia.transpose() * dp.b;
  dp.n_at = dp.n_mat * dp.a.transpose();
  dp.a_n_at = dp.a * dp.n_at;
  dp.a_n_at = 0.5 * (dp.a_n_at + dp.a_n_at.transpose()).eval();
  return dp;
}

Vector tikhonov_solve(const DenseProblem& dp, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidParam, "lambda must be >= 0");
  if (lambda == 0.0) return Vector::Zero(dp.a.cols());
  return lambda * (dp.n_at * dual_weights(dp, lambda));
}

double discrepancy_h(const DenseProblem& dp, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidParam, "lambda must be >= 0");
  if (lambda == 0.0) return 0.5 * (m_norm_sq(dp, dp.b) - dp.tau_m);
  const Vector w = dual_weights(dp, lambda);
  return 0.5 * (w.dot(dp.m_mat * w) - dp.tau_m);
}

LambdaSolution dp_lambda_bisection(const DenseProblem& dp, double tol_lambda) {
  if (!(discrepancy_h(dp, 0.0) > 0.0)) {
    throw Error(ErrorCode::NoBracket, "H(0) <= 0: the data lie within the noise level");
  }
  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (discrepancy_h(dp, hi) >= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60) {
      throw Error(ErrorCode::NoBracket, "H stays nonnegative up to lambda = 2^60");
    }
  }
  while (hi - lo > tol_lambda * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (discrepancy_h(dp, mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  LambdaSolution out;
  out.lambda = 0.5 * (lo + hi);
  out.x = tikhonov_solve(dp, out.lambda);
  return out;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g;
  for (int i = 0; i < 60; ++i) g.push_back(std::pow(10.0, -4.0 + 10.0 * i / 59.0));
  return g;
}

LambdaSolution optimal_lambda_grid(const DenseProblem& dp, const Vector& x_true,
                                   const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::InvalidParam, "empty lambda grid");
  auto err = [&](double lam) { return (tikhonov_solve(dp, lam) - x_true).norm(); };
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = err(grid[i]);
    if (e < best_err) {
      best_err = e;
      best = i;
    }
  }
  double best_lambda = grid[best];
  if (grid.size() > 1) {
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    if (lo > 0.0 && hi > lo) {
      for (int i = 0; i < 20; ++i) {
        const double lam = lo * std::pow(hi / lo, i / 19.0);
        const double e = err(lam);
        if (e < best_err) {
          best_err = e;
          best_lambda = lam;
        }
      }
    }
  }
  return {best_lambda, tikhonov_solve(dp, best_lambda)};
}

Vector full_gradient(const DenseProblem& dp, const Vector& x, double lambda) {
  const Index n = x.size();
  const Vector r = dp.a * x - dp.b;
  Vector f(n + 1);
  f.head(n) = lambda * (dp.gram * x - dp.atb) + dp.n_inv * x;
  f[n] = 0.5 * m_norm_sq(dp, r) - 0.5 * dp.tau_m;
  return f;
}

Matrix full_jacobian(const DenseProblem& dp, const Vector& x, double lambda) {
  const Index n = x.size();
  const Vector g = dp.gram * x - dp.atb;
  Matrix j(n + 1, n + 1);
  j.topLeftCorner(n, n) = lambda * dp.gram + dp.n_inv;
  j.topRightCorner(n, 1) = g;
  j.bottomLeftCorner(1, n) = g.transpose();
  j(n, n) = 0.0;
  return j;
}

PntResult full_newton_solve(const DenseProblem& dp, const PntOptions& opts,
                            const Vector* x_true) {
  opts.validate();
  const Index n = dp.a.cols();
  Vector x = Vector::Zero(n);
  double lambda = opts.lambda0;
  const double tau_m = dp.tau_m;

  Vector f = full_gradient(dp, x, lambda);
  const double h0 = 0.5 * f.squaredNorm();
  PntResult res;
  auto rel_err = [&](const Vector& xi) -> std::optional<double> {
    if (!x_true || !opts.record_rel_error) return std::nullopt;
    return (xi - *x_true).norm() / x_true->norm();
  };
  IterationRecord first;
  first.lambda = lambda;
  first.merit_h = h0;
  first.residual_mnorm = std::sqrt(m_norm_sq(dp, dp.b));
  first.cond_j = std::numeric_limits<double>::quiet_NaN();
  first.rel_error = rel_err(x);
  res.history.push_back(first);
  res.status = SolveStatus::MaxIters;

  for (int k = 1; k <= opts.max_iters; ++k) {
    const Matrix j = full_jacobian(dp, x, lambda);
    std::optional<densela::LuFactor> lu;
    try {
      lu.emplace(j);
    } catch (const Error& e) {
      std::ostringstream msg;
      msg << "full Jacobian singular at k=" << k << ": " << e.what();
      throw Error(ErrorCode::SingularMatrix, msg.str());
    }
    const Vector d = lu->solve(-f);
    const double cond =
        j.rows() <= 500 ? densela::condition_estimate_1norm(j) : 1.0 / lu->rcond();
    const Vector dx = d.head(n);
    const double dl = d[n];

    const double f2 = f.squaredNorm();
    double gamma = dl < 0.0 ? std::min(1.0, -opts.eta * lambda / dl) : 1.0;
    int backtracks = 0;
    bool accepted = false;
    Vector f_new;
    while (gamma >= opts.min_step) {
      f_new = full_gradient(dp, x + gamma * dx, lambda + gamma * dl);
      if (0.5 * f_new.squaredNorm() <= (0.5 - opts.c * gamma) * f2) {
        accepted = true;
        break;
      }
      gamma *= opts.eta;
      ++backtracks;
    }
    if (!accepted) {
      res.status = SolveStatus::StepTooSmall;
      break;
    }
    x += gamma * dx;
    lambda += gamma * dl;
    f = f_new;

    const Vector r = dp.a * x - dp.b;
    const double res_sq = m_norm_sq(dp, r);
    IterationRecord rec;
    rec.k = k;
    rec.lambda = lambda;
    rec.merit_h = 0.5 * f.squaredNorm();
    rec.residual_mnorm = std::sqrt(res_sq);
    rec.gamma = gamma;
    rec.backtracks = backtracks;
    rec.cond_j = cond;
    rec.rel_error = rel_err(x);
    res.history.push_back(rec);

    if (opts.stop != StopRule::Merit && std::abs(res_sq - tau_m) <= opts.dp_tol) {
      res.status = SolveStatus::ConvergedDp;
      break;
    }
    if (opts.stop != StopRule::Dp && std::sqrt(rec.merit_h) <= opts.tol * std::sqrt(h0)) {
      res.status = SolveStatus::ConvergedMerit;
      break;
    }
  }
  res.x = x;
  res.lambda = lambda;
  res.mu = 1.0 / lambda;
  return res;
}

}  // namespace pnewton::baselines
