#include "pnewton/pnt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pnewton/error.hpp"

namespace pnewton {

void PntOptions::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidParam, what); };
  if (!(tau > 1.0)) fail("tau must exceed 1");
  if (!(lambda0 > 0.0)) fail("lambda0 must be positive");
  if (!(c > 0.0 && c < 1.0)) fail("c must lie in (0, 1)");
  if (!(eta > 0.0 && eta < 1.0)) fail("eta must lie in (0, 1)");
  if (!(tol > 0.0)) fail("tol must be positive");
  if (!(dp_tol > 0.0)) fail("dp_tol must be positive");
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (!(min_step > 0.0)) fail("min_step must be positive");
  if (k0 < 1) fail("k0 must be >= 1");
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::ConvergedMerit: return "converged-merit";
    case SolveStatus::ConvergedDp: return "converged-dp";
    case SolveStatus::StepTooSmall: return "step-too-small";
    case SolveStatus::MaxIters: return "max-iters";
  }
  return "unknown";
}

namespace pnt {
namespace {

void check_state(const ProjectedState& ps) {
  if (ps.y_bar.size() != ps.b_mat.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "y_bar length differs from B_k column count");
  }
}

Vector padded(const Vector& y, Index len) {
  Vector out = Vector::Zero(len);
  out.head(std::min(len, y.size())) = y.head(std::min(len, y.size()));
  return out;
}

}  // namespace

Vector projected_residual(const Matrix& b_mat, const Vector& y, double beta1) {
  if (y.size() != b_mat.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "projected residual: y has wrong length");
  }
  Vector r = b_mat * y;
  r[0] -= beta1;
  return r;
}

Vector projected_gradient(const ProjectedState& ps) {
  check_state(ps);
  const Vector r = projected_residual(ps.b_mat, ps.y_bar, ps.beta1);
  const Index k = ps.y_bar.size();
  Vector f(k + 1);
  f.head(k) = ps.lambda * (ps.b_mat.transpose() * r) + ps.y_bar;
  f[k] = 0.5 * r.squaredNorm() - 0.5 * ps.tau_m;
  return f;
}

Matrix projected_jacobian(const ProjectedState& ps) {
  check_state(ps);
  const Vector r = projected_residual(ps.b_mat, ps.y_bar, ps.beta1);
  const Index k = ps.y_bar.size();
  Matrix j = Matrix::Zero(k + 1, k + 1);
  Matrix btb = ps.b_mat.transpose() * ps.b_mat;
  const Vector btr = ps.b_mat.transpose() * r;
  for (Index col = 0; col < k; ++col) {
    for (Index row = col; row < k; ++row) {
      const double v = ps.lambda * btb(row, col) + (row == col ? 1.0 : 0.0);
      j(row, col) = v;
      j(col, row) = v;
    }
    j(k, col) = btr[col];
    j(col, k) = btr[col];
  }
  return j;
}

NewtonDirection newton_direction(const ProjectedState& ps, int k) {
  const Vector f = projected_gradient(ps);
  const Matrix j = projected_jacobian(ps);
  Vector d;
  try {
    d = densela::lu_solve(j, -f);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
    std::ostringstream msg;
    msg << "projected Jacobian singular at k=" << k << ", lambda=" << ps.lambda;
    throw Error(ErrorCode::SingularProjectedJacobian, msg.str());
  }
  const Index n = ps.y_bar.size();
  return {d.head(n), d[n]};
}

double merit_current(const ProjectedState& ps) {
  return 0.5 * projected_gradient(ps).squaredNorm();
}

double merit_trial(const Matrix& b_bar, const Vector& y_trial, double lambda_trial, double beta1,
                   double tau_m) {
  ProjectedState ps;
  ps.y_bar = y_trial;
  ps.lambda = lambda_trial;
  ps.beta1 = beta1;
  ps.b_mat = b_bar;
  ps.tau_m = tau_m;
  return merit_current(ps);
}

ArmijoStep armijo_search(const ProjectedState& ps, const NewtonDirection& d,
                         const PntOptions& opts) {
  const double f2 = projected_gradient(ps).squaredNorm();
  double gamma = 1.0;
  if (d.dlambda < 0.0) gamma = std::min(1.0, -opts.eta * ps.lambda / d.dlambda);
  ArmijoStep step;
  const Index len = ps.b_bar.cols();
  while (true) {
    const Vector y = padded(ps.y_bar + gamma * d.dy, len);
    const double lambda = ps.lambda + gamma * d.dlambda;
    const double h = merit_trial(ps.b_bar, y, lambda, ps.beta1, ps.tau_m);
    if (h <= (0.5 - opts.c * gamma) * f2) {
      step.gamma = gamma;
      step.merit = h;
      return step;
    }
    gamma *= opts.eta;
    ++step.backtracks;
    if (gamma < opts.min_step) {
      std::ostringstream msg;
      msg << "Armijo step fell below " << opts.min_step << " after " << step.backtracks
          << " backtracks";
      throw Error(ErrorCode::StepTooSmall, msg.str());
    }
  }
}

namespace {

PntResult solve_from(const ProblemInstance& p, const PntOptions& opts,
                     const PntObserver& observer) {
  opts.validate();
  p.validate();
  const double tau_m = opts.tau * static_cast<double>(p.rows());

  if (opts.check_assumption &&
      static_cast<double>(p.rows()) * static_cast<double>(p.cols()) <= linop::kMaterializeGuard) {
    ProblemInstance q = p;
    q.tau = opts.tau;
    const auto rep = problems::check_assumption(q);
    if (rep.status != problems::Assumption::Holds) {
      throw Error(ErrorCode::AssumptionViolated,
                  "feasibility check " + problems::to_string(rep.status));
    }
  }

  BidiagState gkb = gengkb::init(*p.a, *p.m_inv, *p.n_cov, p.b, opts.reorthogonalize);
  const double beta1 = gkb.beta1();
  if (!(beta1 * beta1 > tau_m)) {
    throw Error(ErrorCode::AssumptionViolated, "||b||^2_{M^-1} does not exceed tau m");
  }

  const double lambda0 = opts.lambda0;
  const double top = lambda0 * beta1 * gkb.alphas[0];
  const double bottom = 0.5 * (beta1 * beta1 - tau_m);
  const double h0 = 0.5 * (top * top + bottom * bottom);

  PntResult res;
  IterationRecord first;
  first.k = 0;
  first.lambda = lambda0;
  first.merit_h = h0;
  first.residual_mnorm = beta1;
  first.cond_j = std::numeric_limits<double>::quiet_NaN();
  res.history.push_back(first);

  for (int i = 1; i < opts.k0 && !gkb.terminated(); ++i) {
    gengkb::expand(gkb, *p.a, *p.m_inv, *p.n_cov);
  }

  std::vector<Vector> y_history{Vector()};
  Vector y;
  double lambda = lambda0;
  res.status = SolveStatus::MaxIters;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const int k = opts.k0 + iter;
    if (!gkb.terminated()) gengkb::expand(gkb, *p.a, *p.m_inv, *p.n_cov);

    ProjectedState ps;
    ps.b_mat = gengkb::bidiag_matrix(gkb, BidiagVariant::B);
    ps.b_bar = gengkb::bidiag_matrix(gkb, BidiagVariant::BBar);
    ps.y_bar = padded(y, ps.b_mat.cols());
    ps.lambda = lambda;
    ps.beta1 = beta1;
    ps.tau_m = tau_m;

    const NewtonDirection d = newton_direction(ps, k);
    const double cond = densela::condition_estimate_1norm(projected_jacobian(ps));
    ArmijoStep step;
    try {
      step = armijo_search(ps, d, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepTooSmall) throw;
      res.status = SolveStatus::StepTooSmall;
      break;
    }

    const Vector y_new = ps.y_bar + step.gamma * d.dy;
    const double lambda_new = lambda + step.gamma * d.dlambda;
    if (!(lambda_new > 0.0)) {
      throw Error(ErrorCode::InvalidParam, "lambda lost positivity");
    }
    const double res_sq = projected_residual(ps.b_mat, y_new, beta1).squaredNorm();

    if (observer) {
      IterationDetail det;
      det.k = k;
      det.before = &ps;
      det.dy = d.dy;
      det.dlambda = d.dlambda;
      det.gamma = step.gamma;
      det.y_new = y_new;
      det.lambda_new = lambda_new;
      det.merit_prev = 0.5 * projected_gradient(ps).squaredNorm();
      det.merit_new = step.merit;
      det.gkb = &gkb;
      observer(det);
    }

    y = y_new;
    lambda = lambda_new;
    y_history.push_back(y);

    IterationRecord rec;
    rec.k = k;
    rec.lambda = lambda;
    rec.merit_h = step.merit;
    rec.residual_mnorm = std::sqrt(res_sq);
    rec.gamma = step.gamma;
    rec.backtracks = step.backtracks;
    rec.cond_j = cond;
    res.history.push_back(rec);

    const bool dp_ok = std::abs(res_sq - tau_m) <= opts.dp_tol;
    const bool merit_ok = std::sqrt(step.merit) <= opts.tol * std::sqrt(h0);
    if (opts.stop != StopRule::Merit && dp_ok) {
      res.status = SolveStatus::ConvergedDp;
      break;
    }
    if (opts.stop != StopRule::Dp && merit_ok) {
      res.status = SolveStatus::ConvergedMerit;
      break;
    }
  }

  res.x = gengkb::combine_v(gkb, y);
  res.lambda = lambda;
  res.mu = 1.0 / lambda;

  if (opts.record_rel_error && p.x_true) {
    const double xt = p.x_true->norm();
    for (std::size_t i = 0; i < res.history.size(); ++i) {
      const Vector xi = gengkb::combine_v(gkb, y_history[i]);
      res.history[i].rel_error = (xi - *p.x_true).norm() / xt;
    }
  }
  return res;
}

}  // namespace

PntResult pnt_solve(const ProblemInstance& p, const PntOptions& opts,
                    const PntObserver& observer) {
  return solve_from(p, opts, observer);
}

PntResult pnt_md_solve(const ProblemInstance& p, const PntOptions& opts,
                       const PntObserver& observer) {
  if (opts.k0 < 2) throw Error(ErrorCode::InvalidParam, "PNT-md requires k0 >= 2");
  return solve_from(p, opts, observer);
}

}  // namespace pnt
}  // namespace pnewton
