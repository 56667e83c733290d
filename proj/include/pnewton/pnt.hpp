#pragma once

// Projected Newton solver for the noise-constrained Tikhonov problem
//   min ||x||^2_{N^-1}  s.t.  ||Ax - b||^2_{M^-1} = tau m
// with x restricted to the gen-GKB Krylov space.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pnewton/densela.hpp"
#include "pnewton/gengkb.hpp"
#include "pnewton/problems.hpp"

namespace pnewton {

struct ProjectedState {
  Vector y_bar;
  double lambda = 0.0;
  double beta1 = 0.0;
  /// B_k used for the gradient and Jacobian.
  Matrix b_mat;
  /// B_bar_k used for trial merits.
  Matrix b_bar;
  double tau_m = 0.0;
};

enum class StopRule { Either, Merit, Dp };

struct PntOptions {
  double tau = 1.001;
  double lambda0 = 0.1;
  double c = 1e-4;
  double eta = 0.9;
  /// Merit stop: ||F_bar(y_k, lambda_k)|| <= tol * ||F(0, lambda_0)||, i.e.
  /// h_k <= tol^2 h_0.
  double tol = 1e-12;
  /// DP stop: | ||Ax_k - b||^2_{M^-1} - tau m | <= dp_tol.
  double dp_tol = 1e-8;
  int max_iters = 200;
  double min_step = 1e-16;
  int k0 = 1;
  bool reorthogonalize = true;
  StopRule stop = StopRule::Either;
  /// Run the dense feasibility check first when the problem fits in memory.
  bool check_assumption = true;
  /// Fill IterationRecord::rel_error when x_true is known.
  bool record_rel_error = true;

  void validate() const;
};

struct IterationRecord {
  int k = 0;
  double lambda = 0.0;
  double merit_h = 0.0;
  double residual_mnorm = 0.0;
  double gamma = 0.0;
  int backtracks = 0;
  /// NaN on the initial record.
  double cond_j = 0.0;
  std::optional<double> rel_error;
};

enum class SolveStatus { ConvergedMerit, ConvergedDp, StepTooSmall, MaxIters };
std::string to_string(SolveStatus s);

struct PntResult {
  Vector x;
  double lambda = 0.0;
  double mu = 0.0;
  std::vector<IterationRecord> history;
  SolveStatus status = SolveStatus::MaxIters;
  /// Newton iterations performed (initial record excluded).
  int iterations() const { return static_cast<int>(history.size()) - 1; }
};

/// Snapshot handed to an observer after each accepted step.
struct IterationDetail {
  int k = 0;
  /// State at (y_bar_{k-1}, lambda_{k-1}) with B_k, B_bar_k.
  const ProjectedState* before = nullptr;
  Vector dy;
  double dlambda = 0.0;
  double gamma = 0.0;
  Vector y_new;
  double lambda_new = 0.0;
  double merit_prev = 0.0;
  double merit_new = 0.0;
  const BidiagState* gkb = nullptr;
};

using PntObserver = std::function<void(const IterationDetail&)>;

struct ArmijoStep {
  double gamma = 0.0;
  int backtracks = 0;
  double merit = 0.0;
};

struct NewtonDirection {
  Vector dy;
  double dlambda = 0.0;
};

namespace pnt {

/// B y - beta1 e1.
Vector projected_residual(const Matrix& b_mat, const Vector& y, double beta1);

Vector projected_gradient(const ProjectedState& ps);
Matrix projected_jacobian(const ProjectedState& ps);
NewtonDirection newton_direction(const ProjectedState& ps, int k = 0);

double merit_current(const ProjectedState& ps);
/// y_trial length must equal b_bar's column count.
double merit_trial(const Matrix& b_bar, const Vector& y_trial, double lambda_trial, double beta1,
                   double tau_m);

/// Throws StepTooSmall when gamma drops below opts.min_step.
ArmijoStep armijo_search(const ProjectedState& ps, const NewtonDirection& d,
                         const PntOptions& opts);

PntResult pnt_solve(const ProblemInstance& p, const PntOptions& opts,
                    const PntObserver& observer = {});
/// Requires opts.k0 >= 2.
PntResult pnt_md_solve(const ProblemInstance& p, const PntOptions& opts,
                       const PntObserver& observer = {});

}  // namespace pnt
}  // namespace pnewton
