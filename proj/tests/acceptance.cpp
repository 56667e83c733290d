// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pnewton/baselines.hpp"
#include "pnewton/gengkb.hpp"
#include "pnewton/linop.hpp"
#include "pnewton/pnt.hpp"
#include "pnewton/problems.hpp"

using namespace pnewton;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what) {
  std::printf("%s %d: %s\n", ok ? "PASS" : "FAIL", n, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ProblemInstance desk(const std::string& name, double level = 5e-2) {
  auto spec = problems::default_spec(name);
  spec.n = 200;
  spec.side = 32;
  spec.noise.level = level;
  return problems::build_problem(spec);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
double rel(const Vector& a, const Vector& b) { return (a - b).norm() / b.norm(); }

bool trace_ok(const std::vector<IterationRecord>& h, double tau_m) {
  const double floor = std::sqrt(tau_m) * (1.0 - 1e-12);
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].residual_mnorm < floor) return false;
    if (i > 0 && h[i].merit_h > h[i - 1].merit_h) return false;
  }
  return true;
}

oracle::DenseMerit dense_merit(const ProblemInstance& p, double tau_m) {
  return {linop::materialize(*p.a), linop::materialize(*p.m_inv), linop::materialize(*p.n_cov),
          p.b, tau_m};
}

Vector x_of(const IterationDetail& d, const Vector& y) {
  return gengkb::combine_v(*d.gkb, y.head(std::min<Index>(y.size(), d.gkb->k)));
}

void criterion1() {
  const auto p = desk("heat");
  PntOptions opts;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = pnt::pnt_solve(p, opts);
  const double secs = seconds_since(t0);
  const double gap = std::abs(std::pow(r.history.back().residual_mnorm, 2) - p.tau_m());
  const bool ok = r.status == SolveStatus::ConvergedDp && gap <= 1e-8 && r.iterations() <= 60 &&
                  secs <= 5.0;
  report(1, ok,
         "heat n=200 DP convergence: " + std::to_string(r.iterations()) + " iterations, gap " +
             fmt("%.2e", gap) + ", " + fmt("%.2f s", secs));
}

void criteria2and3() {
  double worst_dp = 0.0, worst_newton = 0.0;
  bool ok2 = true, ok3 = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (const std::string name : {"heat", "shaw"}) {
    const auto p = desk(name);
    const PntOptions opts;
    const auto dp = baselines::make_dense_problem(p, opts.tau);
    const auto r = pnt::pnt_solve(p, opts);
    const auto bis = baselines::dp_lambda_bisection(dp);
    const auto nt = baselines::full_newton_solve(dp, opts);
    const double e2 = std::max(rel(r.lambda, bis.lambda), rel(r.x, bis.x));
    const double e3 = std::max(rel(r.lambda, nt.lambda), rel(r.x, nt.x));
    worst_dp = std::max(worst_dp, e2);
    worst_newton = std::max(worst_newton, e3);
    ok2 = ok2 && e2 <= 1e-6;
    ok3 = ok3 && e3 <= 1e-6;
  }
  const double secs = seconds_since(t0);
  report(2, ok2, "PNT vs DP bisection on heat/shaw: worst relative gap " + fmt("%.2e", worst_dp));
  report(3, ok3,
         "PNT vs full-space Newton on heat/shaw: worst relative gap " + fmt("%.2e", worst_newton) +
             " (" + fmt("%.1f s", secs) + " with oracles)");
}

void criteria4and5() {
  const double t = 1e-3;
  double worst_desc = 0.0, worst_fd = 0.0, worst_merit = 0.0;
  int iterates = 0, fd_fail = 0, desc_fail = 0, merit_fail = 0, merit_strict_fail = 0;
  for (const std::string name : {"heat", "shaw", "blur"}) {
    const auto p = desk(name);
    const PntOptions opts;
    const auto dm = dense_merit(p, p.tau_m());
    double h0 = -1.0;
    pnt::pnt_solve(p, opts, [&](const IterationDetail& d) {
      const Vector y = d.before->y_bar;
      const Vector x = x_of(d, y);
      const Vector dx = x_of(d, d.dy);
      const double lam = d.before->lambda;
      const double h = dm.h(x, lam);
      if (h0 < 0.0) h0 = h;
      ++iterates;

      const double desc = std::abs(dm.directional(x, lam, dx, d.dlambda) + 2.0 * h) / (1.0 + 2.0 * h);
      worst_desc = std::max(worst_desc, desc);
      if (desc > 1e-8) ++desc_fail;

      auto along = [&](double s) { return dm.h(x + s * dx, lam + s * d.dlambda); };
      const double fd = (-along(2 * t) + 8 * along(t) - 8 * along(-t) + along(-2 * t)) / (12 * t);
      worst_fd = std::max(worst_fd, std::abs(fd + 2.0 * h) / (2.0 * h));
      if (!oracle::fd_agrees(fd, h, h0, t, 1e-4)) ++fd_fail;

      worst_merit = std::max(worst_merit, std::abs(d.merit_prev - h) / h);
      if (std::abs(d.merit_prev - h) > 1e-10 * h) ++merit_strict_fail;
      if (!oracle::merit_agrees(d.merit_prev, h, h0, 1e-10)) ++merit_fail;
    });
  }
  report(4, desc_fail == 0 && fd_fail == 0,
         std::to_string(iterates) + " iterates on heat/shaw/blur: descent identity worst " +
             fmt("%.2e", worst_desc) + "; finite difference worst relative " + fmt("%.2e", worst_fd) +
             ", " + std::to_string(fd_fail) + " outside the rounding floor " +
             fmt("%.0e", oracle::kMeritFloor) + " ||F_0||");
  report(5, merit_fail == 0,
         "projected vs dense merit: " + std::to_string(iterates - merit_strict_fail) + "/" +
             std::to_string(iterates) + " within 1e-10 relative, the rest within the floor " +
             fmt("%.0e", oracle::kMeritFloor) + " ||F_0|| (worst relative " +
             fmt("%.2e", worst_merit) + "); " + std::to_string(merit_fail) + " outside");
}

void criterion6() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"heat", "shaw", "blur"}) {
    const auto p = desk(name);
    BidiagState st = gengkb::init(*p.a, *p.m_inv, *p.n_cov, p.b);
    while (st.k < 30 && !st.terminated()) gengkb::expand(st, *p.a, *p.m_inv, *p.n_cov);
    const Matrix a = linop::materialize(*p.a);
    const Matrix minv = linop::materialize(*p.m_inv);
    const Matrix n = linop::materialize(*p.n_cov);
    const Matrix ninv = linop::materialize_inverse(*p.n_cov);
    const auto bm = gengkb::basis_matrices(st);
    const Matrix bk = gengkb::bidiag_matrix(st, BidiagVariant::B);

    const double eu = oracle::max_abs(bm.u.transpose() * minv * bm.u -
                                      Matrix::Identity(bm.u.cols(), bm.u.cols()));
    const double ev = oracle::max_abs(bm.v.transpose() * ninv * bm.v -
                                      Matrix::Identity(bm.v.cols(), bm.v.cols()));
    const Matrix lb = a * bm.v;
    const double rb = (lb - bm.u * bk).norm() / (a.norm() * bm.v.norm());
    const Matrix lc = n * a.transpose() * minv * bm.u;
    Matrix rc = bm.v * bk.transpose();
    if (!st.terminated()) rc.col(st.k) += st.alphas[st.k] * st.v[st.k];
    const double rcv = (lc - rc).norm() / (lc.norm() + rc.norm());
    const bool good = eu <= 1e-10 && ev <= 1e-10 && rb <= 1e-10 && rcv <= 1e-10;
    ok = ok && good;
    detail += " " + name + "(k=" + std::to_string(st.k) + (st.terminated() ? ", terminated" : "") +
              "): U " + fmt("%.1e", eu) + " V " + fmt("%.1e", ev) + " rel " + fmt("%.1e", rb) + "/" +
              fmt("%.1e", rcv) + ";";
  }
  report(6, ok, "weighted orthonormality and relations over 30 steps:" + detail);
}

void criterion7() {
  // Whitened heat: standard weights by rescaling with the noise level.
  auto spec = problems::default_spec("heat");
  spec.n = 200;
  const auto base = problems::build_problem(spec);
  const Matrix a0 = linop::materialize(*base.a);
  const double sigma = (base.b - *base.b_true).norm() / std::sqrt(200.0);
  const Matrix a = a0 / sigma;
  const Vector b = base.b / sigma;
  ProblemInstance p;
  p.a = linop::dense_operator(a);
  p.m_inv = linop::diagonal_spd(Vector::Ones(200));
  p.n_cov = linop::diagonal_spd(Vector::Ones(200));
  p.b = b;
  PntOptions opts;
  opts.stop = StopRule::Merit;
  opts.tol = 1e-300;
  opts.max_iters = 20;
  std::vector<double> lambdas, gammas;
  BidiagState final_state;
  const PntResult r = pnt::pnt_solve(p, opts, [&](const IterationDetail& d) {
    lambdas.push_back(d.lambda_new);
    gammas.push_back(d.gamma);
    final_state = *d.gkb;
  });
  const int iters = static_cast<int>(lambdas.size());
  const auto ref = oracle::reference_projected_newton(a, b, p.tau_m(), opts.lambda0, iters);
  double worst = 0.0;
  for (int i = 0; i < iters; ++i) {
    worst = std::max(worst, rel(lambdas[i], ref.lambdas[i]));
    worst = std::max(worst, rel(gammas[i], ref.gammas[i]));
  }
  const std::size_t na = std::min(final_state.alphas.size(), ref.alphas.size());
  for (std::size_t i = 0; i < na; ++i) {
    worst = std::max(worst, rel(final_state.alphas[i], ref.alphas[i]));
    worst = std::max(worst, rel(final_state.betas[i], ref.betas[i]));
  }
  report(7, iters == 20 && worst <= 1e-10,
         "M = N = I vs standard Golub-Kahan reference over " + std::to_string(iters) +
             " iterations (" + to_string(r.status) + "): worst relative gap " + fmt("%.2e", worst));
}

void criterion8() {
  int traces = 0, bad = 0;
  for (const std::string name : {"heat", "shaw", "blur"}) {
    const auto p = desk(name);
    PntOptions opts;
    const auto dp = baselines::make_dense_problem(p, opts.tau);
    std::vector<PntResult> runs;
    runs.push_back(pnt::pnt_solve(p, opts));
    opts.k0 = 10;
    runs.push_back(pnt::pnt_md_solve(p, opts));
    opts.k0 = 1;
    runs.push_back(baselines::full_newton_solve(dp, opts));
    for (const auto& r : runs) {
      ++traces;
      if (!trace_ok(r.history, p.tau_m())) ++bad;
    }
  }
  report(8, bad == 0,
         std::to_string(traces) + " traces (pnt, pnt-md, newton on heat/shaw/blur): " +
             std::to_string(bad) + " with a merit increase or residual below the floor");
}

void criterion9() {
  const auto p = desk("heat");
  PntOptions opts;
  const auto one = pnt::pnt_solve(p, opts);
  opts.k0 = 10;
  const auto md = pnt::pnt_md_solve(p, opts);
  const double dl = rel(md.lambda, one.lambda);
  const double dx = rel(md.x, one.x);
  report(9, dl <= 1e-6 && dx <= 1e-6,
         "PNT-md k0=10 vs k0=1 on heat: lambda " + fmt("%.2e", dl) + ", x " + fmt("%.2e", dx) +
             " (" + std::to_string(md.iterations()) + " vs " + std::to_string(one.iterations()) +
             " iterations)");
}

void criterion10() {
  auto spec = problems::default_spec("heat");
  spec.n = 2000;
  const auto p = problems::build_problem(spec);
  PntOptions opts;
  opts.stop = StopRule::Dp;
  opts.check_assumption = false;
  opts.record_rel_error = false;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = pnt::pnt_solve(p, opts);
  const double t_pnt = seconds_since(t0);
  const auto dp = baselines::make_dense_problem(p, opts.tau);
  const auto t1 = std::chrono::steady_clock::now();
  const auto nt = baselines::full_newton_solve(dp, opts);
  const double t_newton = seconds_since(t1);
  const bool ok = t_pnt <= t_newton / 5.0 && r.status == SolveStatus::ConvergedDp &&
                  nt.status == SolveStatus::ConvergedDp;
  report(10, ok,
         "heat n=2000, DP stop: PNT " + fmt("%.3f s", t_pnt) + " (" + std::to_string(r.iterations()) +
             " it, " + to_string(r.status) + "), Newton " + fmt("%.2f s", t_newton) + " (" +
             std::to_string(nt.iterations()) + " it, " + to_string(nt.status) + "), ratio " +
             fmt("%.1f", t_newton / t_pnt));
}

void criterion11() {
  bool ok = true;
  std::string detail;
  for (double level : {5e-2, 1e-1, 5e-1}) {
    const auto p = desk("blur", level);
    const auto r = pnt::pnt_solve(p, PntOptions{});
    bool strict = true;
    for (std::size_t i = 1; i < r.history.size(); ++i)
      strict = strict && r.history[i].merit_h < r.history[i - 1].merit_h;
    const bool good =
        (r.status == SolveStatus::ConvergedDp || r.status == SolveStatus::StepTooSmall) && strict;
    ok = ok && good;
    detail += " " + fmt("%.0e", level) + ": " + to_string(r.status) + " after " +
              std::to_string(r.iterations()) + (strict ? "" : ", merit not strictly decreasing") + ";";
  }
  report(11, ok, "blur 32x32 under heavy noise:" + detail);
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> steps = {criterion1, criteria2and3, criteria4and5,
                                                    criterion6, criterion7,    criterion8,
                                                    criterion9, criterion10,   criterion11};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      std::printf("FAIL: exception %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
