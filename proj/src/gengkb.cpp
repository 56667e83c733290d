#include "pnewton/gengkb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnewton/error.hpp"

namespace pnewton::gengkb {
namespace {

double weighted_norm(const Vector& w, const Vector& w_bar) {
  return std::sqrt(std::max(0.0, w.dot(w_bar)));
}

// Two passes of classical Gram-Schmidt of w against q, where the weighted
// inner product of w with q_j is q_pair_j' w. The weight is applied to w
// afterwards, so w and its image stay consistent. For s: against (u, u_bar).
// For r_bar: against (v_bar, v).
void reorthogonalize(Vector& w, const std::vector<Vector>& q, const std::vector<Vector>& q_pair) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < q.size(); ++j) w -= q_pair[j].dot(w) * q[j];
  }
}

}  // namespace

BidiagState init(const LinearMap& a, const SpdMap& m_inv, const SpdMap& n_cov, const Vector& b,
                 bool reorth) {
  if (b.size() != a.rows() || m_inv.dim() != a.rows() || n_cov.dim() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "gen-GKB init: inconsistent sizes");
  }
  BidiagState st;
  st.reorthogonalize = reorth;
  const Vector s_bar = m_inv.apply(b);
  const double beta = weighted_norm(b, s_bar);
  if (!(beta > 0.0)) throw Error(ErrorCode::ZeroVector, "gen-GKB init: b has zero M^-1 norm");
  st.betas.push_back(beta);
  st.u.push_back(b / beta);
  st.u_bar.push_back(s_bar / beta);

  const Vector r_bar = a.apply_transpose(st.u_bar[0]);
  const Vector r = n_cov.apply(r_bar);
  const double alpha = weighted_norm(r, r_bar);
  st.breakdown_tol = kBreakdownRelTol * std::max(alpha, beta);
  if (!(alpha > st.breakdown_tol)) {
    throw Error(ErrorCode::BreakdownAtInit, "gen-GKB init: alpha_1 vanishes");
  }
  st.alphas.push_back(alpha);
  st.v.push_back(r / alpha);
  st.v_bar.push_back(r_bar / alpha);
  return st;
}

void expand(BidiagState& st, const LinearMap& a, const SpdMap& m_inv, const SpdMap& n_cov) {
  if (st.terminated()) {
    throw Error(ErrorCode::AlreadyTerminated,
                "gen-GKB terminated at step " + std::to_string(st.k));
  }
  const auto i = static_cast<std::size_t>(st.k);

  Vector s = a.apply(st.v[i]) - st.alphas[i] * st.u[i];
  if (st.reorthogonalize) reorthogonalize(s, st.u, st.u_bar);
  const Vector s_bar = m_inv.apply(s);
  const double beta = weighted_norm(s, s_bar);
  st.betas.push_back(beta);
  ++st.k;
  if (!(beta > st.breakdown_tol)) {
    st.breakdown = Breakdown::Beta;
    return;
  }
  st.u.push_back(s / beta);
  st.u_bar.push_back(s_bar / beta);

  Vector r_bar = a.apply_transpose(st.u_bar.back()) - beta * st.v_bar[i];
  if (st.reorthogonalize) reorthogonalize(r_bar, st.v_bar, st.v);
  const Vector r = n_cov.apply(r_bar);
  const double alpha = weighted_norm(r, r_bar);
  st.alphas.push_back(alpha);
  if (!(alpha > st.breakdown_tol)) {
    st.breakdown = Breakdown::Alpha;
    return;
  }
  st.v.push_back(r / alpha);
  st.v_bar.push_back(r_bar / alpha);
}

BasisMatrices basis_matrices(const BidiagState& st) {
  BasisMatrices out;
  const auto nu = static_cast<Index>(st.u.size());
  out.u.resize(st.u.front().size(), nu);
  for (Index j = 0; j < nu; ++j) out.u.col(j) = st.u[j];
  out.v.resize(st.v.front().size(), st.k);
  for (Index j = 0; j < st.k; ++j) out.v.col(j) = st.v[j];
  return out;
}

Matrix bidiag_matrix(const BidiagState& st, BidiagVariant variant) {
  const Index k = st.k;
  if (k < 1) throw Error(ErrorCode::NotEnoughSteps, "bidiagonal matrix needs k >= 1");
  const bool square = st.breakdown == Breakdown::Beta;
  const bool append_alpha = variant == BidiagVariant::BBar && !st.terminated();
  Matrix out = Matrix::Zero(square ? k : k + 1, append_alpha ? k + 1 : k);
  for (Index j = 0; j < k; ++j) {
    out(j, j) = st.alphas[j];
    if (j + 1 < out.rows()) out(j + 1, j) = st.betas[j + 1];
  }
  if (append_alpha) out(k, k) = st.alphas[k];
  return out;
}

Vector combine_v(const BidiagState& st, const Vector& y) {
  if (y.size() > st.k) throw Error(ErrorCode::DimensionMismatch, "combine_v: y too long");
  Vector x = Vector::Zero(st.v.front().size());
  for (Index j = 0; j < y.size(); ++j) x += y[j] * st.v[j];
  return x;
}

}  // namespace pnewton::gengkb
