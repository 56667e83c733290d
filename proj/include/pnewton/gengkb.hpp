#pragma once

// Generalized Golub-Kahan bidiagonalization with M^-1- and N^-1-orthonormal
// bases. Only M^-1 and N are applied; N^-1 v_i is carried along by the
// recurrence.

#include <vector>

#include "pnewton/densela.hpp"
#include "pnewton/linop.hpp"

namespace pnewton {

enum class Breakdown { None, Alpha, Beta };

struct BidiagState {
  /// Completed expansions. After init k = 0; after termination k = k_t.
  Index k = 0;
  std::vector<double> alphas;  // alpha_1 .. alpha_{k+1}
  std::vector<double> betas;   // beta_1 .. beta_{k+1}
  std::vector<Vector> u;       // u_1 .. u_{k+1}
  std::vector<Vector> u_bar;   // M^-1 u_i
  std::vector<Vector> v;       // v_1 .. v_{k+1}
  std::vector<Vector> v_bar;   // N^-1 v_i
  Breakdown breakdown = Breakdown::None;
  double breakdown_tol = 0.0;
  bool reorthogonalize = true;

  bool terminated() const { return breakdown != Breakdown::None; }
  double beta1() const { return betas.front(); }
};

struct BasisMatrices {
  Matrix u;  // m x (k+1), or m x k_t after a beta breakdown
  Matrix v;  // n x k
};

enum class BidiagVariant {
  /// (k+1) x k lower bidiagonal; k_t x k_t after a beta breakdown.
  B,
  /// (k+1) x (k+1) with alpha_{k+1} appended; equals B_{k_t} once terminated.
  BBar
};

namespace gengkb {

inline constexpr double kBreakdownRelTol = 1e-12;

BidiagState init(const LinearMap& a, const SpdMap& m_inv, const SpdMap& n_cov,
                 const Vector& b, bool reorthogonalize = true);

void expand(BidiagState& state, const LinearMap& a, const SpdMap& m_inv, const SpdMap& n_cov);

BasisMatrices basis_matrices(const BidiagState& state);
Matrix bidiag_matrix(const BidiagState& state, BidiagVariant variant);

/// V_k y using the first y.size() basis vectors.
Vector combine_v(const BidiagState& state, const Vector& y);

}  // namespace gengkb
}  // namespace pnewton
