#pragma once

// Test problem generators, noise synthesis and the feasibility check
// min ||Ax - b||^2_{M^-1} < tau m < ||b||^2_{M^-1}.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pnewton/densela.hpp"
#include "pnewton/kernels.hpp"
#include "pnewton/linop.hpp"

namespace pnewton {

struct ProblemInstance {
  LinearMapPtr a;
  SpdMapPtr m_inv;
  SpdMapPtr n_cov;
  Vector b;
  std::optional<Vector> x_true;
  std::optional<Vector> b_true;
  double tau = 1.001;

  Index rows() const { return a->rows(); }
  Index cols() const { return a->cols(); }
  double tau_m() const { return tau * static_cast<double>(a->rows()); }
  /// Throws DimensionMismatch / InvalidParam.
  void validate() const;
};

enum class NoiseKind { White, DiagonalNonwhite };

struct NoiseSpec {
  double level = 5e-2;
  NoiseKind kind = NoiseKind::White;
  std::uint64_t seed = 0;
};

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& text);

struct DiscretizedProblem {
  Matrix a;
  Vector x_true;
  /// Quadrature points of the solution domain (kernel coordinates).
  std::vector<std::vector<double>> points;
};

struct BlurProblem {
  std::shared_ptr<PsfBlurOperator> a;
  Vector x_true;
  std::vector<std::vector<double>> points;
};

struct NoisyData {
  Vector b;
  std::shared_ptr<DiagonalSpd> m_inv;
  /// Per-component noise standard deviations.
  Vector sigma;
};

namespace problems {

DiscretizedProblem heat_problem(Index n);
DiscretizedProblem shaw_problem(Index n);
BlurProblem blur_problem(Index side, double psf_sigma, Index psf_radius);

/// Exact-level Gaussian noise; z comes from mt19937_64 seeded with spec.seed.
/// M = diag(sigma_i^2) is scaled so that ||eps||^2_{M^-1} = m.
NoisyData add_noise(const Vector& b_true, const NoiseSpec& spec);

enum class Assumption { Holds, FailsLeft, FailsRight };
std::string to_string(Assumption a);

struct AssumptionReport {
  Assumption status;
  double min_residual_sq;
  double tau_m;
  double b_norm_sq;
};

AssumptionReport check_assumption(const ProblemInstance& p);

/// Everything needed to assemble a ProblemInstance by name.
struct ProblemSpec {
  std::string name = "heat";
  Index n = 200;
  Index side = 32;
  double psf_sigma = 1.5;
  Index psf_radius = 4;
  NoiseSpec noise;
  KernelSpec kernel;
  double jitter = linop::kDefaultJitter;
  double tau = 1.001;
  /// Factor N so that oracles can apply N^-1.
  bool n_inverse = true;
};

/// Per-problem defaults for noise and kernel (heat: white 5e-2, Gaussian
/// l=0.1; shaw: non-white 1e-2, exponential l=0.1 nu=1; blur: white 5e-2,
/// Gaussian l=1 pixel).
ProblemSpec default_spec(const std::string& name);

ProblemInstance build_problem(const ProblemSpec& spec);

}  // namespace problems
}  // namespace pnewton
