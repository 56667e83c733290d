#include "pnewton/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "pnewton/error.hpp"

namespace pnewton {

void ProblemInstance::validate() const {
  if (!a || !m_inv || !n_cov) throw Error(ErrorCode::InvalidParam, "problem has null operator");
  if (m_inv->dim() != a->rows() || n_cov->dim() != a->cols() || b.size() != a->rows()) {
    throw Error(ErrorCode::DimensionMismatch, "problem operators have inconsistent sizes");
  }
  if (x_true && x_true->size() != a->cols()) {
    throw Error(ErrorCode::DimensionMismatch, "x_true has wrong length");
  }
  if (b_true && b_true->size() != a->rows()) {
    throw Error(ErrorCode::DimensionMismatch, "b_true has wrong length");
  }
  if (!(tau > 1.0)) throw Error(ErrorCode::InvalidParam, "tau must exceed 1");
}

std::string to_string(NoiseKind kind) {
  return kind == NoiseKind::White ? "white" : "nonwhite";
}

NoiseKind parse_noise_kind(const std::string& text) {
  if (text == "white") return NoiseKind::White;
  if (text == "nonwhite" || text == "diagonal-nonwhite") return NoiseKind::DiagonalNonwhite;
  throw Error(ErrorCode::ParseError, "unknown noise kind '" + text + "'");
}

namespace problems {
namespace {

constexpr double kPi = std::numbers::pi;

double heat_kernel(double d) {
  if (d <= 0.0) return 0.0;
  return std::pow(d, -1.5) / (2.0 * std::sqrt(kPi)) * std::exp(-1.0 / (4.0 * d));
}

double heat_profile(double t) {
  if (t <= 0.1) return 75.0 * t * t;
  if (t <= 0.15) return 0.75 + (20.0 * t - 2.0) * (3.0 - 20.0 * t);
  if (t <= 0.5) return 0.75 * std::exp(2.0 - 20.0 * t);
  return 0.0;
}

double shaw_kernel(double s, double t) {
  const double c = std::cos(s) + std::cos(t);
  const double u = kPi * (std::sin(s) + std::sin(t));
  const double sinc = std::abs(u) < 1e-300 ? 1.0 : std::sin(u) / u;
  return c * c * sinc * sinc;
}

double phantom_pixel(double r, double c) {
  const double dr = r - 0.62;
  const double dc = c - 0.55;
  if (dr * dr + dc * dc <= 0.12 * 0.12) return 0.6;
  if (r >= 0.25 && r <= 0.5 && c >= 0.25 && c <= 0.75) return 1.0;
  if (r >= 0.6 && r <= 0.72 && c >= 0.28 && c <= 0.4) return 0.3;
  return 0.0;
}

}  // namespace

DiscretizedProblem heat_problem(Index n) {
  if (n < 10) throw Error(ErrorCode::InvalidSize, "heat requires n >= 10");
  DiscretizedProblem out;
  out.a = Matrix::Zero(n, n);
  out.x_true.resize(n);
  const double h = 1.0 / static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const double si = (static_cast<double>(i) + 0.5) * h;
    for (Index j = 0; j < i; ++j) {
      const double tj = (static_cast<double>(j) + 0.5) * h;
      out.a(i, j) = heat_kernel(si - tj) * h;
    }
    out.x_true[i] = heat_profile(si);
    out.points.push_back({si});
  }
  return out;
}

DiscretizedProblem shaw_problem(Index n) {
  if (n < 10 || n % 2 != 0) throw Error(ErrorCode::InvalidSize, "shaw requires even n >= 10");
  DiscretizedProblem out;
  out.a.resize(n, n);
  out.x_true.resize(n);
  const double h = kPi / static_cast<double>(n);
  std::vector<double> theta(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    theta[i] = (static_cast<double>(i) + 0.5) * h - kPi / 2.0;
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      const double v = shaw_kernel(theta[i], theta[j]) * h;
      out.a(i, j) = v;
      out.a(j, i) = v;
    }
    const double t = theta[i];
    out.x_true[i] = 2.0 * std::exp(-6.0 * (t - 0.8) * (t - 0.8)) +
                    std::exp(-2.0 * (t + 0.5) * (t + 0.5));
    out.points.push_back({t});
  }
  return out;
}

BlurProblem blur_problem(Index side, double psf_sigma, Index psf_radius) {
  if (side < 16) throw Error(ErrorCode::InvalidSize, "blur requires side >= 16");
  BlurProblem out;
  out.a = linop::blur_operator(side, psf_radius, psf_sigma);
  out.x_true.resize(side * side);
  const double s = static_cast<double>(side);
  for (Index p = 0; p < side; ++p) {
    for (Index q = 0; q < side; ++q) {
      out.x_true[p * side + q] =
          phantom_pixel((static_cast<double>(p) + 0.5) / s, (static_cast<double>(q) + 0.5) / s);
      out.points.push_back({static_cast<double>(p), static_cast<double>(q)});
    }
  }
  return out;
}

NoisyData add_noise(const Vector& b_true, const NoiseSpec& spec) {
  if (!(spec.level > 0.0)) throw Error(ErrorCode::InvalidParam, "noise level must be positive");
  const double bnorm = b_true.norm();
  if (!(bnorm > 0.0)) throw Error(ErrorCode::ZeroSignal, "b_true is zero");
  const Index m = b_true.size();
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(m);
  for (Index i = 0; i < m; ++i) z[i] = normal(gen);

  Vector w = Vector::Ones(m);
  if (spec.kind == NoiseKind::DiagonalNonwhite) {
    std::uniform_real_distribution<double> uni(std::log(0.5), std::log(2.0));
    for (Index i = 0; i < m; ++i) w[i] = std::exp(uni(gen));
  }
  const Vector raw = w.cwiseProduct(z);
  const double scale = spec.level * bnorm / raw.norm();

  // M holds the per-component variances implied by the level, normalized so
  // that the whitened noise norm ||eps||^2_{M^-1} equals m.
  const double c = scale * z.norm() / std::sqrt(static_cast<double>(m));
  NoisyData out;
  out.b = b_true + scale * raw;
  out.sigma = c * w;
  out.m_inv = linop::diagonal_spd(out.sigma.array().square().inverse().matrix());
  return out;
}

std::string to_string(Assumption a) {
  switch (a) {
    case Assumption::Holds: return "holds";
    case Assumption::FailsLeft: return "fails-left";
    case Assumption::FailsRight: return "fails-right";
  }
  return "unknown";
}

AssumptionReport check_assumption(const ProblemInstance& p) {
  p.validate();
  const Matrix a = linop::materialize(*p.a);
  const Matrix m = linop::materialize_inverse(*p.m_inv);
  const Index n = p.cols();
  const Vector x = densela::min_norm_least_squares(a, p.b, m, Matrix::Identity(n, n));
  const Vector r = a * x - p.b;
  AssumptionReport rep{};
  rep.min_residual_sq = r.dot(p.m_inv->apply(r));
  rep.b_norm_sq = p.b.dot(p.m_inv->apply(p.b));
  rep.tau_m = p.tau_m();
  if (!(rep.min_residual_sq < rep.tau_m)) {
    rep.status = Assumption::FailsLeft;
  } else if (!(rep.tau_m < rep.b_norm_sq)) {
    rep.status = Assumption::FailsRight;
  } else {
    rep.status = Assumption::Holds;
  }
  return rep;
}

ProblemSpec default_spec(const std::string& name) {
  ProblemSpec spec;
  spec.name = name;
  if (name == "heat") {
    spec.noise = {5e-2, NoiseKind::White, 0};
    spec.kernel = {KernelKind::Gaussian, 0.1, 1.0};
  } else if (name == "shaw") {
    spec.noise = {1e-2, NoiseKind::DiagonalNonwhite, 0};
    spec.kernel = {KernelKind::Exponential, 0.1, 1.0};
  } else if (name == "blur") {
    spec.noise = {5e-2, NoiseKind::White, 0};
    spec.kernel = {KernelKind::Gaussian, 1.0, 1.0};
  } else {
    throw Error(ErrorCode::InvalidParam, "unknown problem '" + name + "'");
  }
  return spec;
}

ProblemInstance build_problem(const ProblemSpec& spec) {
  ProblemInstance p;
  Vector x_true;
  std::vector<std::vector<double>> points;
  if (spec.name == "heat" || spec.name == "shaw") {
    DiscretizedProblem d = spec.name == "heat" ? heat_problem(spec.n) : shaw_problem(spec.n);
    x_true = std::move(d.x_true);
    points = std::move(d.points);
    p.a = linop::dense_operator(std::move(d.a));
  } else if (spec.name == "blur") {
    BlurProblem d = blur_problem(spec.side, spec.psf_sigma, spec.psf_radius);
    x_true = std::move(d.x_true);
    points = std::move(d.points);
    p.a = d.a;
  } else {
    throw Error(ErrorCode::InvalidParam, "unknown problem '" + spec.name + "'");
  }
  const Vector b_true = p.a->apply(x_true);
  NoisyData noisy = add_noise(b_true, spec.noise);
  p.b = std::move(noisy.b);
  p.m_inv = noisy.m_inv;
  p.n_cov = linop::covariance_spd(points, spec.kernel, spec.jitter, spec.n_inverse);
  p.x_true = std::move(x_true);
  p.b_true = b_true;
  p.tau = spec.tau;
  p.validate();
  return p;
}

}  // namespace problems
}  // namespace pnewton
