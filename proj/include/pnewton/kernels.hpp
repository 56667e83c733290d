#pragma once

#include <string>
#include <string_view>

namespace pnewton {

enum class KernelKind { Gaussian, Exponential, Matern };

/// Isotropic covariance kernel k(r) with k(0) = 1.
struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double length_scale = 0.1;
  /// Shape parameter; ignored for the Gaussian kernel.
  double nu = 1.0;

  /// Throws InvalidParam / UnsupportedNu when out of range.
  void validate() const;
  double operator()(double r) const;
  /// Round-trips through parse_kernel_spec.
  std::string to_string() const;
};

namespace kernels {

/// exp(-r^2 / (2 l^2))
double gaussian_kernel(double r, double l);
/// exp(-(r / l)^nu), 0 < nu <= 2
double exponential_kernel(double r, double l, double nu);
/// Matern closed forms for nu in {0.5, 1.5, 2.5}.
double matern_kernel(double r, double l, double nu);

/// "gaussian:l=0.1", "exponential:l=0.1,nu=1", "matern:l=100,nu=1.5".
KernelSpec parse_kernel_spec(std::string_view text);

}  // namespace kernels
}  // namespace pnewton
