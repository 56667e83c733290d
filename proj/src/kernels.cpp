#include "pnewton/kernels.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "pnewton/error.hpp"

namespace pnewton {
namespace kernels {
namespace {

// Values this small are numerically zero in a covariance matrix and would
// otherwise be subnormal.
constexpr double kFlushBelow = 1e-300;

double flush(double v) { return v < kFlushBelow ? 0.0 : v; }

void check_args(double r, double l) {
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw Error(ErrorCode::InvalidParam, "kernel length scale must be positive");
  }
  if (!(r >= 0.0)) throw Error(ErrorCode::InvalidParam, "kernel radius must be >= 0");
}

bool is_half_integer(double nu, double target) { return std::abs(nu - target) < 1e-12; }

double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ParseError,
                "kernel spec: bad value for " + std::string(what) + ": '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

double gaussian_kernel(double r, double l) {
  check_args(r, l);
  return flush(std::exp(-(r * r) / (2.0 * l * l)));
}

double exponential_kernel(double r, double l, double nu) {
  check_args(r, l);
  if (!(nu > 0.0 && nu <= 2.0)) {
    throw Error(ErrorCode::InvalidParam, "exponential kernel needs 0 < nu <= 2");
  }
  return flush(std::exp(-std::pow(r / l, nu)));
}

double matern_kernel(double r, double l, double nu) {
  check_args(r, l);
  const double s = r / l;
  if (is_half_integer(nu, 0.5)) return flush(std::exp(-s));
  if (is_half_integer(nu, 1.5)) {
    const double a = std::sqrt(3.0) * s;
    return flush((1.0 + a) * std::exp(-a));
  }
  if (is_half_integer(nu, 2.5)) {
    const double a = std::sqrt(5.0) * s;
    return flush((1.0 + a + 5.0 * s * s / 3.0) * std::exp(-a));
  }
  throw Error(ErrorCode::UnsupportedNu, "matern kernel supports nu in {0.5, 1.5, 2.5}");
}

KernelSpec parse_kernel_spec(std::string_view text) {
  KernelSpec spec;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (kind == "gaussian") {
    spec.kind = KernelKind::Gaussian;
  } else if (kind == "exponential") {
    spec.kind = KernelKind::Exponential;
  } else if (kind == "matern") {
    spec.kind = KernelKind::Matern;
    spec.nu = 1.5;
  } else {
    throw Error(ErrorCode::ParseError, "unknown kernel kind '" + std::string(kind) + "'");
  }
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorCode::ParseError, "kernel spec: expected key=value, got '" +
                                               std::string(item) + "'");
      }
      const std::string_view key = item.substr(0, eq);
      const std::string_view value = item.substr(eq + 1);
      if (key == "l") {
        spec.length_scale = parse_double(value, key);
      } else if (key == "nu" && spec.kind != KernelKind::Gaussian) {
        spec.nu = parse_double(value, key);
      } else {
        throw Error(ErrorCode::ParseError,
                    "kernel spec: unknown key '" + std::string(key) + "' for " + std::string(kind));
      }
    }
  }
  spec.validate();
  return spec;
}

}  // namespace kernels

void KernelSpec::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) {
    throw Error(ErrorCode::InvalidParam, "kernel length scale must be positive");
  }
  switch (kind) {
    case KernelKind::Gaussian: break;
    case KernelKind::Exponential:
      if (!(nu > 0.0 && nu <= 2.0)) {
        throw Error(ErrorCode::InvalidParam, "exponential kernel needs 0 < nu <= 2");
      }
      break;
    case KernelKind::Matern:
      if (!(kernels::is_half_integer(nu, 0.5) || kernels::is_half_integer(nu, 1.5) ||
            kernels::is_half_integer(nu, 2.5))) {
        throw Error(ErrorCode::UnsupportedNu, "matern kernel supports nu in {0.5, 1.5, 2.5}");
      }
      break;
  }
}

double KernelSpec::operator()(double r) const {
  switch (kind) {
    case KernelKind::Gaussian: return kernels::gaussian_kernel(r, length_scale);
    case KernelKind::Exponential: return kernels::exponential_kernel(r, length_scale, nu);
    case KernelKind::Matern: return kernels::matern_kernel(r, length_scale, nu);
  }
  return 0.0;
}

std::string KernelSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case KernelKind::Gaussian: os << "gaussian:l=" << length_scale; break;
    case KernelKind::Exponential: os << "exponential:l=" << length_scale << ",nu=" << nu; break;
    case KernelKind::Matern: os << "matern:l=" << length_scale << ",nu=" << nu; break;
  }
  return os.str();
}

}  // namespace pnewton
