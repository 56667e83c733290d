#include "pnewton/linop.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "pnewton/error.hpp"

namespace pnewton {
namespace {

void check_length(Index got, Index want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": vector length " +
                                                  std::to_string(got) + ", expected " +
                                                  std::to_string(want));
  }
}

void check_guard(Index rows, Index cols) {
  if (static_cast<double>(rows) * static_cast<double>(cols) > linop::kMaterializeGuard) {
    throw Error(ErrorCode::TooLarge, "materialize: " + std::to_string(rows) + "x" +
                                         std::to_string(cols) + " exceeds dense guard");
  }
}

}  // namespace

Matrix LinearMap::to_dense() const {
  Matrix out(rows(), cols());
  Vector e = Vector::Zero(cols());
  for (Index j = 0; j < cols(); ++j) {
    e[j] = 1.0;
    out.col(j) = apply(e);
    e[j] = 0.0;
  }
  return out;
}

Vector SpdMap::inverse_apply(const Vector&) const {
  throw Error(ErrorCode::NoInverse, "operator exposes apply only");
}

Matrix SpdMap::to_dense() const {
  Matrix out(dim(), dim());
  Vector e = Vector::Zero(dim());
  for (Index j = 0; j < dim(); ++j) {
    e[j] = 1.0;
    out.col(j) = apply(e);
    e[j] = 0.0;
  }
  return out;
}

Matrix SpdMap::inverse_to_dense() const {
  if (!has_inverse()) throw Error(ErrorCode::NoInverse, "operator exposes apply only");
  Matrix out(dim(), dim());
  Vector e = Vector::Zero(dim());
  for (Index j = 0; j < dim(); ++j) {
    e[j] = 1.0;
    out.col(j) = inverse_apply(e);
    e[j] = 0.0;
  }
  return out;
}

Vector DenseOperator::apply(const Vector& x) const {
  check_length(x.size(), m_.cols(), "dense apply");
  return m_ * x;
}

Vector DenseOperator::apply_transpose(const Vector& y) const {
  check_length(y.size(), m_.rows(), "dense apply_transpose");
  return m_.transpose() * y;
}

Vector SparseOperator::apply(const Vector& x) const {
  check_length(x.size(), m_.cols(), "sparse apply");
  return m_ * x;
}

Vector SparseOperator::apply_transpose(const Vector& y) const {
  check_length(y.size(), m_.rows(), "sparse apply_transpose");
  return m_.transpose() * y;
}

DiagonalSpd::DiagonalSpd(Vector d) : d_(std::move(d)) {
  for (Index i = 0; i < d_.size(); ++i) {
    if (!(d_[i] > 0.0) || !std::isfinite(d_[i])) {
      throw Error(ErrorCode::NonPositiveEntry,
                  "diagonal entry " + std::to_string(i) + " is not positive");
    }
  }
}

Vector DiagonalSpd::apply(const Vector& x) const {
  check_length(x.size(), d_.size(), "diagonal apply");
  return d_.cwiseProduct(x);
}

Vector DiagonalSpd::inverse_apply(const Vector& x) const {
  check_length(x.size(), d_.size(), "diagonal inverse_apply");
  return x.cwiseQuotient(d_);
}

DenseSpd::DenseSpd(Matrix m, bool with_inverse) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "DenseSpd: matrix must be square");
  }
  if (with_inverse) factor_ = densela::cholesky(m_);
}

Vector DenseSpd::apply(const Vector& x) const {
  check_length(x.size(), m_.rows(), "spd apply");
  return m_.selfadjointView<Eigen::Lower>() * x;
}

Vector DenseSpd::inverse_apply(const Vector& x) const {
  check_length(x.size(), m_.rows(), "spd inverse_apply");
  const Matrix& l = cholesky_factor();
  Vector z = l.triangularView<Eigen::Lower>().solve(x);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
  return z;
}

Matrix DenseSpd::inverse_to_dense() const {
  const Matrix& l = cholesky_factor();
  Matrix inv = Matrix::Identity(dim(), dim());
  l.triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return 0.5 * (inv + inv.transpose());
}

const Matrix& DenseSpd::cholesky_factor() const {
  if (!factor_) throw Error(ErrorCode::NoInverse, "covariance was built apply-only");
  return *factor_;
}

PsfBlurOperator::PsfBlurOperator(Index side, Matrix stencil)
    : side_(side), radius_((stencil.rows() - 1) / 2), stencil_(std::move(stencil)) {
  if (stencil_.rows() != stencil_.cols() || stencil_.rows() % 2 == 0) {
    throw Error(ErrorCode::InvalidPsf, "stencil must be square with odd side");
  }
  if (side_ < 2 * radius_ + 1) {
    throw Error(ErrorCode::InvalidSize, "image side smaller than stencil");
  }
}

// y(p, q) = sum_{i,j} s(i, j) x(p - i, q - j) for the forward map; the
// adjoint uses x(p + i, q + j). Offsets i, j run over [-r, r].
Vector PsfBlurOperator::correlate(const Vector& x, bool adjoint) const {
  check_length(x.size(), side_ * side_, "blur apply");
  Vector y = Vector::Zero(side_ * side_);
  for (Index p = 0; p < side_; ++p) {
    for (Index q = 0; q < side_; ++q) {
      double acc = 0.0;
      for (Index i = -radius_; i <= radius_; ++i) {
        const Index pp = adjoint ? p + i : p - i;
        if (pp < 0 || pp >= side_) continue;
        for (Index j = -radius_; j <= radius_; ++j) {
          const Index qq = adjoint ? q + j : q - j;
          if (qq < 0 || qq >= side_) continue;
          acc += stencil_(i + radius_, j + radius_) * x[pp * side_ + qq];
        }
      }
      y[p * side_ + q] = acc;
    }
  }
  return y;
}

Vector PsfBlurOperator::apply(const Vector& x) const { return correlate(x, false); }
Vector PsfBlurOperator::apply_transpose(const Vector& y) const { return correlate(y, true); }

namespace linop {

std::shared_ptr<DenseOperator> dense_operator(Matrix m) {
  return std::make_shared<DenseOperator>(std::move(m));
}

std::shared_ptr<DiagonalSpd> diagonal_spd(Vector d) {
  return std::make_shared<DiagonalSpd>(std::move(d));
}

std::shared_ptr<DenseSpd> covariance_spd(const std::vector<std::vector<double>>& points,
                                         const KernelSpec& kernel, double jitter,
                                         bool with_inverse) {
  if (points.empty()) throw Error(ErrorCode::InvalidSize, "covariance: no points");
  if (!(jitter >= 0.0)) throw Error(ErrorCode::InvalidParam, "covariance: negative jitter");
  kernel.validate();
  const auto n = static_cast<Index>(points.size());
  const std::size_t dim = points.front().size();
  Matrix cov(n, n);
  for (Index i = 0; i < n; ++i) {
    if (points[i].size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "covariance: mixed point dimensions");
    }
    cov(i, i) = kernel(0.0) + jitter;
    for (Index j = 0; j < i; ++j) {
      double r2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = points[i][d] - points[j][d];
        r2 += diff * diff;
      }
      const double v = kernel(std::sqrt(r2));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return std::make_shared<DenseSpd>(std::move(cov), with_inverse);
}

Matrix gaussian_psf(Index radius, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidPsf, "psf sigma must be positive");
  }
  if (radius < 0) throw Error(ErrorCode::InvalidPsf, "psf radius must be >= 0");
  const Index w = 2 * radius + 1;
  Matrix s(w, w);
  for (Index i = 0; i < w; ++i) {
    for (Index j = 0; j < w; ++j) {
      const double di = static_cast<double>(i - radius);
      const double dj = static_cast<double>(j - radius);
      s(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
    }
  }
  return s / s.sum();
}

std::shared_ptr<PsfBlurOperator> blur_operator(Index side, Index psf_radius, double psf_sigma) {
  return std::make_shared<PsfBlurOperator>(side, gaussian_psf(psf_radius, psf_sigma));
}

Matrix materialize(const LinearMap& map) {
  check_guard(map.rows(), map.cols());
  return map.to_dense();
}

Matrix materialize(const SpdMap& map) {
  check_guard(map.dim(), map.dim());
  return map.to_dense();
}

Matrix materialize_inverse(const SpdMap& map) {
  check_guard(map.dim(), map.dim());
  return map.inverse_to_dense();
}

SparseOperator::Storage read_coordinate_matrix(std::istream& in) {
  std::string line;
  long long rows = -1, cols = -1, nnz = -1;
  std::vector<Eigen::Triplet<double>> triplets;
  long long seen = 0;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%' || line[first] == '#') continue;
    std::istringstream ls(line);
    if (rows < 0) {
      if (!(ls >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0) {
        throw Error(ErrorCode::ParseError,
                    "coordinate matrix: bad header on line " + std::to_string(line_no));
      }
      triplets.reserve(static_cast<std::size_t>(nnz));
      continue;
    }
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(ls >> r >> c >> v)) {
      throw Error(ErrorCode::ParseError,
                  "coordinate matrix: bad entry on line " + std::to_string(line_no));
    }
    if (r < 1 || r > rows || c < 1 || c > cols) {
      throw Error(ErrorCode::ParseError,
                  "coordinate matrix: index out of range on line " + std::to_string(line_no));
    }
    triplets.emplace_back(static_cast<Index>(r - 1), static_cast<Index>(c - 1), v);
    ++seen;
  }
  if (rows < 0) throw Error(ErrorCode::ParseError, "coordinate matrix: missing header");
  if (seen != nnz) {
    throw Error(ErrorCode::ParseError, "coordinate matrix: header promises " +
                                           std::to_string(nnz) + " entries, found " +
                                           std::to_string(seen));
  }
  SparseOperator::Storage m(static_cast<Index>(rows), static_cast<Index>(cols));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void write_coordinate_matrix(std::ostream& out, const SparseOperator::Storage& m) {
  out.precision(17);
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (SparseOperator::Storage::InnerIterator it(m, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace linop
}  // namespace pnewton
