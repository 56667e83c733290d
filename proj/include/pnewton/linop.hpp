#pragma once

// Matrix-free operator contracts used by the solver, plus the concrete
// operators the test problems need. Solvers only see LinearMap / SpdMap;
// dense materialization exists for oracles.

#include <Eigen/Sparse>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "pnewton/densela.hpp"
#include "pnewton/kernels.hpp"

namespace pnewton {

/// A : R^cols -> R^rows with a Euclidean adjoint.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual Vector apply(const Vector& x) const = 0;
  virtual Vector apply_transpose(const Vector& y) const = 0;

  /// Column-by-column materialization. Dense-backed maps override.
  virtual Matrix to_dense() const;
};

/// Symmetric positive definite operator. The inverse is optional: the
/// solver never asks for it on the prior covariance.
class SpdMap {
 public:
  virtual ~SpdMap() = default;

  virtual Index dim() const = 0;
  virtual Vector apply(const Vector& x) const = 0;
  virtual bool has_inverse() const { return false; }
  /// Throws NoInverse unless has_inverse().
  virtual Vector inverse_apply(const Vector& x) const;

  virtual Matrix to_dense() const;
  virtual Matrix inverse_to_dense() const;
};

using LinearMapPtr = std::shared_ptr<const LinearMap>;
using SpdMapPtr = std::shared_ptr<const SpdMap>;

class DenseOperator final : public LinearMap {
 public:
  explicit DenseOperator(Matrix m) : m_(std::move(m)) {}

  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  Vector apply(const Vector& x) const override;
  Vector apply_transpose(const Vector& y) const override;
  Matrix to_dense() const override { return m_; }

  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

class SparseOperator final : public LinearMap {
 public:
  using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  explicit SparseOperator(Storage m) : m_(std::move(m)) {}

  Index rows() const override { return m_.rows(); }
  Index cols() const override { return m_.cols(); }
  Vector apply(const Vector& x) const override;
  Vector apply_transpose(const Vector& y) const override;
  Matrix to_dense() const override { return Matrix(m_); }

  const Storage& matrix() const { return m_; }

 private:
  Storage m_;
};

class DiagonalSpd final : public SpdMap {
 public:
  explicit DiagonalSpd(Vector d);

  Index dim() const override { return d_.size(); }
  Vector apply(const Vector& x) const override;
  bool has_inverse() const override { return true; }
  Vector inverse_apply(const Vector& x) const override;
  Matrix to_dense() const override { return d_.asDiagonal(); }
  Matrix inverse_to_dense() const override { return d_.cwiseInverse().asDiagonal(); }

  const Vector& diagonal() const { return d_; }

 private:
  Vector d_;
};

/// Dense SPD matrix; the inverse is backed by a Cholesky factor computed at
/// construction when requested.
class DenseSpd final : public SpdMap {
 public:
  DenseSpd(Matrix m, bool with_inverse);

  Index dim() const override { return m_.rows(); }
  Vector apply(const Vector& x) const override;
  bool has_inverse() const override { return factor_.has_value(); }
  Vector inverse_apply(const Vector& x) const override;
  Matrix to_dense() const override { return m_; }
  Matrix inverse_to_dense() const override;

  const Matrix& matrix() const { return m_; }
  /// Lower Cholesky factor; throws NoInverse when not factored.
  const Matrix& cholesky_factor() const;

 private:
  Matrix m_;
  std::optional<Matrix> factor_;
};

/// Zero-padded 2D convolution of a side x side image (row-major pixel
/// order) with an odd square stencil.
class PsfBlurOperator final : public LinearMap {
 public:
  PsfBlurOperator(Index side, Matrix stencil);

  Index rows() const override { return side_ * side_; }
  Index cols() const override { return side_ * side_; }
  Vector apply(const Vector& x) const override;
  Vector apply_transpose(const Vector& y) const override;

  Index side() const { return side_; }
  const Matrix& stencil() const { return stencil_; }

 private:
  Vector correlate(const Vector& x, bool flip) const;

  Index side_;
  Index radius_;
  Matrix stencil_;
};

namespace linop {

/// Upper bound on rows x cols for any dense materialization.
inline constexpr double kMaterializeGuard = 4e6;

std::shared_ptr<DenseOperator> dense_operator(Matrix m);
std::shared_ptr<DiagonalSpd> diagonal_spd(Vector d);

/// Kernel covariance [N]_ij = k(|p_i - p_j|) + jitter * delta_ij.
std::shared_ptr<DenseSpd> covariance_spd(const std::vector<std::vector<double>>& points,
                                         const KernelSpec& kernel, double jitter,
                                         bool with_inverse = false);

/// Default jitter: 1e-10 times the largest kernel diagonal (k(0) = 1).
inline constexpr double kDefaultJitter = 1e-10;

/// Normalized truncated Gaussian stencil of size (2r+1)^2.
Matrix gaussian_psf(Index radius, double sigma);

std::shared_ptr<PsfBlurOperator> blur_operator(Index side, Index psf_radius, double psf_sigma);

Matrix materialize(const LinearMap& map);
Matrix materialize(const SpdMap& map);
Matrix materialize_inverse(const SpdMap& map);

/// Coordinate-list text format:
///   optional comment lines starting with '%' or '#'
///   header       "rows cols nnz"
///   nnz entries  "row col value" (1-indexed; duplicates are summed)
SparseOperator::Storage read_coordinate_matrix(std::istream& in);
void write_coordinate_matrix(std::ostream& out, const SparseOperator::Storage& m);

}  // namespace linop
}  // namespace pnewton
