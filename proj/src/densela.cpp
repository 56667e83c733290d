#include "pnewton/densela.hpp"

#include <cmath>
#include <string>

#include "pnewton/error.hpp"

namespace pnewton {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::NoInverse: return "NoInverse";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::InvalidPsf: return "InvalidPsf";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::UnsupportedNu: return "UnsupportedNu";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::BreakdownAtInit: return "BreakdownAtInit";
    case ErrorCode::AlreadyTerminated: return "AlreadyTerminated";
    case ErrorCode::NotEnoughSteps: return "NotEnoughSteps";
    case ErrorCode::SingularProjectedJacobian: return "SingularProjectedJacobian";
    case ErrorCode::StepTooSmall: return "StepTooSmall";
    case ErrorCode::AssumptionViolated: return "AssumptionViolated";
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace densela {
namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": matrix is " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()) + ", expected square");
  }
}

}  // namespace

bool all_finite(const Matrix& m) { return m.allFinite(); }

LuFactor::LuFactor(const Matrix& m) {
  require_square(m, "lu");
  if (m.rows() == 0) throw Error(ErrorCode::InvalidSize, "lu: empty matrix");
  const double max_col = m.colwise().norm().maxCoeff();
  lu_.compute(m);
  const double min_pivot = lu_.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot >= kSingularRelTol * max_col) || max_col == 0.0) {
    throw Error(ErrorCode::SingularMatrix,
                "pivot " + std::to_string(min_pivot) + " below " +
                    std::to_string(kSingularRelTol) + " x column norm " + std::to_string(max_col));
  }
}

Vector LuFactor::solve(const Vector& rhs) const {
  if (rhs.size() != lu_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "lu solve: rhs length mismatch");
  }
  return lu_.solve(rhs);
}

Matrix LuFactor::inverse() const { return lu_.inverse(); }

Vector lu_solve(const Matrix& m, const Vector& rhs) {
  if (rhs.size() != m.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "lu_solve: rhs length mismatch");
  }
  return LuFactor(m).solve(rhs);
}

Matrix cholesky(const Matrix& m) {
  require_square(m, "cholesky");
  const double scale = m.norm();
  if ((m - m.transpose()).norm() > 1e-12 * scale) {
    throw Error(ErrorCode::NotPositiveDefinite, "cholesky: matrix is not symmetric");
  }
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "cholesky: nonpositive pivot");
  }
  Matrix l = llt.matrixL();
  // LLT only reads the lower triangle, a zero or negative pivot can slip
  // through as NaN on some inputs.
  if (!l.allFinite() || (l.diagonal().array() <= 0.0).any()) {
    throw Error(ErrorCode::NotPositiveDefinite, "cholesky: nonpositive pivot");
  }
  return l;
}

double condition_estimate_1norm(const Matrix& m) {
  LuFactor lu(m);
  if (m.rows() <= 500) {
    const double norm_m = m.cwiseAbs().colwise().sum().maxCoeff();
    const double norm_inv = lu.inverse().cwiseAbs().colwise().sum().maxCoeff();
    return norm_m * norm_inv;
  }
  return 1.0 / lu.rcond();
}

Vector min_norm_least_squares(const Matrix& a, const Vector& rhs, const Matrix& w_row,
                              const Matrix& w_col) {
  if (rhs.size() != a.rows() || w_row.rows() != a.rows() || w_row.cols() != a.rows() ||
      w_col.rows() != a.cols() || w_col.cols() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "min_norm_least_squares: inconsistent sizes");
  }
  const Matrix l_row = cholesky(w_row);
  const Matrix l_col = cholesky(w_col);
  const auto row_tri = l_row.triangularView<Eigen::Lower>();
  const Matrix whitened = row_tri.solve(a * l_col);
  const Vector target = row_tri.solve(rhs);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(whitened);
  const Vector z = cod.solve(target);
  return l_col * z;
}

}  // namespace densela
}  // namespace pnewton
