#include "monoport/affine.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace monoport {

namespace detail {

void require_square_finite(const AffineOperator& op, const char* who) {
  if (op.matrix.rows() == 0) {
    throw ArgumentError(std::string(who) + ": empty matrix");
  }
  if (op.matrix.rows() != op.matrix.cols()) {
    std::ostringstream msg;
    msg << who << ": matrix must be square, got " << op.matrix.rows() << "x"
        << op.matrix.cols();
    throw ArgumentError(msg.str());
  }
  if (op.offset.size() != op.matrix.rows()) {
    std::ostringstream msg;
    msg << who << ": offset length " << op.offset.size()
        << " does not match matrix dimension " << op.matrix.rows();
    throw ArgumentError(msg.str());
  }
  if (!op.matrix.allFinite() || !op.offset.allFinite()) {
    throw ArgumentError(std::string(who) + ": non-finite entries");
  }
}

void require_lambda(double lambda, const char* who) {
  if (!std::isfinite(lambda) || lambda <= 0.0) {
    std::ostringstream msg;
    msg << who << ": resolvent parameter must be positive and finite, got "
        << lambda;
    throw ArgumentError(msg.str());
  }
}

namespace {

void require_input(const AffineOperator& op, const Vector& u, const char* who) {
  if (u.size() != op.dim()) {
    std::ostringstream msg;
    msg << who << ": input length " << u.size() << " does not match dimension "
        << op.dim();
    throw ArgumentError(msg.str());
  }
  if (!u.allFinite()) {
    throw ArgumentError(std::string(who) + ": non-finite input");
  }
}

/// Solves sys * x = rhs by partial-pivot LU and verifies the residual; the
/// check is what turns a quietly singular system into a reported error.
Vector checked_solve(const Matrix& sys, const Vector& rhs, const char* who) {
  Eigen::PartialPivLU<Matrix> lu(sys);
  Vector x = lu.solve(rhs);
  const double resid = (sys * x - rhs).norm();
  if (!x.allFinite() || resid > 1e-8 * (1.0 + rhs.norm())) {
    std::ostringstream msg;
    msg << who << ": linear system is singular or severely ill-conditioned "
        << "(residual " << resid << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

}  // namespace
}  // namespace detail

AffineOperator::AffineOperator(Matrix a, Vector b)
    : matrix(std::move(a)), offset(std::move(b)) {
  detail::require_square_finite(*this, "AffineOperator");
}

AffineOperator::AffineOperator(Matrix a)
    : matrix(std::move(a)), offset(Vector::Zero(matrix.rows())) {
  detail::require_square_finite(*this, "AffineOperator");
}

Vector apply_affine(const AffineOperator& op, const Vector& u) {
  detail::require_square_finite(op, "apply_affine");
  detail::require_input(op, u, "apply_affine");
  return op.matrix * u + op.offset;
}

Vector resolvent_affine(const AffineOperator& op, const Vector& z,
                        double lambda) {
  detail::require_square_finite(op, "resolvent_affine");
  detail::require_input(op, z, "resolvent_affine");
  detail::require_lambda(lambda, "resolvent_affine");
  const Eigen::Index n = op.dim();
  Matrix sys = lambda * op.matrix;
  sys.diagonal().array() += 1.0;
  const Vector rhs = z - lambda * op.offset;
  (void)n;
  return detail::checked_solve(sys, rhs, "resolvent_affine");
}

Vector resolvent_of_inverse_affine(const AffineOperator& op, const Vector& z,
                                   double lambda) {
  detail::require_square_finite(op, "resolvent_of_inverse_affine");
  detail::require_input(op, z, "resolvent_of_inverse_affine");
  detail::require_lambda(lambda, "resolvent_of_inverse_affine");
  Matrix sys = op.matrix;
  sys.diagonal().array() += lambda;
  const Vector rhs = op.matrix * z + lambda * op.offset;
  return detail::checked_solve(sys, rhs, "resolvent_of_inverse_affine");
}

MonotoneConstants constants_affine(const AffineOperator& op) {
  detail::require_square_finite(op, "constants_affine");
  const Matrix sym = 0.5 * (op.matrix + op.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("constants_affine: eigen decomposition failed");
  }
  Eigen::BDCSVD<Matrix> svd(op.matrix);
  MonotoneConstants c;
  c.m = eig.eigenvalues().minCoeff();
  c.L = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  return c;
}

}  // namespace monoport
