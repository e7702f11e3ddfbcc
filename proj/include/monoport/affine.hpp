#pragma once

#include <Eigen/Dense>

#include "monoport/errors.hpp"

namespace monoport {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Affine map u -> A u + b on one-period trajectories (or any finite dimension).
struct AffineOperator {
  Matrix matrix;
  Vector offset;

  AffineOperator() = default;
  AffineOperator(Matrix a, Vector b);

  /// Convenience: zero offset.
  explicit AffineOperator(Matrix a);

  [[nodiscard]] Eigen::Index dim() const { return matrix.rows(); }
};

/// Monotonicity/Lipschitz constants of an affine map:
/// m = smallest eigenvalue of the symmetric part, L = largest singular value.
struct MonotoneConstants {
  double m = 0.0;
  double L = 0.0;
};

/// y = A u + b.
[[nodiscard]] Vector apply_affine(const AffineOperator& op, const Vector& u);

/// Resolvent (I + lambda A)^-1 applied to z: solves (I + lambda A) x = z - lambda b.
[[nodiscard]] Vector resolvent_affine(const AffineOperator& op, const Vector& z,
                                      double lambda);

/// Resolvent of the relational inverse of an affine map:
/// y = (I + lambda A^-1)^-1 z computed without forming A^-1,
/// via the equivalent linear system (A + lambda I) y = A z + lambda b.
[[nodiscard]] Vector resolvent_of_inverse_affine(const AffineOperator& op,
                                                 const Vector& z, double lambda);

/// Exact constants from a dense eigen/singular decomposition.
[[nodiscard]] MonotoneConstants constants_affine(const AffineOperator& op);

namespace detail {
void require_square_finite(const AffineOperator& op, const char* who);
void require_lambda(double lambda, const char* who);
}  // namespace detail

}  // namespace monoport
