#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "monoport/signal.hpp"

namespace monoport {

/// Solver internals iterate through subspace-constrained relations and may
/// transiently leave their domains; public evaluation enforces them.
enum class DomainPolicy { enforce, relaxed };

// ============================================================================
// Relation: a (possibly partial, possibly multivalued) monotone map on R^n.
//
// Concrete relations advertise capabilities: forward evaluation (apply),
// resolvent evaluation (I + lambda S)^-1, and optional monotonicity and
// Lipschitz constants. Composition never loses correctness, only
// capabilities: a sum keeps apply but generally loses the resolvent, an
// inverse keeps the resolvent but may need an inner solve to apply.
// ============================================================================
class Relation {
 public:
  virtual ~Relation() = default;

  Relation(const Relation&) = delete;
  Relation& operator=(const Relation&) = delete;

  [[nodiscard]] Eigen::Index dim() const { return dim_; }

  [[nodiscard]] virtual bool has_apply() const { return false; }
  [[nodiscard]] virtual bool has_resolvent() const { return false; }

  /// Forward evaluation y = S(u).
  [[nodiscard]] Vector apply(const Vector& u,
                             DomainPolicy policy = DomainPolicy::enforce) const;

  /// Resolvent x = (I + lambda S)^-1 (z), lambda > 0.
  [[nodiscard]] Vector resolvent(const Vector& z, double lambda) const;

  /// Lower bound on the strong-monotonicity constant, when known.
  [[nodiscard]] virtual std::optional<double> coercivity_bound() const {
    return std::nullopt;
  }
  /// Upper bound on the Lipschitz constant, when known.
  [[nodiscard]] virtual std::optional<double> lipschitz_bound() const {
    return std::nullopt;
  }

  /// True when monotonicity follows from the construction (closure rules).
  [[nodiscard]] virtual bool monotone_by_construction() const { return false; }

  /// Domain requires zero-mean inputs (running-integral relations).
  [[nodiscard]] virtual bool zero_mean_domain() const { return false; }

  /// Throws DomainViolation naming the violated constraint.
  virtual void check_domain(const Vector& u) const;

  [[nodiscard]] virtual std::string describe() const = 0;

 protected:
  explicit Relation(Eigen::Index dim) : dim_(dim) {}

  [[nodiscard]] virtual Vector do_apply(const Vector& u) const;
  [[nodiscard]] virtual Vector do_resolvent(const Vector& z, double lambda) const;

  void require_dim(const Vector& u, const char* who) const;

 private:
  Eigen::Index dim_;
};

using RelationPtr = std::shared_ptr<const Relation>;

// ============================================================================
// Concrete relations
// ============================================================================

/// Total affine relation u -> A u + b, with exact constants on demand.
class AffineRelation final : public Relation {
 public:
  explicit AffineRelation(AffineOperator op);

  [[nodiscard]] const AffineOperator& op() const { return op_; }

  [[nodiscard]] bool has_apply() const override { return true; }
  [[nodiscard]] bool has_resolvent() const override { return true; }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] std::string describe() const override;

  [[nodiscard]] const MonotoneConstants& constants() const;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  AffineOperator op_;
  mutable std::mutex mutex_;
  mutable std::optional<MonotoneConstants> constants_;
  mutable std::map<double, std::shared_ptr<Eigen::PartialPivLU<Matrix>>> lu_cache_;
};

/// Affine map plus the normal cone of the zero-mean subspace V:
///   S(u) = A u + b + N_V(u),  dom S = V.
/// This is the maximal monotone form of running-integral elements: the
/// normal-cone term is the free constant of integration, so the resolvent
/// selects the representative whose mean constraint is met exactly instead
/// of pinning an arbitrary offset. apply returns the b-offset selection.
/// The resolvent solves the saddle system
///   [I + lambda A, 1; 1^T, 0] [x; mu] = [z - lambda b; 0].
class SubspaceAffineRelation final : public Relation {
 public:
  explicit SubspaceAffineRelation(AffineOperator op);

  [[nodiscard]] const AffineOperator& op() const { return op_; }

  [[nodiscard]] bool has_apply() const override { return true; }
  [[nodiscard]] bool has_resolvent() const override { return true; }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] bool zero_mean_domain() const override { return true; }
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

  [[nodiscard]] const MonotoneConstants& constants() const;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  AffineOperator op_;
  mutable std::mutex mutex_;
  mutable std::optional<MonotoneConstants> constants_;
  mutable std::map<double, std::shared_ptr<Eigen::PartialPivLU<Matrix>>> lu_cache_;
};

/// Relational inverse of an affine map; never forms A^-1 explicitly.
/// apply solves A x = u - b; the resolvent solves (A + lambda I) y = A z + lambda b.
class InverseAffineRelation final : public Relation {
 public:
  explicit InverseAffineRelation(AffineOperator forward_op);

  [[nodiscard]] const AffineOperator& forward_op() const { return op_; }

  [[nodiscard]] bool has_apply() const override { return true; }
  [[nodiscard]] bool has_resolvent() const override { return true; }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  [[nodiscard]] const MonotoneConstants& forward_constants() const;

  AffineOperator op_;
  mutable std::mutex mutex_;
  mutable std::optional<MonotoneConstants> forward_constants_;
  mutable std::shared_ptr<Eigen::FullPivLU<Matrix>> apply_lu_;
  mutable std::map<double, std::shared_ptr<Eigen::PartialPivLU<Matrix>>> lu_cache_;
};

/// Sum of relations on a common space. Applies pointwise; the resolvent of a
/// sum is not available in general (that gap is what splitting methods fill).
class SumRelation final : public Relation {
 public:
  explicit SumRelation(std::vector<RelationPtr> parts);

  [[nodiscard]] const std::vector<RelationPtr>& parts() const { return parts_; }

  [[nodiscard]] bool has_apply() const override;
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] bool zero_mean_domain() const override;
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;

 private:
  std::vector<RelationPtr> parts_;
};

/// alpha * S for alpha > 0 (generic wrapper; affine inputs collapse in scale()).
class ScaledRelation final : public Relation {
 public:
  ScaledRelation(double alpha, RelationPtr base);

  [[nodiscard]] double factor() const { return alpha_; }
  [[nodiscard]] const RelationPtr& base() const { return base_; }

  [[nodiscard]] bool has_apply() const override { return base_->has_apply(); }
  [[nodiscard]] bool has_resolvent() const override { return base_->has_resolvent(); }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] bool zero_mean_domain() const override;
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  double alpha_;
  RelationPtr base_;
};

/// S(u) - shift: the incremental relation used to turn a drive into a
/// zero-inclusion problem. Resolvent folds the shift into the argument.
class ShiftedRelation final : public Relation {
 public:
  ShiftedRelation(RelationPtr base, Vector shift);

  [[nodiscard]] const RelationPtr& base() const { return base_; }
  [[nodiscard]] const Vector& shift() const { return shift_; }

  [[nodiscard]] bool has_apply() const override { return base_->has_apply(); }
  [[nodiscard]] bool has_resolvent() const override { return base_->has_resolvent(); }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] bool zero_mean_domain() const override;
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  RelationPtr base_;
  Vector shift_;
};

/// M^T F(M u) for a matrix M mapping the outer space into F's space.
class CongruenceRelation final : public Relation {
 public:
  CongruenceRelation(Matrix m, RelationPtr inner);

  [[nodiscard]] bool has_apply() const override { return inner_->has_apply(); }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;

 private:
  Matrix m_;
  RelationPtr inner_;
  double sigma_min_sq_ = 0.0;
  double sigma_max_sq_ = 0.0;
};

/// Block concatenation of two relations on the product space.
class DirectSumRelation final : public Relation {
 public:
  DirectSumRelation(RelationPtr a, RelationPtr b);

  [[nodiscard]] bool has_apply() const override;
  [[nodiscard]] bool has_resolvent() const override;
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  RelationPtr a_;
  RelationPtr b_;
};

/// Relational inverse of a general relation. The resolvent follows from the
/// base resolvent via res_{S^-1, lambda}(z) = z - lambda res_{S, 1/lambda}(z/lambda);
/// apply runs an inner zero-inclusion solve on the base relation.
class InverseRelation final : public Relation {
 public:
  explicit InverseRelation(RelationPtr base);

  [[nodiscard]] const RelationPtr& base() const { return base_; }

  [[nodiscard]] bool has_apply() const override;
  [[nodiscard]] bool has_resolvent() const override { return base_->has_resolvent(); }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  RelationPtr base_;
};

// ============================================================================
// Combinators (closure rules: each preserves maximal monotonicity)
// ============================================================================

/// zero_mean_domain = true builds the subspace form (affine + normal cone).
[[nodiscard]] RelationPtr make_affine_relation(AffineOperator op,
                                               bool zero_mean_domain = false);
[[nodiscard]] RelationPtr make_identity_relation(Eigen::Index n);
[[nodiscard]] RelationPtr make_zero_relation(Eigen::Index n);

/// Relational inverse (swap input and output roles).
[[nodiscard]] RelationPtr invert(const RelationPtr& s);

/// Sum; affine parts fold into one affine operator, uniform pointwise lifts
/// fold into a lift of the summed scalar law.
[[nodiscard]] RelationPtr add(const RelationPtr& a, const RelationPtr& b);
[[nodiscard]] RelationPtr add(std::vector<RelationPtr> parts);

/// alpha * S, alpha > 0.
[[nodiscard]] RelationPtr scale(double alpha, const RelationPtr& s);

/// M^T F(M ·).
[[nodiscard]] RelationPtr congruence(const Matrix& m, const RelationPtr& f);

/// S - y_star (output shift).
[[nodiscard]] RelationPtr shift_output(const RelationPtr& s, const Vector& y_star);

/// Block concatenation.
[[nodiscard]] RelationPtr direct_sum(const RelationPtr& a, const RelationPtr& b);

}  // namespace monoport
