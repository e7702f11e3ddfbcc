#include "monoport/relation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "monoport/elements.hpp"
#include "monoport/solvers.hpp"

namespace monoport {

namespace {

constexpr std::size_t kLuCacheLimit = 64;

/// Tiny negative eigenvalues of a PSD symmetric part are decomposition noise;
/// clamping keeps certified-monotone operators certified.
double clamp_tiny_negative(double m, double scale) {
  if (m < 0.0 && m >= -1e-10 * std::max(1.0, scale)) {
    return 0.0;
  }
  return m;
}

std::string dim_suffix(Eigen::Index n) {
  std::ostringstream s;
  s << "[n=" << n << "]";
  return s.str();
}

}  // namespace

// ============================================================================
// Relation base
// ============================================================================

void Relation::require_dim(const Vector& u, const char* who) const {
  if (u.size() != dim_) {
    std::ostringstream msg;
    msg << describe() << "." << who << ": input length " << u.size()
        << " does not match dimension " << dim_;
    throw ArgumentError(msg.str());
  }
  if (!u.allFinite()) {
    std::ostringstream msg;
    msg << describe() << "." << who << ": non-finite input";
    throw ArgumentError(msg.str());
  }
}

Vector Relation::apply(const Vector& u, DomainPolicy policy) const {
  require_dim(u, "apply");
  if (policy == DomainPolicy::enforce) {
    check_domain(u);
  }
  return do_apply(u);
}

Vector Relation::resolvent(const Vector& z, double lambda) const {
  require_dim(z, "resolvent");
  detail::require_lambda(lambda, "resolvent");
  return do_resolvent(z, lambda);
}

void Relation::check_domain(const Vector& u) const {
  if (zero_mean_domain()) {
    const double m = mean(u);
    if (std::abs(m) > zero_mean_tolerance(u)) {
      std::ostringstream msg;
      msg << describe() << ": domain requires a zero-mean trajectory "
          << "(the DC component has nowhere to flow); input mean = " << m;
      throw DomainViolation(msg.str());
    }
  }
}

Vector Relation::do_apply(const Vector&) const {
  throw ConfigError(describe() + ": forward evaluation is not available");
}

Vector Relation::do_resolvent(const Vector&, double) const {
  throw ConfigError(describe() + ": resolvent is not available");
}

// ============================================================================
// AffineRelation
// ============================================================================

AffineRelation::AffineRelation(AffineOperator op)
    : Relation(op.dim()), op_(std::move(op)) {
  detail::require_square_finite(op_, "AffineRelation");
}

const MonotoneConstants& AffineRelation::constants() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!constants_) {
    MonotoneConstants c = constants_affine(op_);
    c.m = clamp_tiny_negative(c.m, c.L);
    constants_ = c;
  }
  return *constants_;
}

std::optional<double> AffineRelation::coercivity_bound() const {
  return constants().m;
}

std::optional<double> AffineRelation::lipschitz_bound() const {
  return constants().L;
}

bool AffineRelation::monotone_by_construction() const {
  return constants().m >= 0.0;
}

std::string AffineRelation::describe() const {
  return "affine" + dim_suffix(dim());
}

Vector AffineRelation::do_apply(const Vector& u) const {
  return op_.matrix * u + op_.offset;
}

Vector AffineRelation::do_resolvent(const Vector& z, double lambda) const {
  std::shared_ptr<Eigen::PartialPivLU<Matrix>> lu;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = lu_cache_.find(lambda);
    if (it != lu_cache_.end()) {
      lu = it->second;
    } else {
      Matrix sys = lambda * op_.matrix;
      sys.diagonal().array() += 1.0;
      lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(std::move(sys));
      if (lu_cache_.size() >= kLuCacheLimit) {
        lu_cache_.clear();
      }
      lu_cache_.emplace(lambda, lu);
    }
  }
  const Vector rhs = z - lambda * op_.offset;
  Vector x = lu->solve(rhs);
  // One extra matvec buys a residual certificate for every resolvent call.
  const double resid = ((x + lambda * (op_.matrix * x + op_.offset)) - z).norm();
  if (!x.allFinite() || resid > 1e-8 * (1.0 + z.norm())) {
    std::ostringstream msg;
    msg << describe() << ": resolvent system singular or ill-conditioned at "
        << "lambda = " << lambda << " (residual " << resid << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

// ============================================================================
// SubspaceAffineRelation
// ============================================================================

SubspaceAffineRelation::SubspaceAffineRelation(AffineOperator op)
    : Relation(op.dim()), op_(std::move(op)) {
  detail::require_square_finite(op_, "SubspaceAffineRelation");
}

const MonotoneConstants& SubspaceAffineRelation::constants() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!constants_) {
    // Full-space constants of A bound the subspace-restricted ones from the
    // safe side (m no larger, L no smaller than the true values on V).
    MonotoneConstants c = constants_affine(op_);
    c.m = clamp_tiny_negative(c.m, c.L);
    constants_ = c;
  }
  return *constants_;
}

std::optional<double> SubspaceAffineRelation::coercivity_bound() const {
  return constants().m;
}

std::optional<double> SubspaceAffineRelation::lipschitz_bound() const {
  return constants().L;
}

bool SubspaceAffineRelation::monotone_by_construction() const {
  return constants().m >= 0.0;
}

void SubspaceAffineRelation::check_domain(const Vector& u) const {
  const double m = mean(u);
  if (std::abs(m) > zero_mean_tolerance(u)) {
    std::ostringstream msg;
    msg << describe() << ": domain requires a zero-mean trajectory (a "
        << "running-integral element blocks DC); input mean = " << m;
    throw DomainViolation(msg.str());
  }
}

std::string SubspaceAffineRelation::describe() const {
  return "affine+zero-mean" + dim_suffix(dim());
}

Vector SubspaceAffineRelation::do_apply(const Vector& u) const {
  return op_.matrix * u + op_.offset;
}

Vector SubspaceAffineRelation::do_resolvent(const Vector& z,
                                            double lambda) const {
  const Eigen::Index n = dim();
  std::shared_ptr<Eigen::PartialPivLU<Matrix>> lu;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = lu_cache_.find(lambda);
    if (it != lu_cache_.end()) {
      lu = it->second;
    } else {
      Matrix sys = Matrix::Zero(n + 1, n + 1);
      sys.topLeftCorner(n, n) = lambda * op_.matrix;
      sys.topLeftCorner(n, n).diagonal().array() += 1.0;
      sys.block(0, n, n, 1).setOnes();
      sys.block(n, 0, 1, n).setOnes();
      lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(std::move(sys));
      if (lu_cache_.size() >= kLuCacheLimit) {
        lu_cache_.clear();
      }
      lu_cache_.emplace(lambda, lu);
    }
  }
  Vector rhs(n + 1);
  rhs.head(n) = z - lambda * op_.offset;
  rhs[n] = 0.0;
  const Vector xm = lu->solve(rhs);
  const Vector x = xm.head(n);
  const double mu = xm[n];
  const Vector top = x + lambda * (op_.matrix * x + op_.offset) +
                     Vector::Constant(n, mu) - z;
  const double resid = std::hypot(top.norm(), x.sum());
  if (!xm.allFinite() || resid > 1e-8 * (1.0 + z.norm())) {
    std::ostringstream msg;
    msg << describe() << ": constrained resolvent system singular at lambda = "
        << lambda << " (residual " << resid << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

// ============================================================================
// InverseAffineRelation
// ============================================================================

InverseAffineRelation::InverseAffineRelation(AffineOperator forward_op)
    : Relation(forward_op.dim()), op_(std::move(forward_op)) {
  detail::require_square_finite(op_, "InverseAffineRelation");
}

const MonotoneConstants& InverseAffineRelation::forward_constants() const {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!forward_constants_) {
    MonotoneConstants c = constants_affine(op_);
    c.m = clamp_tiny_negative(c.m, c.L);
    forward_constants_ = c;
  }
  return *forward_constants_;
}

std::optional<double> InverseAffineRelation::coercivity_bound() const {
  const MonotoneConstants& c = forward_constants();
  if (c.m > 0.0 && c.L > 0.0) {
    return c.m / (c.L * c.L);
  }
  return std::nullopt;
}

std::optional<double> InverseAffineRelation::lipschitz_bound() const {
  const MonotoneConstants& c = forward_constants();
  if (c.m > 0.0) {
    return 1.0 / c.m;
  }
  return std::nullopt;
}

bool InverseAffineRelation::monotone_by_construction() const {
  return forward_constants().m >= 0.0;
}

std::string InverseAffineRelation::describe() const {
  return "inverse-affine" + dim_suffix(dim());
}

Vector InverseAffineRelation::do_apply(const Vector& u) const {
  std::shared_ptr<Eigen::FullPivLU<Matrix>> lu;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!apply_lu_) {
      apply_lu_ = std::make_shared<Eigen::FullPivLU<Matrix>>(op_.matrix);
    }
    lu = apply_lu_;
  }
  if (!lu->isInvertible()) {
    throw NumericalError(describe() +
                         ": forward matrix is singular; the inverse relation "
                         "is not single-valued (try the other orientation)");
  }
  const Vector rhs = u - op_.offset;
  Vector x = lu->solve(rhs);
  const double resid = (op_.matrix * x - rhs).norm();
  if (!x.allFinite() || resid > 1e-8 * (1.0 + rhs.norm())) {
    std::ostringstream msg;
    msg << describe() << ": inverse evaluation ill-conditioned (residual "
        << resid << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

Vector InverseAffineRelation::do_resolvent(const Vector& z,
                                           double lambda) const {
  std::shared_ptr<Eigen::PartialPivLU<Matrix>> lu;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = lu_cache_.find(lambda);
    if (it != lu_cache_.end()) {
      lu = it->second;
    } else {
      Matrix sys = op_.matrix;
      sys.diagonal().array() += lambda;
      lu = std::make_shared<Eigen::PartialPivLU<Matrix>>(std::move(sys));
      if (lu_cache_.size() >= kLuCacheLimit) {
        lu_cache_.clear();
      }
      lu_cache_.emplace(lambda, lu);
    }
  }
  const Vector rhs = op_.matrix * z + lambda * op_.offset;
  Vector y = lu->solve(rhs);
  const double resid = ((op_.matrix * y).eval() + lambda * y - rhs).norm();
  if (!y.allFinite() || resid > 1e-8 * (1.0 + rhs.norm())) {
    std::ostringstream msg;
    msg << describe() << ": resolvent system singular at lambda = " << lambda
        << " (residual " << resid << ")";
    throw NumericalError(msg.str());
  }
  return y;
}

// ============================================================================
// SumRelation
// ============================================================================

SumRelation::SumRelation(std::vector<RelationPtr> parts)
    : Relation(parts.empty() ? 0 : parts.front()->dim()),
      parts_(std::move(parts)) {
  if (parts_.size() < 2) {
    throw ArgumentError("SumRelation: need at least two parts");
  }
  for (const RelationPtr& p : parts_) {
    if (!p) {
      throw ArgumentError("SumRelation: null part");
    }
    if (p->dim() != dim()) {
      std::ostringstream msg;
      msg << "SumRelation: dimension mismatch (" << p->dim() << " vs " << dim()
          << ")";
      throw ArgumentError(msg.str());
    }
  }
}

bool SumRelation::has_apply() const {
  return std::all_of(parts_.begin(), parts_.end(),
                     [](const RelationPtr& p) { return p->has_apply(); });
}

std::optional<double> SumRelation::coercivity_bound() const {
  // Margins add. With every part certified monotone, unknown parts still
  // contribute at least zero; otherwise all parts must report a bound.
  double total = 0.0;
  bool all_known = true;
  for (const RelationPtr& p : parts_) {
    if (auto m = p->coercivity_bound()) {
      total += *m;
    } else {
      all_known = false;
    }
  }
  if (all_known) {
    return total;
  }
  if (monotone_by_construction()) {
    return total;
  }
  return std::nullopt;
}

std::optional<double> SumRelation::lipschitz_bound() const {
  double total = 0.0;
  for (const RelationPtr& p : parts_) {
    auto l = p->lipschitz_bound();
    if (!l) {
      return std::nullopt;
    }
    total += *l;
  }
  return total;
}

bool SumRelation::monotone_by_construction() const {
  return std::all_of(parts_.begin(), parts_.end(), [](const RelationPtr& p) {
    return p->monotone_by_construction();
  });
}

bool SumRelation::zero_mean_domain() const {
  return std::any_of(parts_.begin(), parts_.end(), [](const RelationPtr& p) {
    return p->zero_mean_domain();
  });
}

void SumRelation::check_domain(const Vector& u) const {
  for (const RelationPtr& p : parts_) {
    p->check_domain(u);
  }
}

std::string SumRelation::describe() const {
  std::ostringstream s;
  s << "sum(";
  for (std::size_t k = 0; k < parts_.size(); ++k) {
    if (k > 0) {
      s << " + ";
    }
    s << parts_[k]->describe();
  }
  s << ")";
  return s.str();
}

Vector SumRelation::do_apply(const Vector& u) const {
  Vector out = Vector::Zero(dim());
  for (const RelationPtr& p : parts_) {
    out += p->apply(u, DomainPolicy::relaxed);
  }
  return out;
}

// ============================================================================
// ScaledRelation
// ============================================================================

ScaledRelation::ScaledRelation(double alpha, RelationPtr base)
    : Relation(base ? base->dim() : 0), alpha_(alpha), base_(std::move(base)) {
  if (!base_) {
    throw ArgumentError("ScaledRelation: null base");
  }
  if (!std::isfinite(alpha_) || alpha_ <= 0.0) {
    throw ArgumentError("ScaledRelation: factor must be positive and finite");
  }
}

std::optional<double> ScaledRelation::coercivity_bound() const {
  if (auto m = base_->coercivity_bound()) {
    return alpha_ * *m;
  }
  return std::nullopt;
}

std::optional<double> ScaledRelation::lipschitz_bound() const {
  if (auto l = base_->lipschitz_bound()) {
    return alpha_ * *l;
  }
  return std::nullopt;
}

bool ScaledRelation::monotone_by_construction() const {
  return base_->monotone_by_construction();
}

bool ScaledRelation::zero_mean_domain() const {
  return base_->zero_mean_domain();
}

void ScaledRelation::check_domain(const Vector& u) const {
  base_->check_domain(u);
}

std::string ScaledRelation::describe() const {
  std::ostringstream s;
  s << alpha_ << "*" << base_->describe();
  return s.str();
}

Vector ScaledRelation::do_apply(const Vector& u) const {
  return alpha_ * base_->apply(u, DomainPolicy::relaxed);
}

Vector ScaledRelation::do_resolvent(const Vector& z, double lambda) const {
  // (I + lambda alpha S)^-1 is the base resolvent at the product parameter.
  return base_->resolvent(z, lambda * alpha_);
}

// ============================================================================
// ShiftedRelation
// ============================================================================

ShiftedRelation::ShiftedRelation(RelationPtr base, Vector shift)
    : Relation(base ? base->dim() : 0),
      base_(std::move(base)),
      shift_(std::move(shift)) {
  if (!base_) {
    throw ArgumentError("ShiftedRelation: null base");
  }
  if (shift_.size() != dim() || !shift_.allFinite()) {
    throw ArgumentError("ShiftedRelation: bad shift vector");
  }
}

std::optional<double> ShiftedRelation::coercivity_bound() const {
  return base_->coercivity_bound();
}

std::optional<double> ShiftedRelation::lipschitz_bound() const {
  return base_->lipschitz_bound();
}

bool ShiftedRelation::monotone_by_construction() const {
  return base_->monotone_by_construction();
}

bool ShiftedRelation::zero_mean_domain() const {
  return base_->zero_mean_domain();
}

void ShiftedRelation::check_domain(const Vector& u) const {
  base_->check_domain(u);
}

std::string ShiftedRelation::describe() const {
  return "shifted(" + base_->describe() + ")";
}

Vector ShiftedRelation::do_apply(const Vector& u) const {
  return base_->apply(u, DomainPolicy::relaxed) - shift_;
}

Vector ShiftedRelation::do_resolvent(const Vector& z, double lambda) const {
  // x + lambda (S(x) - s) = z  <=>  x + lambda S(x) = z + lambda s.
  return base_->resolvent(z + lambda * shift_, lambda);
}

// ============================================================================
// CongruenceRelation
// ============================================================================

CongruenceRelation::CongruenceRelation(Matrix m, RelationPtr inner)
    : Relation(m.cols()), m_(std::move(m)), inner_(std::move(inner)) {
  if (!inner_) {
    throw ArgumentError("CongruenceRelation: null inner relation");
  }
  if (m_.rows() != inner_->dim()) {
    std::ostringstream msg;
    msg << "CongruenceRelation: matrix rows " << m_.rows()
        << " do not match inner dimension " << inner_->dim();
    throw ArgumentError(msg.str());
  }
  if (m_.cols() == 0 || !m_.allFinite()) {
    throw ArgumentError("CongruenceRelation: bad matrix");
  }
  Eigen::BDCSVD<Matrix> svd(m_);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double smin = sv.size() > 0 ? sv(sv.size() - 1) : 0.0;
  sigma_max_sq_ = smax * smax;
  sigma_min_sq_ = (m_.rows() >= m_.cols()) ? smin * smin : 0.0;
}

std::optional<double> CongruenceRelation::coercivity_bound() const {
  if (auto m = inner_->coercivity_bound(); m && *m >= 0.0) {
    return *m * sigma_min_sq_;
  }
  return std::nullopt;
}

std::optional<double> CongruenceRelation::lipschitz_bound() const {
  if (auto l = inner_->lipschitz_bound()) {
    return *l * sigma_max_sq_;
  }
  return std::nullopt;
}

bool CongruenceRelation::monotone_by_construction() const {
  return inner_->monotone_by_construction();
}

void CongruenceRelation::check_domain(const Vector& u) const {
  inner_->check_domain(m_ * u);
}

std::string CongruenceRelation::describe() const {
  return "congruence(" + inner_->describe() + ")";
}

Vector CongruenceRelation::do_apply(const Vector& u) const {
  return m_.transpose() * inner_->apply(m_ * u, DomainPolicy::relaxed);
}

// ============================================================================
// DirectSumRelation
// ============================================================================

DirectSumRelation::DirectSumRelation(RelationPtr a, RelationPtr b)
    : Relation((a ? a->dim() : 0) + (b ? b->dim() : 0)),
      a_(std::move(a)),
      b_(std::move(b)) {
  if (!a_ || !b_) {
    throw ArgumentError("DirectSumRelation: null part");
  }
}

bool DirectSumRelation::has_apply() const {
  return a_->has_apply() && b_->has_apply();
}

bool DirectSumRelation::has_resolvent() const {
  return a_->has_resolvent() && b_->has_resolvent();
}

std::optional<double> DirectSumRelation::coercivity_bound() const {
  auto ma = a_->coercivity_bound();
  auto mb = b_->coercivity_bound();
  if (ma && mb) {
    return std::min(*ma, *mb);
  }
  return std::nullopt;
}

std::optional<double> DirectSumRelation::lipschitz_bound() const {
  auto la = a_->lipschitz_bound();
  auto lb = b_->lipschitz_bound();
  if (la && lb) {
    return std::max(*la, *lb);
  }
  return std::nullopt;
}

bool DirectSumRelation::monotone_by_construction() const {
  return a_->monotone_by_construction() && b_->monotone_by_construction();
}

void DirectSumRelation::check_domain(const Vector& u) const {
  a_->check_domain(u.head(a_->dim()));
  b_->check_domain(u.tail(b_->dim()));
}

std::string DirectSumRelation::describe() const {
  return "blocks(" + a_->describe() + ", " + b_->describe() + ")";
}

Vector DirectSumRelation::do_apply(const Vector& u) const {
  Vector out(dim());
  out.head(a_->dim()) = a_->apply(u.head(a_->dim()), DomainPolicy::relaxed);
  out.tail(b_->dim()) = b_->apply(u.tail(b_->dim()), DomainPolicy::relaxed);
  return out;
}

Vector DirectSumRelation::do_resolvent(const Vector& z, double lambda) const {
  Vector out(dim());
  out.head(a_->dim()) = a_->resolvent(z.head(a_->dim()), lambda);
  out.tail(b_->dim()) = b_->resolvent(z.tail(b_->dim()), lambda);
  return out;
}

// ============================================================================
// InverseRelation
// ============================================================================

InverseRelation::InverseRelation(RelationPtr base)
    : Relation(base ? base->dim() : 0), base_(std::move(base)) {
  if (!base_) {
    throw ArgumentError("InverseRelation: null base");
  }
}

bool InverseRelation::has_apply() const {
  // Evaluation runs an inner zero-inclusion solve on the base relation, which
  // needs either resolvent structure or forward constants to dispatch.
  return base_->has_resolvent() || base_->has_apply();
}

std::optional<double> InverseRelation::coercivity_bound() const {
  auto m = base_->coercivity_bound();
  auto l = base_->lipschitz_bound();
  if (m && l && *m > 0.0 && *l > 0.0) {
    return *m / (*l * *l);
  }
  return std::nullopt;
}

std::optional<double> InverseRelation::lipschitz_bound() const {
  if (auto m = base_->coercivity_bound(); m && *m > 0.0) {
    return 1.0 / *m;
  }
  return std::nullopt;
}

bool InverseRelation::monotone_by_construction() const {
  return base_->monotone_by_construction();
}

std::string InverseRelation::describe() const {
  return "inverse(" + base_->describe() + ")";
}

Vector InverseRelation::do_apply(const Vector& u) const {
  SolverConfig cfg;
  cfg.tol = 1e-12;
  cfg.max_iter = 100000;
  SolveReport rep = solve_zero(shift_output(base_, u), cfg);
  if (!rep.converged) {
    std::ostringstream msg;
    msg << describe() << ": inner inversion solve did not converge within "
        << cfg.max_iter << " iterations (last residual "
        << (rep.residual_history.empty() ? 0.0 : rep.residual_history.back())
        << ")";
    throw NumericalError(msg.str());
  }
  return rep.solution;
}

Vector InverseRelation::do_resolvent(const Vector& z, double lambda) const {
  // res_{S^-1, lambda}(z) = z - lambda res_{S, 1/lambda}(z / lambda).
  return z - lambda * base_->resolvent(z / lambda, 1.0 / lambda);
}

// ============================================================================
// Combinators
// ============================================================================

RelationPtr make_affine_relation(AffineOperator op, bool zero_mean_domain) {
  if (zero_mean_domain) {
    return std::make_shared<SubspaceAffineRelation>(std::move(op));
  }
  return std::make_shared<AffineRelation>(std::move(op));
}

RelationPtr make_identity_relation(Eigen::Index n) {
  return std::make_shared<AffineRelation>(
      AffineOperator(Matrix::Identity(n, n)));
}

RelationPtr make_zero_relation(Eigen::Index n) {
  return std::make_shared<AffineRelation>(AffineOperator(Matrix::Zero(n, n)));
}

RelationPtr invert(const RelationPtr& s) {
  if (!s) {
    throw ArgumentError("invert: null relation");
  }
  if (auto inv = std::dynamic_pointer_cast<const InverseRelation>(s)) {
    return inv->base();
  }
  if (auto invaff = std::dynamic_pointer_cast<const InverseAffineRelation>(s)) {
    return std::make_shared<AffineRelation>(invaff->forward_op());
  }
  if (auto aff = std::dynamic_pointer_cast<const AffineRelation>(s)) {
    return std::make_shared<InverseAffineRelation>(aff->op());
  }
  if (auto lift = std::dynamic_pointer_cast<const LiftedRelation>(s)) {
    if (lift->shift().isZero(0.0)) {
      return lift_pointwise(lift->law()->inverse(), lift->dim());
    }
  }
  return std::make_shared<InverseRelation>(s);
}

namespace {

struct AddAccumulator {
  std::optional<AffineOperator> affine;
  bool affine_subspace = false;
  ScalarLawPtr law;
  std::optional<Vector> law_shift;
  std::vector<RelationPtr> others;

  void fold_affine(const AffineOperator& op, bool subspace) {
    if (!affine) {
      affine = op;
    } else {
      affine->matrix += op.matrix;
      affine->offset += op.offset;
    }
    affine_subspace = affine_subspace || subspace;
  }

  void fold_lift(const LiftedRelation& lift) {
    if (!law) {
      law = lift.law();
      law_shift = lift.shift();
    } else {
      law = std::make_shared<SumLaw>(law, lift.law());
      *law_shift += lift.shift();
    }
  }

  void take(const RelationPtr& p) {
    if (auto aff = std::dynamic_pointer_cast<const AffineRelation>(p)) {
      fold_affine(aff->op(), false);
    } else if (auto sub =
                   std::dynamic_pointer_cast<const SubspaceAffineRelation>(p)) {
      fold_affine(sub->op(), true);
    } else if (auto lift = std::dynamic_pointer_cast<const LiftedRelation>(p)) {
      fold_lift(*lift);
    } else if (auto sum = std::dynamic_pointer_cast<const SumRelation>(p)) {
      for (const RelationPtr& q : sum->parts()) {
        take(q);
      }
    } else {
      others.push_back(p);
    }
  }
};

}  // namespace

RelationPtr add(std::vector<RelationPtr> parts) {
  if (parts.empty()) {
    throw ArgumentError("add: no relations given");
  }
  for (const RelationPtr& p : parts) {
    if (!p) {
      throw ArgumentError("add: null relation");
    }
    if (p->dim() != parts.front()->dim()) {
      std::ostringstream msg;
      msg << "add: dimension mismatch (" << p->dim() << " vs "
          << parts.front()->dim() << ")";
      throw ArgumentError(msg.str());
    }
  }
  AddAccumulator acc;
  for (const RelationPtr& p : parts) {
    acc.take(p);
  }
  // Canonical order: pointwise lift first (splitting methods then return the
  // law-feasible iterate), collapsed affine second, everything else after.
  std::vector<RelationPtr> out;
  if (acc.law) {
    out.push_back(std::make_shared<LiftedRelation>(acc.law, *acc.law_shift));
  }
  if (acc.affine) {
    out.push_back(make_affine_relation(*acc.affine, acc.affine_subspace));
  }
  for (RelationPtr& p : acc.others) {
    out.push_back(std::move(p));
  }
  if (out.size() == 1) {
    return out.front();
  }
  return std::make_shared<SumRelation>(std::move(out));
}

RelationPtr add(const RelationPtr& a, const RelationPtr& b) {
  return add(std::vector<RelationPtr>{a, b});
}

RelationPtr scale(double alpha, const RelationPtr& s) {
  if (!s) {
    throw ArgumentError("scale: null relation");
  }
  if (!std::isfinite(alpha) || alpha <= 0.0) {
    std::ostringstream msg;
    msg << "scale: factor must be positive and finite (monotonicity is not "
        << "preserved otherwise), got " << alpha;
    throw ArgumentError(msg.str());
  }
  if (auto aff = std::dynamic_pointer_cast<const AffineRelation>(s)) {
    return std::make_shared<AffineRelation>(
        AffineOperator(alpha * aff->op().matrix, alpha * aff->op().offset));
  }
  if (auto sub = std::dynamic_pointer_cast<const SubspaceAffineRelation>(s)) {
    return std::make_shared<SubspaceAffineRelation>(
        AffineOperator(alpha * sub->op().matrix, alpha * sub->op().offset));
  }
  if (auto sum = std::dynamic_pointer_cast<const SumRelation>(s)) {
    std::vector<RelationPtr> parts;
    parts.reserve(sum->parts().size());
    for (const RelationPtr& p : sum->parts()) {
      parts.push_back(scale(alpha, p));
    }
    return add(std::move(parts));
  }
  return std::make_shared<ScaledRelation>(alpha, s);
}

RelationPtr congruence(const Matrix& m, const RelationPtr& f) {
  if (!f) {
    throw ArgumentError("congruence: null relation");
  }
  if (auto aff = std::dynamic_pointer_cast<const AffineRelation>(f)) {
    return std::make_shared<AffineRelation>(AffineOperator(
        m.transpose() * aff->op().matrix * m, m.transpose() * aff->op().offset));
  }
  return std::make_shared<CongruenceRelation>(m, f);
}

RelationPtr shift_output(const RelationPtr& s, const Vector& y_star) {
  if (!s) {
    throw ArgumentError("shift_output: null relation");
  }
  if (y_star.size() != s->dim() || !y_star.allFinite()) {
    throw ArgumentError("shift_output: bad shift vector");
  }
  if (auto aff = std::dynamic_pointer_cast<const AffineRelation>(s)) {
    return std::make_shared<AffineRelation>(
        AffineOperator(aff->op().matrix, aff->op().offset - y_star));
  }
  if (auto sub = std::dynamic_pointer_cast<const SubspaceAffineRelation>(s)) {
    return std::make_shared<SubspaceAffineRelation>(
        AffineOperator(sub->op().matrix, sub->op().offset - y_star));
  }
  if (auto lift = std::dynamic_pointer_cast<const LiftedRelation>(s)) {
    return std::make_shared<LiftedRelation>(lift->law(),
                                            Vector(lift->shift() + y_star));
  }
  if (auto sh = std::dynamic_pointer_cast<const ShiftedRelation>(s)) {
    return shift_output(sh->base(), Vector(sh->shift() + y_star));
  }
  if (auto sum = std::dynamic_pointer_cast<const SumRelation>(s)) {
    // Fold the shift into the first part so the sum structure (and with it
    // the splitting route) survives.
    std::vector<RelationPtr> parts = sum->parts();
    parts.front() = shift_output(parts.front(), y_star);
    return add(std::move(parts));
  }
  return std::make_shared<ShiftedRelation>(s, y_star);
}

RelationPtr direct_sum(const RelationPtr& a, const RelationPtr& b) {
  return std::make_shared<DirectSumRelation>(a, b);
}

}  // namespace monoport
