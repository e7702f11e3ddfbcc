#include "monoport/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace monoport {

namespace {

constexpr double kDivergenceFactor = 10.0;
constexpr int kDivergenceGrace = 10;  // iterations before the detector arms

/// Geometric-mean per-iteration ratio of the residual history, past a short
/// burn-in that skips the transient.
std::optional<double> contraction_estimate(const std::vector<double>& hist) {
  constexpr std::size_t kBurn = 5;
  if (hist.size() < kBurn + 2) {
    return std::nullopt;
  }
  const double first = hist[kBurn];
  const double last = hist.back();
  if (!(first > 0.0) || !(last > 0.0)) {
    return std::nullopt;
  }
  const double steps = static_cast<double>(hist.size() - 1 - kBurn);
  return std::pow(last / first, 1.0 / steps);
}

Vector start_iterate(const SolverConfig& config, Eigen::Index n,
                     const char* who) {
  if (config.initial_guess) {
    if (config.initial_guess->size() != n || !config.initial_guess->allFinite()) {
      std::ostringstream msg;
      msg << who << ": initial guess has length " << config.initial_guess->size()
          << ", expected " << n;
      throw ArgumentError(msg.str());
    }
    return *config.initial_guess;
  }
  return Vector::Zero(n);
}

void require_config(const SolverConfig& config, const char* who) {
  if (!(config.tol > 0.0) || !std::isfinite(config.tol)) {
    throw ConfigError(std::string(who) + ": tol must be positive and finite");
  }
  if (config.max_iter < 1) {
    throw ConfigError(std::string(who) + ": max_iter must be at least 1");
  }
  detail::require_lambda(config.lambda, who);
}

/// Residual growth past 10x the best seen means the iteration is feeding on
/// itself; a fixed absolute window would never fire on slow exponential
/// blow-ups, a best-so-far ratio always does.
class DivergenceDetector {
 public:
  void observe(double residual, int iteration) {
    if (residual < best_) {
      best_ = residual;
      return;
    }
    if (iteration >= kDivergenceGrace && best_ < std::numeric_limits<double>::infinity() &&
        (residual > kDivergenceFactor * best_ || !std::isfinite(residual))) {
      std::ostringstream msg;
      msg << "iteration diverging: residual " << residual << " at iteration "
          << iteration << " exceeds " << kDivergenceFactor
          << "x the best residual " << best_
          << " (step size too large for this operator?)";
      throw DivergenceError(msg.str(), iteration, residual);
    }
  }

 private:
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace

SolveReport picard(const std::function<Vector(const Vector&)>& map,
                   const Vector& x0, double tol, int max_iter) {
  if (!map) {
    throw ArgumentError("picard: empty map");
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw ConfigError("picard: tol must be positive and finite");
  }
  if (max_iter < 1) {
    throw ConfigError("picard: max_iter must be at least 1");
  }
  if (!x0.allFinite()) {
    throw ArgumentError("picard: non-finite start");
  }
  SolveReport report;
  report.algorithm = "picard";
  Vector x = x0;
  DivergenceDetector detector;
  for (int k = 1; k <= max_iter; ++k) {
    Vector next = map(x);
    if (next.size() != x.size()) {
      throw ArgumentError("picard: map changed the dimension");
    }
    const double step = (next - x).norm();
    report.residual_history.push_back(step);
    report.iterations = k;
    if (step <= tol * (1.0 + x.norm())) {
      report.solution = std::move(next);
      report.converged = true;
      report.empirical_contraction =
          contraction_estimate(report.residual_history);
      return report;
    }
    detector.observe(step, k);
    x = std::move(next);
  }
  report.solution = std::move(x);
  report.converged = false;
  report.empirical_contraction = contraction_estimate(report.residual_history);
  report.notes.push_back("iteration budget exhausted");
  return report;
}

SolveReport forward_step(const RelationPtr& s, const SolverConfig& config) {
  if (!s) {
    throw ArgumentError("forward_step: null relation");
  }
  require_config(config, "forward_step");
  if (!s->has_apply()) {
    throw ConfigError("forward_step: " + s->describe() +
                      " offers no forward evaluation");
  }
  double alpha;
  SolveReport report;
  report.algorithm = "forward-step";
  if (config.alpha) {
    alpha = *config.alpha;
    if (!std::isfinite(alpha) || alpha <= 0.0) {
      throw ConfigError("forward_step: alpha must be positive and finite");
    }
  } else {
    const auto m = s->coercivity_bound();
    const auto l = s->lipschitz_bound();
    if (!m || !l || !(*m > 0.0) || !std::isfinite(*l) || !(*l > 0.0)) {
      throw ConfigError(
          "forward_step: " + s->describe() +
          " does not provide a positive coercivity bound and a finite "
          "Lipschitz bound; pass an explicit alpha");
    }
    alpha = *m / (*l * *l);
    std::ostringstream note;
    note << "auto step size alpha = m/L^2 = " << alpha << " (m = " << *m
         << ", L = " << *l << ")";
    report.notes.push_back(note.str());
  }

  Vector x = start_iterate(config, s->dim(), "forward_step");
  Vector y = s->apply(x, DomainPolicy::relaxed);
  double r = y.norm();
  DivergenceDetector detector;
  for (int k = 0;; ++k) {
    report.residual_history.push_back(r);
    report.iterations = k;
    if (r <= config.tol * (1.0 + x.norm())) {
      report.converged = true;
      break;
    }
    if (k >= config.max_iter) {
      report.converged = false;
      report.notes.push_back("iteration budget exhausted");
      break;
    }
    detector.observe(r, k);
    x -= alpha * y;
    y = s->apply(x, DomainPolicy::relaxed);
    r = y.norm();
  }
  report.solution = std::move(x);
  report.empirical_contraction = contraction_estimate(report.residual_history);
  return report;
}

SolveReport douglas_rachford(const RelationPtr& s1, const RelationPtr& s2,
                             const SolverConfig& config) {
  if (!s1 || !s2) {
    throw ArgumentError("douglas_rachford: null relation");
  }
  require_config(config, "douglas_rachford");
  if (s1->dim() != s2->dim()) {
    std::ostringstream msg;
    msg << "douglas_rachford: dimension mismatch (" << s1->dim() << " vs "
        << s2->dim() << ")";
    throw ArgumentError(msg.str());
  }
  if (!s1->has_resolvent() || !s2->has_resolvent()) {
    throw ConfigError("douglas_rachford: both blocks must provide resolvents (" +
                      s1->describe() + ", " + s2->describe() + ")");
  }
  const double lambda = config.lambda;
  SolveReport report;
  report.algorithm = "douglas-rachford";
  Vector governing = start_iterate(config, s1->dim(), "douglas_rachford");
  Vector x_half;
  for (int k = 1; k <= config.max_iter; ++k) {
    x_half = s1->resolvent(governing, lambda);
    const Vector reflected = 2.0 * x_half - governing;
    Vector x_next = s2->resolvent(reflected, lambda);
    const double step = (x_next - x_half).norm();
    report.residual_history.push_back(step);
    report.iterations = k;
    governing += x_next - x_half;
    if (step <= config.tol * (1.0 + x_next.norm())) {
      report.converged = true;
      break;
    }
  }
  if (!report.converged) {
    report.notes.push_back("iteration budget exhausted");
  }
  // The first-block iterate satisfies that block's inclusion exactly (it is a
  // resolvent output), so it respects dom S1; the stopping test bounds the
  // residual it leaves in the sum.
  report.notes.push_back("solution is the first-block resolvent iterate");
  report.solution = std::move(x_half);
  report.empirical_contraction = contraction_estimate(report.residual_history);
  return report;
}

namespace {

struct DrSplit {
  RelationPtr s1;
  RelationPtr s2;
};

/// Chooses a two-block resolvent split of a sum. Parts are already in
/// canonical order (pointwise lift first), so the law-feasible block becomes
/// the side the returned solution lives on.
std::optional<DrSplit> split_for_dr(const RelationPtr& s) {
  const auto* sum = dynamic_cast<const SumRelation*>(s.get());
  if (sum == nullptr) {
    return std::nullopt;
  }
  const std::vector<RelationPtr>& parts = sum->parts();
  for (std::size_t lead = 0; lead < parts.size(); ++lead) {
    if (!parts[lead]->has_resolvent()) {
      continue;
    }
    std::vector<RelationPtr> rest;
    rest.reserve(parts.size() - 1);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (k != lead) {
        rest.push_back(parts[k]);
      }
    }
    RelationPtr folded = rest.size() == 1 ? rest.front() : add(rest);
    if (folded->has_resolvent()) {
      return DrSplit{parts[lead], folded};
    }
  }
  return std::nullopt;
}

SolveReport solve_direct_affine(const AffineOperator& op, bool zero_mean,
                                const SolverConfig& config) {
  const Eigen::Index n = op.dim();
  SolveReport report;
  report.algorithm = "direct";
  Vector x;
  if (!zero_mean) {
    Eigen::PartialPivLU<Matrix> lu(op.matrix);
    x = lu.solve(-op.offset);
  } else {
    // Augment with the mean constraint and its multiplier (the free constant
    // of integration of a running-integral element).
    Matrix sys = Matrix::Zero(n + 1, n + 1);
    sys.topLeftCorner(n, n) = op.matrix;
    sys.block(0, n, n, 1).setOnes();
    sys.block(n, 0, 1, n).setOnes();
    Vector rhs(n + 1);
    rhs.head(n) = -op.offset;
    rhs[n] = 0.0;
    Eigen::PartialPivLU<Matrix> lu(sys);
    const Vector xm = lu.solve(rhs);
    x = xm.head(n);
  }
  double check;
  if (zero_mean) {
    // The multiplier absorbs the constant direction of the defect: project
    // it onto the zero-mean subspace and add the constraint defect.
    Vector defect = op.matrix * x + op.offset;
    defect.array() -= defect.mean();
    check = std::hypot(defect.norm(),
                       x.sum() / std::sqrt(static_cast<double>(n)));
  } else {
    check = (op.matrix * x + op.offset).norm();
  }
  report.residual_history.push_back(check);
  if (!x.allFinite() || check > config.tol * (1.0 + x.norm()) + 1e-12) {
    std::ostringstream msg;
    msg << "direct solve failed: interconnection matrix is singular or the "
        << "solution does not meet tol (residual " << check
        << "); the network may be degenerate in this orientation";
    throw NumericalError(msg.str());
  }
  report.solution = std::move(x);
  report.converged = true;
  report.iterations = 0;
  return report;
}

}  // namespace

SolveReport solve_zero(const RelationPtr& s, const SolverConfig& config) {
  if (!s) {
    throw ArgumentError("solve_zero: null relation");
  }
  require_config(config, "solve_zero");

  switch (config.algorithm) {
    case Algorithm::forward:
      return forward_step(s, config);
    case Algorithm::douglas_rachford: {
      if (auto split = split_for_dr(s)) {
        return douglas_rachford(split->s1, split->s2, config);
      }
      if (s->has_resolvent()) {
        SolveReport report =
            douglas_rachford(s, make_zero_relation(s->dim()), config);
        report.notes.push_back("second block empty (proximal point)");
        return report;
      }
      throw ConfigError("solve_zero: " + s->describe() +
                        " offers no resolvent split for Douglas-Rachford");
    }
    case Algorithm::automatic:
      break;
  }

  if (const auto* aff = dynamic_cast<const AffineRelation*>(s.get())) {
    return solve_direct_affine(aff->op(), /*zero_mean=*/false, config);
  }
  if (const auto* sub = dynamic_cast<const SubspaceAffineRelation*>(s.get())) {
    return solve_direct_affine(sub->op(), /*zero_mean=*/true, config);
  }
  if (auto split = split_for_dr(s)) {
    return douglas_rachford(split->s1, split->s2, config);
  }
  if (s->has_resolvent()) {
    SolveReport report =
        douglas_rachford(s, make_zero_relation(s->dim()), config);
    report.notes.push_back("second block empty (proximal point)");
    return report;
  }
  {
    const auto m = s->coercivity_bound();
    const auto l = s->lipschitz_bound();
    if (s->has_apply() && m && l && *m > 0.0 && std::isfinite(*l)) {
      return forward_step(s, config);
    }
  }
  throw ConfigError(
      "solve_zero: no applicable algorithm for " + s->describe() +
      " (no closed form, no resolvent split, and no usable constants for the "
      "forward step)");
}

double guarded_newton(const std::function<std::pair<double, double>(double)>& fn,
                      double lo, double hi, double tol, int max_iter) {
  if (!fn) {
    throw ArgumentError("guarded_newton: empty function");
  }
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw ArgumentError("guarded_newton: invalid bracket endpoints");
  }
  if (!(tol > 0.0) || !std::isfinite(tol)) {
    throw ArgumentError("guarded_newton: tol must be positive and finite");
  }
  auto [flo, dlo] = fn(lo);
  (void)dlo;
  if (std::abs(flo) <= tol) {
    return lo;
  }
  auto [fhi, dhi] = fn(hi);
  (void)dhi;
  if (std::abs(fhi) <= tol) {
    return hi;
  }
  if (flo > 0.0 || fhi < 0.0) {
    std::ostringstream msg;
    msg << "guarded_newton: invalid bracket: need h(lo) <= 0 <= h(hi), got h("
        << lo << ") = " << flo << ", h(" << hi << ") = " << fhi;
    throw ArgumentError(msg.str());
  }
  double x = 0.5 * (lo + hi);
  for (int k = 0; k < max_iter; ++k) {
    const auto [h, d] = fn(x);
    if (std::isfinite(h) && std::abs(h) <= tol) {
      return x;
    }
    // Nonfinite values only arise on the overflow side of an increasing h;
    // treating them as large-positive keeps the bracket shrinking.
    if (!std::isfinite(h) || h > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (std::isfinite(h) && std::isfinite(d) && d > 0.0) {
      next = x - h / d;
    }
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    if (next == x) {
      // The bracket collapsed to one representable point.
      break;
    }
    x = next;
  }
  const auto [h_final, d_final] = fn(x);
  (void)d_final;
  if (std::abs(h_final) <= tol * 1e3) {
    // Within a rounding-limited neighbourhood of the root.
    return x;
  }
  std::ostringstream msg;
  msg << "guarded_newton: no root to tolerance " << tol << " after " << max_iter
      << " iterations (|h| = " << std::abs(h_final) << ")";
  throw NumericalError(msg.str());
}

}  // namespace monoport
