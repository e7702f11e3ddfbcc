#include "monoport/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>

#include "monoport/elements.hpp"

namespace monoport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct IntervalBounds {
  double lo = -kInf;
  double hi = kInf;
  [[nodiscard]] bool bounded() const { return lo > -kInf || hi < kInf; }
};

/// Intersects the componentwise domain intervals of every pointwise law
/// reachable through sums, scalings, and output shifts. Structures that
/// transform the input space (congruences, inverses) contribute nothing;
/// the final check_domain call remains the authority.
void collect_interval(const Relation* s, IntervalBounds* bounds) {
  if (const auto* lifted = dynamic_cast<const LiftedRelation*>(s)) {
    bounds->lo = std::max(bounds->lo, lifted->law()->domain_lo());
    bounds->hi = std::min(bounds->hi, lifted->law()->domain_hi());
    return;
  }
  if (const auto* sum = dynamic_cast<const SumRelation*>(s)) {
    for (const auto& part : sum->parts()) {
      collect_interval(part.get(), bounds);
    }
    return;
  }
  if (const auto* scaled = dynamic_cast<const ScaledRelation*>(s)) {
    collect_interval(scaled->base().get(), bounds);
    return;
  }
  if (const auto* shifted = dynamic_cast<const ShiftedRelation*>(s)) {
    collect_interval(shifted->base().get(), bounds);
    return;
  }
}

/// Moves a probe into the relation's domain: clamp into the interior of the
/// law interval, remove the mean where the domain is the zero-mean subspace,
/// and when both constraints bind, shrink around the mean until the clamped
/// directions fit. Returns false when no admissible point was reached.
bool project_into_domain(const Relation& s, const IntervalBounds& bounds,
                         Vector* u) {
  const bool zero_mean = s.zero_mean_domain();
  const double margin_lo =
      bounds.lo > -kInf
          ? (bounds.lo != 0.0 ? 1e-3 * std::abs(bounds.lo) : 1e-9)
          : 0.0;
  const double margin_hi =
      bounds.hi < kInf
          ? (bounds.hi != 0.0 ? 1e-3 * std::abs(bounds.hi) : 1e-9)
          : 0.0;
  const double lo = bounds.lo + margin_lo;
  const double hi = bounds.hi - margin_hi;
  if (lo > hi) {
    return false;
  }
  for (int pass = 0; pass < 4; ++pass) {
    if (bounds.bounded()) {
      *u = u->cwiseMax(lo).cwiseMin(hi);
    }
    if (zero_mean) {
      u->array() -= u->mean();
    }
  }
  if (zero_mean && bounds.bounded()) {
    // Zero-mean vectors inside a tight interval around zero must be small:
    // scale the centered probe until every component fits strictly inside.
    u->array() -= u->mean();
    double factor = 1.0;
    for (Eigen::Index k = 0; k < u->size(); ++k) {
      const double w = (*u)[k];
      if (w < lo && lo < 0.0) {
        factor = std::min(factor, lo / w);
      } else if (w > hi && hi > 0.0) {
        factor = std::min(factor, hi / w);
      } else if ((w < lo && lo >= 0.0) || (w > hi && hi <= 0.0)) {
        return false;  // interval does not straddle zero; no zero-mean fit
      }
    }
    if (factor < 1.0) {
      // Halve on top of the exact fit so the binding component lands
      // strictly inside the open interval.
      *u *= 0.5 * factor;
    }
  }
  try {
    s.check_domain(*u);
  } catch (const DomainViolation&) {
    return false;
  }
  return true;
}

/// Deterministic probe stream: a handful of structured directions first
/// (constant, coordinate spikes, the lowest Fourier pair), then Gaussian
/// draws. Pairs come out in a fixed order for a fixed seed.
class PairStream {
 public:
  PairStream(const Relation& s, const SamplerConfig& config)
      : relation_(s), config_(config), rng_(config.seed), normal_(0.0, 1.0) {
    collect_interval(&s, &bounds_);
    if (config_.structured_probes) {
      const Eigen::Index n = s.dim();
      const double a = config_.amplitude;
      Vector ones = Vector::Constant(n, a);
      Vector e0 = Vector::Zero(n);
      e0[0] = a;
      Vector emid = Vector::Zero(n);
      emid[n / 2] = a;
      Vector wave_c(n);
      Vector wave_s(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double th = 2.0 * M_PI * static_cast<double>(k) /
                          static_cast<double>(n);
        wave_c[k] = a * std::cos(th);
        wave_s[k] = a * std::sin(th);
      }
      Vector zero = Vector::Zero(n);
      structured_ = {{ones, zero},    {e0, zero},   {wave_c, wave_s},
                     {ones, wave_c},  {e0, emid},   {wave_s, zero}};
      // Every remaining coordinate axis, so extremal directions of a
      // diagonal or near-diagonal map are probed exactly.
      for (Eigen::Index k = 1; k < n; ++k) {
        if (k == n / 2) {
          continue;  // emid above
        }
        Vector ek = Vector::Zero(n);
        ek[k] = a;
        structured_.emplace_back(std::move(ek), zero);
      }
    }
  }

  /// Draws the next admissible pair; returns false when the probe had to be
  /// skipped (out of domain even after projection).
  bool next(Vector* u1, Vector* u2) {
    if (structured_index_ < structured_.size()) {
      *u1 = structured_[structured_index_].first;
      *u2 = structured_[structured_index_].second;
      ++structured_index_;
    } else {
      *u1 = random_vector();
      *u2 = random_vector();
    }
    return project_into_domain(relation_, bounds_, u1) &&
           project_into_domain(relation_, bounds_, u2);
  }

  [[nodiscard]] Vector random_vector() {
    Vector v(relation_.dim());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      v[k] = config_.amplitude * normal_(rng_);
    }
    return v;
  }

 private:
  const Relation& relation_;
  SamplerConfig config_;
  IntervalBounds bounds_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
  std::vector<std::pair<Vector, Vector>> structured_;
  std::size_t structured_index_ = 0;
};

void note_skips(PropertyReport* report, int skipped) {
  if (skipped > 0) {
    std::ostringstream note;
    note << skipped << " probe pair(s) skipped (outside the domain)";
    report->notes.push_back(note.str());
  }
}

/// Graph-membership defect of a resolvent output: for x = resolvent(z,
/// lambda), how far the pair (x, (z - x) / lambda) sits from the graph of S.
///
/// The direct route evaluates the forward map at x.  That route breaks down
/// when x lands on the edge of the forward map's domain: the exact resolvent
/// output lies strictly inside, but its nearest double can sit on the edge
/// (where a steep law refuses to evaluate, or returns a non-finite value),
/// or just inside it (where the local slope turns a sub-ulp placement error
/// into an O(1) value discrepancy).  In exactly those cases -- forward value
/// unavailable, non-finite, or a discrepancy no larger than the measured
/// local slope times the floating-point resolution of the iterate -- the
/// membership test is rerouted through the resolvent at a second scale
/// mu != lambda: a pair (x, w) lies on the graph precisely when
/// resolvent(x + mu * w, mu) returns x, and resolvents are nonexpansive,
/// hence well conditioned on the whole space.  A forward map genuinely
/// inconsistent with the resolvent family never takes the reroute, because
/// its finite values differ by more than rounding of x can explain.
///
/// Returns the normalized defect, or nullopt when no route can evaluate it;
/// *rerouted reports whether the second-scale route was used.
std::optional<double> inclusion_defect(const Relation& s, const Vector& z,
                                       const Vector& x, double lambda,
                                       double defect_tol, bool* rerouted) {
  *rerouted = false;
  const Vector w = (z - x) / lambda;
  std::optional<Vector> y;
  try {
    Vector candidate = s.apply(x, DomainPolicy::relaxed);
    if (candidate.allFinite()) {
      y = std::move(candidate);
    }
  } catch (const DomainViolation&) {
  } catch (const NumericalError&) {
  }
  std::optional<double> direct;
  if (y) {
    direct = (w - *y).norm() / (1.0 + z.norm() / lambda + y->norm());
    if (*direct <= defect_tol) {
      return direct;
    }
    // The discrepancy is large.  Charge it to rounding of x only if the
    // forward map, probed along the discrepancy direction, is steep enough
    // that a perturbation at the floating-point resolution of x covers it.
    const double eps = std::numeric_limits<double>::epsilon();
    const double scale = 1.0 + x.norm();
    const double step = std::sqrt(eps) * scale;
    const Vector direction = (w - *y).normalized();
    double slope = std::numeric_limits<double>::infinity();
    try {
      const Vector probe = s.apply(x + step * direction, DomainPolicy::relaxed);
      if (probe.allFinite()) {
        slope = (probe - *y).norm() / step;
      }
    } catch (const DomainViolation&) {
    } catch (const NumericalError&) {
    }
    constexpr double kRoundingSlack = 64.0;
    if ((w - *y).norm() > slope * kRoundingSlack * eps * scale) {
      return direct;  // Not attributable to rounding: report it.
    }
  }
  // Second-scale route.  mu = lambda / 2 is an arbitrary distinct scale;
  // mu = lambda would be a tautology (x + lambda * w == z by construction).
  const double mu = 0.5 * lambda;
  try {
    const Vector back = s.resolvent(x + mu * w, mu);
    *rerouted = true;
    return (back - x).norm() / (1.0 + x.norm() + mu * w.norm());
  } catch (const NumericalError&) {
    return direct;  // nullopt when the forward value was unusable too.
  }
}

}  // namespace

PropertyReport check_monotone(const RelationPtr& s,
                              const SamplerConfig& config) {
  if (!s) {
    throw ArgumentError("check_monotone: null relation");
  }
  if (!s->has_apply()) {
    throw ConfigError("check_monotone needs a relation that can be applied");
  }
  PropertyReport report;
  report.property = "monotone";
  report.worst_margin = kInf;
  PairStream stream(*s, config);
  int skipped = 0;
  for (int trial = 0; trial < config.trials; ++trial) {
    Vector u1;
    Vector u2;
    if (!stream.next(&u1, &u2)) {
      ++skipped;
      continue;
    }
    const Vector du = u1 - u2;
    const double du_norm2 = du.squaredNorm();
    if (du_norm2 == 0.0) {
      ++skipped;
      continue;
    }
    Vector y1;
    Vector y2;
    try {
      y1 = s->apply(u1, DomainPolicy::enforce);
      y2 = s->apply(u2, DomainPolicy::enforce);
    } catch (const DomainViolation&) {
      ++skipped;
      continue;
    }
    const Vector dy = y1 - y2;
    const double inner = du.dot(dy);
    const double scale = 1.0 + std::sqrt(du_norm2) * dy.norm();
    const double margin = inner / scale;
    ++report.trials;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_witness = Witness{u1, u2, margin};
    }
    if (margin < -config.abs_tol) {
      ++report.violations;
    }
  }
  note_skips(&report, skipped);
  if (report.trials == 0) {
    report.notes.push_back("no admissible probe pairs; property untested");
    report.worst_margin = 0.0;
  }
  report.passed = report.violations == 0 && report.trials > 0;
  return report;
}

PropertyReport check_resolvent(const RelationPtr& s, double lambda,
                               const SamplerConfig& config) {
  if (!s) {
    throw ArgumentError("check_resolvent: null relation");
  }
  detail::require_lambda(lambda, "check_resolvent");
  if (!s->has_resolvent()) {
    throw ConfigError("check_resolvent needs a relation with a resolvent");
  }
  PropertyReport report;
  report.property = "resolvent";
  report.worst_margin = 0.0;
  // The resolvent is defined on the whole space, so probes are unprojected.
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&]() {
    Vector z(s->dim());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      z[k] = config.amplitude * normal(rng);
    }
    return z;
  };
  const bool can_apply = s->has_apply();
  if (!can_apply) {
    report.notes.push_back(
        "relation has no forward map; inclusion residual untested, firm "
        "nonexpansiveness only");
  }
  // A defect floor reflecting the certified accuracy of the inner linear and
  // scalar solves, which is looser than the default abs_tol.
  const double defect_tol = std::max(config.abs_tol, 1e-8);
  bool rejected_note = false;
  int skipped = 0;
  int edge_routed = 0;
  int inclusion_untested = 0;
  for (int trial = 0; trial < config.trials; ++trial) {
    const Vector z1 = draw();
    const Vector z2 = draw();
    Vector x1;
    Vector x2;
    try {
      x1 = s->resolvent(z1, lambda);
      x2 = s->resolvent(z2, lambda);
    } catch (const NumericalError& e) {
      if (!rejected_note) {
        report.notes.push_back(std::string("resolvent failed on a probe: ") +
                               e.what());
        rejected_note = true;
      }
      ++skipped;
      continue;
    }
    double defect = 0.0;
    if (can_apply) {
      bool rerouted = false;
      if (const auto inclusion =
              inclusion_defect(*s, z1, x1, lambda, defect_tol, &rerouted)) {
        defect = *inclusion;
      } else {
        ++inclusion_untested;
      }
      if (rerouted) {
        ++edge_routed;
      }
    }
    const Vector dx = x1 - x2;
    const Vector dz = z1 - z2;
    const double firm_violation = dx.squaredNorm() - dx.dot(dz);
    defect = std::max(
        defect, std::max(0.0, firm_violation / (1.0 + dx.norm() * dz.norm())));
    ++report.trials;
    if (defect > report.worst_margin) {
      report.worst_margin = defect;
      report.worst_witness = Witness{z1, z2, defect};
    }
    if (defect > defect_tol) {
      ++report.violations;
    }
  }
  if (edge_routed > 0) {
    std::ostringstream note;
    note << edge_routed
         << " probe(s) drove the iterate to the forward map's domain edge at "
            "double precision; graph membership verified through the "
            "resolvent at a second scale";
    report.notes.push_back(note.str());
  }
  if (inclusion_untested > 0) {
    std::ostringstream note;
    note << inclusion_untested
         << " probe(s) had no evaluable inclusion residual (firm "
            "nonexpansiveness still tested)";
    report.notes.push_back(note.str());
  }
  note_skips(&report, skipped);
  if (report.trials == 0) {
    report.notes.push_back("no usable probes; property untested");
  }
  report.passed = report.violations == 0 && report.trials > 0;
  return report;
}

namespace {

/// Shared pair walk for the three constant estimators.
template <typename Accumulate>
void for_each_difference(const RelationPtr& s, const SamplerConfig& config,
                         Accumulate&& accumulate) {
  if (!s) {
    throw ArgumentError("estimator: null relation");
  }
  if (!s->has_apply()) {
    throw ConfigError("estimator needs a relation that can be applied");
  }
  PairStream stream(*s, config);
  int used = 0;
  for (int trial = 0; trial < config.trials; ++trial) {
    Vector u1;
    Vector u2;
    if (!stream.next(&u1, &u2)) {
      continue;
    }
    const Vector du = u1 - u2;
    if (du.squaredNorm() == 0.0) {
      continue;
    }
    Vector dy;
    try {
      dy = s->apply(u1, DomainPolicy::enforce) -
           s->apply(u2, DomainPolicy::enforce);
    } catch (const DomainViolation&) {
      continue;
    }
    accumulate(du, dy);
    ++used;
  }
  if (used == 0) {
    throw NumericalError("estimator: no admissible probe pairs");
  }
}

}  // namespace

double estimate_coercivity(const RelationPtr& s, const SamplerConfig& config) {
  double m = kInf;
  for_each_difference(s, config, [&](const Vector& du, const Vector& dy) {
    m = std::min(m, du.dot(dy) / du.squaredNorm());
  });
  return m;
}

double estimate_cocoercivity(const RelationPtr& s,
                             const SamplerConfig& config) {
  double beta = kInf;
  for_each_difference(s, config, [&](const Vector& du, const Vector& dy) {
    const double dy2 = dy.squaredNorm();
    if (dy2 > 0.0) {
      beta = std::min(beta, du.dot(dy) / dy2);
    }
  });
  return beta;
}

double estimate_lipschitz(const RelationPtr& s, const SamplerConfig& config) {
  double ell = 0.0;
  for_each_difference(s, config, [&](const Vector& du, const Vector& dy) {
    ell = std::max(ell, dy.norm() / du.norm());
  });
  return ell;
}

}  // namespace monoport
