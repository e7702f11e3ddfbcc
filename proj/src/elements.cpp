#include "monoport/elements.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "monoport/signal.hpp"
#include "monoport/solvers.hpp"

namespace monoport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name, const char* who) {
  if (!std::isfinite(v) || v <= 0.0) {
    std::ostringstream msg;
    msg << who << ": " << name << " must be positive and finite, got " << v;
    throw ConstructionError(msg.str());
  }
}

/// Moves x strictly inside an open interval endpoint for bracketing.
double nudge_inside_lo(double lo) {
  const double eps = std::max(1e-6 * std::abs(lo), 1e-300);
  return lo + eps;
}

double nudge_inside_hi(double hi) {
  const double eps = std::max(1e-6 * std::abs(hi), 1e-300);
  return hi - eps;
}

/// Numeric inverse of a strictly increasing law: solves f(x) = y on demand.
class NumericInverseLaw final : public ScalarLaw {
 public:
  explicit NumericInverseLaw(ScalarLawPtr base) : base_(std::move(base)) {
    if (!base_->monotone()) {
      throw ConstructionError("law '" + base_->describe() +
                              "' is not monotone; no single-valued inverse");
    }
  }

  [[nodiscard]] double value(double y) const override { return solve_x(y); }

  [[nodiscard]] double slope(double y) const override {
    const double s = base_->slope(solve_x(y));
    if (!(s > 0.0)) {
      return kInf;
    }
    return 1.0 / s;
  }

  [[nodiscard]] std::optional<std::pair<double, double>> slope_bounds()
      const override {
    if (auto b = base_->slope_bounds(); b && b->first > 0.0) {
      return std::make_pair(1.0 / b->second, 1.0 / b->first);
    }
    return std::nullopt;
  }

  [[nodiscard]] ScalarLawPtr inverse() const override { return base_; }

  [[nodiscard]] bool monotone() const override { return true; }

  [[nodiscard]] std::string describe() const override {
    return "inverse(" + base_->describe() + ")";
  }

 private:
  [[nodiscard]] double solve_x(double y) const;

  ScalarLawPtr base_;
};

double NumericInverseLaw::solve_x(double y) const {
  if (!std::isfinite(y)) {
    throw ArgumentError(describe() + ": non-finite input");
  }
  const double dlo = base_->domain_lo();
  const double dhi = base_->domain_hi();
  auto h = [&](double x) { return base_->value(x) - y; };
  // Bracket the preimage by doubling steps, halving toward open endpoints.
  double x0 = std::clamp(0.0, std::isfinite(dlo) ? nudge_inside_lo(dlo) : -1.0,
                         std::isfinite(dhi) ? nudge_inside_hi(dhi) : 1.0);
  double lo = x0;
  double hi = x0;
  double step = 1.0;
  int guard = 0;
  while (h(lo) > 0.0) {
    hi = lo;
    lo = std::isfinite(dlo) ? 0.5 * (lo + dlo) : lo - step;
    step *= 2.0;
    if (++guard > 600) {
      std::ostringstream msg;
      msg << describe() << ": value " << y << " is below the range of the law";
      throw DomainViolation(msg.str());
    }
  }
  step = 1.0;
  guard = 0;
  while (h(hi) < 0.0) {
    lo = std::max(lo, hi);
    hi = std::isfinite(dhi) ? 0.5 * (hi + dhi) : hi + step;
    step *= 2.0;
    if (++guard > 600) {
      std::ostringstream msg;
      msg << describe() << ": value " << y << " is above the range of the law";
      throw DomainViolation(msg.str());
    }
  }
  return guarded_newton(
      [&](double x) {
        return std::make_pair(base_->value(x) - y, base_->slope(x));
      },
      lo, hi, 1e-12 * (1.0 + std::abs(y)));
}

}  // namespace

// ============================================================================
// ScalarLaw defaults
// ============================================================================

double ScalarLaw::domain_lo() const { return -kInf; }
double ScalarLaw::domain_hi() const { return kInf; }

double ScalarLaw::resolve(double z, double lambda) const {
  if (!std::isfinite(z)) {
    throw ArgumentError(describe() + ".resolve: non-finite input");
  }
  detail::require_lambda(lambda, "ScalarLaw::resolve");
  const double dlo = domain_lo();
  const double dhi = domain_hi();
  auto g = [&](double x) { return x + lambda * value(x) - z; };
  double x0 = std::clamp(z, std::isfinite(dlo) ? nudge_inside_lo(dlo) : z,
                         std::isfinite(dhi) ? nudge_inside_hi(dhi) : z);
  if (!std::isfinite(x0)) {
    x0 = 0.0;
  }
  double lo = x0;
  double hi = x0;
  double step = std::max(1.0, 0.5 * std::abs(z));
  int guard = 0;
  while (g(lo) > 0.0) {
    hi = lo;
    if (std::isfinite(dlo)) {
      const double next = 0.5 * (lo + dlo);
      if (!(next > dlo) || next >= lo) {
        // The bracket collapsed onto the domain edge with the residual
        // still positive: the exact solution lies between the edge and the
        // smallest representable interior point, so the correctly rounded
        // resolvent (of the maximal monotone extension) is the edge itself.
        return dlo;
      }
      lo = next;
    } else {
      lo -= step;
    }
    step *= 2.0;
    if (++guard > 600) {
      throw NumericalError(describe() + ".resolve: could not bracket the root");
    }
  }
  step = std::max(1.0, 0.5 * std::abs(z));
  guard = 0;
  while (g(hi) < 0.0) {
    lo = std::max(lo, hi);
    if (std::isfinite(dhi)) {
      const double next = 0.5 * (hi + dhi);
      if (!(next < dhi) || next <= hi) {
        return dhi;  // symmetric collapse at the upper edge
      }
      hi = next;
    } else {
      hi += step;
    }
    step *= 2.0;
    if (++guard > 600) {
      throw NumericalError(describe() + ".resolve: could not bracket the root");
    }
  }
  return guarded_newton(
      [&](double x) {
        return std::make_pair(x + lambda * value(x) - z,
                              1.0 + lambda * slope(x));
      },
      lo, hi, 1e-12 * (1.0 + std::abs(z)));
}

ScalarLawPtr ScalarLaw::inverse() const {
  return std::make_shared<NumericInverseLaw>(shared_from_this());
}

// ============================================================================
// LinearResistorLaw
// ============================================================================

LinearResistorLaw::LinearResistorLaw(double resistance)
    : resistance_(resistance) {
  // Negative resistance is representable on purpose: the property checks
  // exist to flag such a law as non-monotone rather than refuse to model it.
  if (!std::isfinite(resistance_)) {
    std::ostringstream msg;
    msg << "LinearResistorLaw: resistance must be finite, got " << resistance_;
    throw ConstructionError(msg.str());
  }
}

double LinearResistorLaw::value(double x) const { return resistance_ * x; }

double LinearResistorLaw::slope(double) const { return resistance_; }

std::optional<std::pair<double, double>> LinearResistorLaw::slope_bounds()
    const {
  return std::make_pair(resistance_, resistance_);
}

double LinearResistorLaw::resolve(double z, double lambda) const {
  detail::require_lambda(lambda, "LinearResistorLaw::resolve");
  const double denom = 1.0 + lambda * resistance_;
  if (denom <= 0.0) {
    std::ostringstream msg;
    msg << "LinearResistorLaw::resolve: 1 + lambda * R = " << denom
        << " is not positive; the law is not monotone at this step";
    throw NumericalError(msg.str());
  }
  return z / denom;
}

ScalarLawPtr LinearResistorLaw::inverse() const {
  if (resistance_ == 0.0) {
    throw ConstructionError(
        "LinearResistorLaw: a zero-resistance law is flat and has no "
        "single-valued inverse");
  }
  return std::make_shared<LinearResistorLaw>(1.0 / resistance_);
}

bool LinearResistorLaw::monotone() const { return resistance_ >= 0.0; }

std::string LinearResistorLaw::describe() const {
  std::ostringstream s;
  s << "linear(R=" << resistance_ << ")";
  return s.str();
}

// ============================================================================
// ShockleyDiodeLaw
// ============================================================================

ShockleyDiodeLaw::ShockleyDiodeLaw(double saturation_current, double ideality,
                                   double thermal_voltage)
    : saturation_current_(saturation_current),
      ideality_(ideality),
      thermal_voltage_(thermal_voltage) {
  require_positive(saturation_current_, "saturation current", "ShockleyDiodeLaw");
  require_positive(ideality_, "ideality factor", "ShockleyDiodeLaw");
  require_positive(thermal_voltage_, "thermal voltage", "ShockleyDiodeLaw");
}

double ShockleyDiodeLaw::value(double x) const {
  return diode_v_of_i(x, saturation_current_, ideality_, thermal_voltage_);
}

double ShockleyDiodeLaw::slope(double x) const {
  if (x <= -saturation_current_) {
    return kInf;
  }
  return ideality_ * thermal_voltage_ / (x + saturation_current_);
}

double ShockleyDiodeLaw::domain_lo() const { return -saturation_current_; }

std::optional<std::pair<double, double>> ShockleyDiodeLaw::slope_bounds()
    const {
  // Slope runs from 0 (far forward) to infinity (at the domain edge).
  return std::nullopt;
}

double ShockleyDiodeLaw::resolve(double z, double lambda) const {
  detail::require_lambda(lambda, "ShockleyDiodeLaw::resolve");
  return diode_resolvent_scalar(z, lambda, saturation_current_, ideality_,
                                thermal_voltage_);
}

ScalarLawPtr ShockleyDiodeLaw::inverse() const {
  return std::make_shared<DiodeConductanceLaw>(saturation_current_, ideality_,
                                               thermal_voltage_);
}

bool ShockleyDiodeLaw::monotone() const { return true; }

std::string ShockleyDiodeLaw::describe() const {
  std::ostringstream s;
  s << "diode(Is=" << saturation_current_ << ", n=" << ideality_
    << ", VT=" << thermal_voltage_ << ")";
  return s.str();
}

// ============================================================================
// DiodeConductanceLaw
// ============================================================================

DiodeConductanceLaw::DiodeConductanceLaw(double saturation_current,
                                         double ideality,
                                         double thermal_voltage)
    : saturation_current_(saturation_current),
      ideality_(ideality),
      thermal_voltage_(thermal_voltage) {
  require_positive(saturation_current_, "saturation current",
                   "DiodeConductanceLaw");
  require_positive(ideality_, "ideality factor", "DiodeConductanceLaw");
  require_positive(thermal_voltage_, "thermal voltage", "DiodeConductanceLaw");
}

double DiodeConductanceLaw::value(double x) const {
  return saturation_current_ * std::expm1(x / (ideality_ * thermal_voltage_));
}

double DiodeConductanceLaw::slope(double x) const {
  const double a = ideality_ * thermal_voltage_;
  return (saturation_current_ / a) * std::exp(x / a);
}

std::optional<std::pair<double, double>> DiodeConductanceLaw::slope_bounds()
    const {
  return std::nullopt;
}

double DiodeConductanceLaw::resolve(double z, double lambda) const {
  detail::require_lambda(lambda, "DiodeConductanceLaw::resolve");
  if (!std::isfinite(z)) {
    throw ArgumentError("DiodeConductanceLaw::resolve: non-finite input");
  }
  const double a = ideality_ * thermal_voltage_;
  const double scaled = lambda * saturation_current_;
  // h is increasing with h(lo) <= 0 <= h(hi):
  //   lo = min(z, 0);  hi = a log1p(max(z, 0) / (lambda Is)),
  // since h(hi) = hi + max(z,0) - z >= 0 while the exponential stays bounded
  // by z / (lambda Is) on the whole bracket.
  const double lo = std::min(z, 0.0);
  const double hi = a * std::log1p(std::max(z, 0.0) / scaled);
  auto fn = [&](double x) {
    const double e = std::expm1(x / a);
    return std::make_pair(x + scaled * e - z, 1.0 + (scaled / a) * (e + 1.0));
  };
  return guarded_newton(fn, lo, hi, 1e-12 * (1.0 + std::abs(z)));
}

ScalarLawPtr DiodeConductanceLaw::inverse() const {
  return std::make_shared<ShockleyDiodeLaw>(saturation_current_, ideality_,
                                            thermal_voltage_);
}

bool DiodeConductanceLaw::monotone() const { return true; }

std::string DiodeConductanceLaw::describe() const {
  std::ostringstream s;
  s << "diode-conductance(Is=" << saturation_current_ << ", n=" << ideality_
    << ", VT=" << thermal_voltage_ << ")";
  return s.str();
}

// ============================================================================
// PiecewiseLinearLaw
// ============================================================================

PiecewiseLinearLaw::PiecewiseLinearLaw(std::vector<double> xs,
                                       std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.size() < 2) {
    throw ConstructionError(
        "PiecewiseLinearLaw: need matching x/y lists with at least 2 points");
  }
  for (std::size_t k = 0; k < xs_.size(); ++k) {
    if (!std::isfinite(xs_[k]) || !std::isfinite(ys_[k])) {
      throw ConstructionError("PiecewiseLinearLaw: non-finite breakpoint");
    }
    if (k > 0 && xs_[k] <= xs_[k - 1]) {
      std::ostringstream msg;
      msg << "PiecewiseLinearLaw: abscissae must be strictly increasing ("
          << xs_[k - 1] << " then " << xs_[k] << ")";
      throw ConstructionError(msg.str());
    }
  }
}

double PiecewiseLinearLaw::segment_slope(std::size_t seg) const {
  return (ys_[seg + 1] - ys_[seg]) / (xs_[seg + 1] - xs_[seg]);
}

double PiecewiseLinearLaw::value(double x) const {
  const std::size_t nseg = xs_.size() - 1;
  std::size_t seg;
  if (x <= xs_.front()) {
    seg = 0;
  } else if (x >= xs_.back()) {
    seg = nseg - 1;
  } else {
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    seg = static_cast<std::size_t>(it - xs_.begin()) - 1;
  }
  return ys_[seg] + segment_slope(seg) * (x - xs_[seg]);
}

double PiecewiseLinearLaw::slope(double x) const {
  const std::size_t nseg = xs_.size() - 1;
  if (x <= xs_.front()) {
    return segment_slope(0);
  }
  if (x >= xs_.back()) {
    return segment_slope(nseg - 1);
  }
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  return segment_slope(static_cast<std::size_t>(it - xs_.begin()) - 1);
}

std::optional<std::pair<double, double>> PiecewiseLinearLaw::slope_bounds()
    const {
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t seg = 0; seg + 1 < xs_.size(); ++seg) {
    const double s = segment_slope(seg);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return std::make_pair(lo, hi);
}

double PiecewiseLinearLaw::resolve(double z, double lambda) const {
  detail::require_lambda(lambda, "PiecewiseLinearLaw::resolve");
  if (!std::isfinite(z)) {
    throw ArgumentError("PiecewiseLinearLaw::resolve: non-finite input");
  }
  // g(x) = x + lambda f(x) - z is piecewise linear with the same breakpoints;
  // the root is exact within its segment.
  auto g_at = [&](std::size_t k) { return xs_[k] + lambda * ys_[k] - z; };
  auto root_on = [&](double x_ref, double g_ref, double seg_slope) {
    const double s = 1.0 + lambda * seg_slope;
    if (s <= 0.0) {
      std::ostringstream msg;
      msg << describe() << ".resolve: segment slope " << seg_slope
          << " makes the resolvent multivalued at lambda = " << lambda;
      throw NumericalError(msg.str());
    }
    return x_ref - g_ref / s;
  };
  if (g_at(0) > 0.0) {
    return root_on(xs_.front(), g_at(0), segment_slope(0));
  }
  const std::size_t last = xs_.size() - 1;
  if (g_at(last) < 0.0) {
    return root_on(xs_.back(), g_at(last), segment_slope(last - 1));
  }
  for (std::size_t k = 1; k <= last; ++k) {
    if (g_at(k) >= 0.0) {
      return root_on(xs_[k - 1], g_at(k - 1), segment_slope(k - 1));
    }
  }
  return xs_.back();  // unreachable: g_at(last) >= 0 was handled above
}

ScalarLawPtr PiecewiseLinearLaw::inverse() const {
  for (std::size_t seg = 0; seg + 1 < xs_.size(); ++seg) {
    if (segment_slope(seg) <= 0.0) {
      std::ostringstream msg;
      msg << describe() << ": segment " << seg << " has slope "
          << segment_slope(seg)
          << " <= 0; the law is not strictly increasing and has no "
          << "single-valued inverse";
      throw ConstructionError(msg.str());
    }
  }
  return std::make_shared<PiecewiseLinearLaw>(ys_, xs_);
}

bool PiecewiseLinearLaw::monotone() const {
  for (std::size_t seg = 0; seg + 1 < xs_.size(); ++seg) {
    if (segment_slope(seg) < 0.0) {
      return false;
    }
  }
  return true;
}

std::string PiecewiseLinearLaw::describe() const {
  std::ostringstream s;
  s << "piecewise(" << xs_.size() << " points)";
  return s.str();
}

// ============================================================================
// SumLaw
// ============================================================================

SumLaw::SumLaw(ScalarLawPtr a, ScalarLawPtr b)
    : a_(std::move(a)), b_(std::move(b)) {
  if (!a_ || !b_) {
    throw ArgumentError("SumLaw: null part");
  }
  if (domain_lo() >= domain_hi()) {
    throw ConstructionError("SumLaw: empty domain intersection");
  }
}

double SumLaw::value(double x) const { return a_->value(x) + b_->value(x); }

double SumLaw::slope(double x) const { return a_->slope(x) + b_->slope(x); }

double SumLaw::domain_lo() const {
  return std::max(a_->domain_lo(), b_->domain_lo());
}

double SumLaw::domain_hi() const {
  return std::min(a_->domain_hi(), b_->domain_hi());
}

std::optional<std::pair<double, double>> SumLaw::slope_bounds() const {
  auto ba = a_->slope_bounds();
  auto bb = b_->slope_bounds();
  if (ba && bb) {
    return std::make_pair(ba->first + bb->first, ba->second + bb->second);
  }
  return std::nullopt;
}

bool SumLaw::monotone() const { return a_->monotone() && b_->monotone(); }

std::string SumLaw::describe() const {
  return a_->describe() + " + " + b_->describe();
}

// ============================================================================
// LiftedRelation
// ============================================================================

LiftedRelation::LiftedRelation(ScalarLawPtr law, Eigen::Index n)
    : LiftedRelation(std::move(law), Vector(Vector::Zero(n))) {}

LiftedRelation::LiftedRelation(ScalarLawPtr law, Vector shift)
    : Relation(shift.size()), law_(std::move(law)), shift_(std::move(shift)) {
  if (!law_) {
    throw ArgumentError("LiftedRelation: null law");
  }
  if (dim() < 1 || !shift_.allFinite()) {
    throw ArgumentError("LiftedRelation: bad shift vector");
  }
}

std::optional<double> LiftedRelation::coercivity_bound() const {
  if (auto b = law_->slope_bounds()) {
    return b->first;
  }
  return std::nullopt;
}

std::optional<double> LiftedRelation::lipschitz_bound() const {
  if (auto b = law_->slope_bounds()) {
    return b->second;
  }
  return std::nullopt;
}

bool LiftedRelation::monotone_by_construction() const {
  return law_->monotone();
}

void LiftedRelation::check_domain(const Vector& u) const {
  const double lo = law_->domain_lo();
  const double hi = law_->domain_hi();
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    if (u[k] <= lo || u[k] >= hi) {
      std::ostringstream msg;
      msg << describe() << ": sample " << k << " (value " << u[k]
          << ") lies outside the open domain (" << lo << ", " << hi << ")";
      throw DomainViolation(msg.str());
    }
  }
}

std::string LiftedRelation::describe() const {
  std::ostringstream s;
  s << "lift(" << law_->describe() << ")[n=" << dim() << "]";
  return s.str();
}

Vector LiftedRelation::do_apply(const Vector& u) const {
  Vector out(dim());
  for (Eigen::Index k = 0; k < dim(); ++k) {
    out[k] = law_->value(u[k]) - shift_[k];
  }
  return out;
}

Vector LiftedRelation::do_resolvent(const Vector& z, double lambda) const {
  Vector out(dim());
  for (Eigen::Index k = 0; k < dim(); ++k) {
    out[k] = law_->resolve(z[k] + lambda * shift_[k], lambda);
  }
  return out;
}

RelationPtr lift_pointwise(const ScalarLawPtr& law, Eigen::Index n) {
  return std::make_shared<LiftedRelation>(law, n);
}

// ============================================================================
// Scalar helpers
// ============================================================================

double diode_v_of_i(double i, double saturation_current, double ideality,
                    double thermal_voltage) {
  if (!std::isfinite(i)) {
    throw ArgumentError("diode_v_of_i: non-finite current");
  }
  if (i <= -saturation_current) {
    std::ostringstream msg;
    msg << "diode_v_of_i: current " << i
        << " A is at or below the reverse saturation limit "
        << -saturation_current << " A; the log law is undefined there";
    throw DomainViolation(msg.str());
  }
  return ideality * thermal_voltage * std::log1p(i / saturation_current);
}

double diode_resolvent_scalar(double z, double lambda,
                              double saturation_current, double ideality,
                              double thermal_voltage) {
  detail::require_lambda(lambda, "diode_resolvent_scalar");
  if (!std::isfinite(z)) {
    throw ArgumentError("diode_resolvent_scalar: non-finite input");
  }
  // Substitute w = v / (n VT): solve Is expm1(w) + lambda n VT w = z.
  // The current iterate i = Is expm1(w) then satisfies i > -Is exactly, for
  // any representable w, which keeps the Newton iteration inside the law's
  // domain no matter how deep the reverse-bias right-hand side goes.
  const double a = lambda * ideality * thermal_voltage;
  const double is = saturation_current;
  double lo;
  double hi;
  if (z >= 0.0) {
    lo = 0.0;
    hi = std::log1p(z / is);
  } else {
    lo = z / a;
    hi = 0.0;
  }
  auto fn = [&](double w) {
    const double e = std::expm1(w);
    return std::make_pair(is * e + a * w - z, is * (e + 1.0) + a);
  };
  const double w = guarded_newton(fn, lo, hi, 1e-12 * (1.0 + std::abs(z)));
  return is * std::expm1(w);
}

// ============================================================================
// Elements
// ============================================================================

void validate_element(const ElementSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ResistorSpec>) {
          // Any finite value is representable; a negative resistance builds a
          // non-monotone law that the property checks are meant to expose.
          if (!std::isfinite(s.resistance)) {
            std::ostringstream msg;
            msg << "resistor: resistance must be finite, got " << s.resistance;
            throw ConstructionError(msg.str());
          }
        } else if constexpr (std::is_same_v<T, CapacitorSpec>) {
          require_positive(s.capacitance, "capacitance", "capacitor");
        } else if constexpr (std::is_same_v<T, InductorSpec>) {
          require_positive(s.inductance, "inductance", "inductor");
        } else if constexpr (std::is_same_v<T, DiodeSpec>) {
          require_positive(s.saturation_current, "saturation current", "diode");
          require_positive(s.ideality, "ideality factor", "diode");
          require_positive(s.thermal_voltage, "thermal voltage", "diode");
        } else if constexpr (std::is_same_v<T, PiecewiseSpec>) {
          PiecewiseLinearLaw law(s.xs, s.ys);  // ctor performs the checks
          (void)law;
        }
      },
      spec);
}

std::string element_kind_name(const ElementSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ResistorSpec>) {
          return "resistor";
        } else if constexpr (std::is_same_v<T, CapacitorSpec>) {
          return "capacitor";
        } else if constexpr (std::is_same_v<T, InductorSpec>) {
          return "inductor";
        } else if constexpr (std::is_same_v<T, DiodeSpec>) {
          return "diode";
        } else {
          return "piecewise";
        }
      },
      spec);
}

RelationPtr element_impedance(const ElementSpec& spec, Eigen::Index n,
                              double period) {
  validate_element(spec);
  const int ni = static_cast<int>(n);
  return std::visit(
      [&](const auto& s) -> RelationPtr {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ResistorSpec>) {
          return make_affine_relation(
              AffineOperator(s.resistance * Matrix::Identity(n, n)));
        } else if constexpr (std::is_same_v<T, CapacitorSpec>) {
          IntegralOperator integ = make_integral(ni, period);
          return make_affine_relation(
              AffineOperator((1.0 / s.capacitance) * integ.op.matrix),
              /*zero_mean_domain=*/true);
        } else if constexpr (std::is_same_v<T, InductorSpec>) {
          DerivativeOperator d = make_derivative(ni, period);
          return make_affine_relation(
              AffineOperator(s.inductance * d.op.matrix));
        } else if constexpr (std::is_same_v<T, DiodeSpec>) {
          return lift_pointwise(
              std::make_shared<ShockleyDiodeLaw>(
                  s.saturation_current, s.ideality, s.thermal_voltage),
              n);
        } else {
          return lift_pointwise(std::make_shared<PiecewiseLinearLaw>(s.xs, s.ys),
                                n);
        }
      },
      spec);
}

RelationPtr element_admittance(const ElementSpec& spec, Eigen::Index n,
                               double period) {
  validate_element(spec);
  const int ni = static_cast<int>(n);
  return std::visit(
      [&](const auto& s) -> RelationPtr {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ResistorSpec>) {
          if (s.resistance == 0.0) {
            throw ConstructionError(
                "resistor: zero resistance (a short) has no admittance form");
          }
          return make_affine_relation(
              AffineOperator((1.0 / s.resistance) * Matrix::Identity(n, n)));
        } else if constexpr (std::is_same_v<T, CapacitorSpec>) {
          DerivativeOperator d = make_derivative(ni, period);
          return make_affine_relation(
              AffineOperator(s.capacitance * d.op.matrix));
        } else if constexpr (std::is_same_v<T, InductorSpec>) {
          IntegralOperator integ = make_integral(ni, period);
          return make_affine_relation(
              AffineOperator((1.0 / s.inductance) * integ.op.matrix),
              /*zero_mean_domain=*/true);
        } else if constexpr (std::is_same_v<T, DiodeSpec>) {
          return lift_pointwise(
              std::make_shared<DiodeConductanceLaw>(
                  s.saturation_current, s.ideality, s.thermal_voltage),
              n);
        } else {
          PiecewiseLinearLaw forward(s.xs, s.ys);
          return lift_pointwise(forward.inverse(), n);
        }
      },
      spec);
}

}  // namespace monoport
