#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "monoport/relation.hpp"

namespace monoport {

// ============================================================================
// Scalar constitutive laws (single-valued, applied samplewise when lifted)
// ============================================================================
class ScalarLaw : public std::enable_shared_from_this<ScalarLaw> {
 public:
  virtual ~ScalarLaw() = default;

  /// y = f(x). Callers must keep x inside (domain_lo, domain_hi).
  [[nodiscard]] virtual double value(double x) const = 0;
  /// df/dx at x (one-sided at breakpoints).
  [[nodiscard]] virtual double slope(double x) const = 0;

  /// Open domain interval; infinities mean unbounded.
  [[nodiscard]] virtual double domain_lo() const;
  [[nodiscard]] virtual double domain_hi() const;

  /// {inf slope, sup slope} over the domain when both are finite.
  [[nodiscard]] virtual std::optional<std::pair<double, double>> slope_bounds()
      const = 0;

  /// Solves x + lambda f(x) = z for the unique root (lambda > 0, f monotone).
  /// The default brackets the root and runs a guarded Newton iteration;
  /// overrides exist where a better-conditioned substitution is known.
  [[nodiscard]] virtual double resolve(double z, double lambda) const;

  /// Law of the inverse relation x = f^-1(y). The default inverts
  /// numerically; throws ConstructionError when f is not strictly increasing.
  [[nodiscard]] virtual std::shared_ptr<const ScalarLaw> inverse() const;

  /// All slopes nonnegative on the domain.
  [[nodiscard]] virtual bool monotone() const = 0;

  [[nodiscard]] virtual std::string describe() const = 0;
};

using ScalarLawPtr = std::shared_ptr<const ScalarLaw>;

/// v = R i (R >= 0).
class LinearResistorLaw final : public ScalarLaw {
 public:
  explicit LinearResistorLaw(double resistance);

  [[nodiscard]] double value(double x) const override;
  [[nodiscard]] double slope(double) const override;
  [[nodiscard]] std::optional<std::pair<double, double>> slope_bounds()
      const override;
  [[nodiscard]] double resolve(double z, double lambda) const override;
  [[nodiscard]] ScalarLawPtr inverse() const override;
  [[nodiscard]] bool monotone() const override;
  [[nodiscard]] std::string describe() const override;

  [[nodiscard]] double resistance() const { return resistance_; }

 private:
  double resistance_;
};

/// Ideal-diode drop v = n V_T log(1 + i / I_s), defined for i > -I_s.
/// The resolvent substitutes w = v / (n V_T) so both the bracket and the
/// Newton iterate stay representable for every real right-hand side.
class ShockleyDiodeLaw final : public ScalarLaw {
 public:
  ShockleyDiodeLaw(double saturation_current, double ideality,
                   double thermal_voltage);

  [[nodiscard]] double value(double x) const override;
  [[nodiscard]] double slope(double x) const override;
  [[nodiscard]] double domain_lo() const override;
  [[nodiscard]] std::optional<std::pair<double, double>> slope_bounds()
      const override;
  [[nodiscard]] double resolve(double z, double lambda) const override;
  [[nodiscard]] ScalarLawPtr inverse() const override;
  [[nodiscard]] bool monotone() const override;
  [[nodiscard]] std::string describe() const override;

  [[nodiscard]] double saturation_current() const { return saturation_current_; }
  [[nodiscard]] double ideality() const { return ideality_; }
  [[nodiscard]] double thermal_voltage() const { return thermal_voltage_; }

 private:
  double saturation_current_;
  double ideality_;
  double thermal_voltage_;
};

/// Current into a diode held at voltage v: i = I_s expm1(v / (n V_T)).
/// This is the exact inverse of ShockleyDiodeLaw and is total.
class DiodeConductanceLaw final : public ScalarLaw {
 public:
  DiodeConductanceLaw(double saturation_current, double ideality,
                      double thermal_voltage);

  [[nodiscard]] double value(double x) const override;
  [[nodiscard]] double slope(double x) const override;
  [[nodiscard]] std::optional<std::pair<double, double>> slope_bounds()
      const override;
  [[nodiscard]] double resolve(double z, double lambda) const override;
  [[nodiscard]] ScalarLawPtr inverse() const override;
  [[nodiscard]] bool monotone() const override;
  [[nodiscard]] std::string describe() const override;

 private:
  double saturation_current_;
  double ideality_;
  double thermal_voltage_;
};

/// Continuous piecewise-linear interpolant through strictly increasing
/// breakpoint abscissae; end segments extrapolate. Slopes may be negative,
/// which makes the law non-monotone (useful as a negative control).
class PiecewiseLinearLaw final : public ScalarLaw {
 public:
  PiecewiseLinearLaw(std::vector<double> xs, std::vector<double> ys);

  [[nodiscard]] double value(double x) const override;
  [[nodiscard]] double slope(double x) const override;
  [[nodiscard]] std::optional<std::pair<double, double>> slope_bounds()
      const override;
  [[nodiscard]] double resolve(double z, double lambda) const override;
  [[nodiscard]] ScalarLawPtr inverse() const override;
  [[nodiscard]] bool monotone() const override;
  [[nodiscard]] std::string describe() const override;

  [[nodiscard]] const std::vector<double>& xs() const { return xs_; }
  [[nodiscard]] const std::vector<double>& ys() const { return ys_; }

 private:
  [[nodiscard]] double segment_slope(std::size_t seg) const;

  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// f + g on the intersection of domains.
class SumLaw final : public ScalarLaw {
 public:
  SumLaw(ScalarLawPtr a, ScalarLawPtr b);

  [[nodiscard]] double value(double x) const override;
  [[nodiscard]] double slope(double x) const override;
  [[nodiscard]] double domain_lo() const override;
  [[nodiscard]] double domain_hi() const override;
  [[nodiscard]] std::optional<std::pair<double, double>> slope_bounds()
      const override;
  [[nodiscard]] bool monotone() const override;
  [[nodiscard]] std::string describe() const override;

 private:
  ScalarLawPtr a_;
  ScalarLawPtr b_;
};

// ============================================================================
// Lifting a scalar law to trajectories
// ============================================================================

/// Samplewise application of a scalar law, minus an optional per-sample
/// shift: S(u)_k = f(u_k) - shift_k. Shifts keep incremental (drive-relative)
/// relations inside the pointwise class, so resolvents stay scalar.
class LiftedRelation final : public Relation {
 public:
  LiftedRelation(ScalarLawPtr law, Eigen::Index n);
  LiftedRelation(ScalarLawPtr law, Vector shift);

  [[nodiscard]] const ScalarLawPtr& law() const { return law_; }
  [[nodiscard]] const Vector& shift() const { return shift_; }

  [[nodiscard]] bool has_apply() const override { return true; }
  [[nodiscard]] bool has_resolvent() const override { return true; }
  [[nodiscard]] std::optional<double> coercivity_bound() const override;
  [[nodiscard]] std::optional<double> lipschitz_bound() const override;
  [[nodiscard]] bool monotone_by_construction() const override;
  void check_domain(const Vector& u) const override;
  [[nodiscard]] std::string describe() const override;

 protected:
  [[nodiscard]] Vector do_apply(const Vector& u) const override;
  [[nodiscard]] Vector do_resolvent(const Vector& z, double lambda) const override;

 private:
  ScalarLawPtr law_;
  Vector shift_;
};

[[nodiscard]] RelationPtr lift_pointwise(const ScalarLawPtr& law, Eigen::Index n);

// ============================================================================
// Scalar helpers (exposed for direct testing)
// ============================================================================

/// Diode forward drop at current i (throws DomainViolation for i <= -I_s).
[[nodiscard]] double diode_v_of_i(double i, double saturation_current,
                                  double ideality, double thermal_voltage);

/// Root x of x + lambda * diode_v_of_i(x) = z, solved in the voltage
/// substitution w = v / (n V_T):  I_s expm1(w) + lambda n V_T w = z.
[[nodiscard]] double diode_resolvent_scalar(double z, double lambda,
                                            double saturation_current,
                                            double ideality,
                                            double thermal_voltage);

// ============================================================================
// Element descriptions and their trajectory-space relations
// ============================================================================

struct ResistorSpec {
  double resistance = 1.0;
};
struct CapacitorSpec {
  double capacitance = 1.0;
};
struct InductorSpec {
  double inductance = 1.0;
};
struct DiodeSpec {
  double saturation_current = 1e-12;
  double ideality = 1.0;
  double thermal_voltage = 0.025852;
};
struct PiecewiseSpec {
  std::vector<double> xs;
  std::vector<double> ys;
};

using ElementSpec = std::variant<ResistorSpec, CapacitorSpec, InductorSpec,
                                 DiodeSpec, PiecewiseSpec>;

/// Throws ConstructionError on non-physical parameters (the piecewise law
/// only requires strictly increasing abscissae; negative slopes pass).
void validate_element(const ElementSpec& spec);

[[nodiscard]] std::string element_kind_name(const ElementSpec& spec);

/// Current-to-voltage relation of the element on n samples over one period.
[[nodiscard]] RelationPtr element_impedance(const ElementSpec& spec,
                                            Eigen::Index n, double period);

/// Voltage-to-current relation of the element on n samples over one period.
[[nodiscard]] RelationPtr element_admittance(const ElementSpec& spec,
                                             Eigen::Index n, double period);

}  // namespace monoport
