#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "monoport/elements.hpp"

using namespace monoport;

TEST_CASE("linear resistor law") {
  LinearResistorLaw law(2.5);
  CHECK(law.value(2.0) == doctest::Approx(5.0));
  CHECK(law.slope(123.0) == doctest::Approx(2.5));
  CHECK(law.monotone());
  CHECK(law.resolve(7.0, 2.0) == doctest::Approx(7.0 / 6.0));

  const ScalarLawPtr inv = law.inverse();
  CHECK(inv->value(5.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)LinearResistorLaw(0.0).inverse(), ConstructionError);
}

TEST_CASE("negative resistance is representable but flagged non-monotone") {
  LinearResistorLaw law(-0.5);
  CHECK_FALSE(law.monotone());
  CHECK(law.value(2.0) == doctest::Approx(-1.0));
  // The resolvent exists while 1 + lambda R > 0 and fails beyond.
  CHECK(law.resolve(1.0, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS((void)law.resolve(1.0, 4.0), NumericalError);
}

TEST_CASE("diode law: value, domain, inverse pair") {
  const double is = 1e-14, nid = 1.0, vt = 0.02585;
  ShockleyDiodeLaw law(is, nid, vt);
  CHECK(law.value(0.0) == doctest::Approx(0.0));
  CHECK(law.domain_lo() == doctest::Approx(-is));
  CHECK(law.monotone());
  CHECK_FALSE(law.slope_bounds().has_value());  // slope blows up at the edge

  // value is the log form; the inverse is the exact expm1 conductance.
  const double i = 2.3e-3;
  const double v = law.value(i);
  CHECK(v == doctest::Approx(nid * vt * std::log1p(i / is)));
  const ScalarLawPtr inv = law.inverse();
  CHECK(inv->value(v) == doctest::Approx(i).epsilon(1e-12));
  CHECK(inv->monotone());
}

TEST_CASE("diode resolvent solves its defining equation at all scales") {
  const double is = 1e-14, nid = 1.0, vt = 0.02585;
  ShockleyDiodeLaw law(is, nid, vt);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> zdist(-12.0, 12.0);
  std::uniform_real_distribution<double> ldist(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double z = zdist(rng);
    const double lambda = std::pow(10.0, ldist(rng));
    const double x = law.resolve(z, lambda);
    CHECK(std::isfinite(x));
    // Closed bound: deep reverse drives round the strictly interior
    // solution onto the saturation limit at double precision.
    CHECK(x >= -is);
    // Defining equation x + lambda v(x) = z, read in the current direction:
    // the balanced voltage is v = (z - x) / lambda, and the law must return
    // x at that voltage. The exponential side is entire and well
    // conditioned, unlike log1p against the domain edge.
    const double w = (z - x) / (lambda * nid * vt);
    const double res = is * std::expm1(w) - x;
    // The substituted equation is solved to 1e-12 (1 + |z|); reading the
    // voltage back off the equation divides that residual by lambda n VT
    // and the exponential multiplies it by the local current scale.
    const double bound =
        1e-12 * (1.0 + std::abs(z)) *
            (1.0 + (std::abs(x) + is) / (lambda * nid * vt)) +
        1e-12 * (1.0 + std::abs(x));
    CHECK(std::abs(res) <= bound);
  }

  // Hard-off drive: the current shrinks toward -I_s (hitting it exactly at
  // double resolution) and the resolvent stays finite.
  const double deep = diode_resolvent_scalar(-11.0, 10.0, is, nid, vt);
  CHECK(std::isfinite(deep));
  CHECK(deep >= -is);
  CHECK(deep < 0.0);
}

TEST_CASE("diode conductance law resolves through expm1") {
  DiodeConductanceLaw law(1e-14, 1.0, 0.02585);
  // x + lambda Is expm1(x / (n VT)) = z.
  for (double z : {-0.3, 0.0, 0.45, 0.9}) {
    const double x = law.resolve(z, 2.0);
    const double res = x + 2.0 * law.value(x) - z;
    CHECK(std::abs(res) <= 1e-10 * (1.0 + std::abs(z)));
  }
}

TEST_CASE("piecewise linear law interpolates and extrapolates") {
  PiecewiseLinearLaw law({-1.0, 0.0, 2.0}, {-2.0, 0.0, 1.0});
  CHECK(law.value(-0.5) == doctest::Approx(-1.0));
  CHECK(law.value(1.0) == doctest::Approx(0.5));
  CHECK(law.value(4.0) == doctest::Approx(2.0));   // end-segment extrapolation
  CHECK(law.value(-2.0) == doctest::Approx(-4.0));
  CHECK(law.monotone());
  const auto bounds = law.slope_bounds();
  REQUIRE(bounds.has_value());
  CHECK(bounds->first == doctest::Approx(0.5));
  CHECK(bounds->second == doctest::Approx(2.0));

  // Resolve across breakpoints.
  for (double z : {-3.0, -0.2, 0.7, 5.0}) {
    const double x = law.resolve(z, 1.5);
    CHECK(std::abs(x + 1.5 * law.value(x) - z) < 1e-10);
  }
}

TEST_CASE("non-monotone piecewise law is constructible and reports itself") {
  PiecewiseLinearLaw ncurve({-2.0, -1.0, 1.0, 2.0}, {-1.0, 1.0, -1.0, 1.0});
  CHECK_FALSE(ncurve.monotone());
  CHECK_THROWS_AS((void)ncurve.inverse(), ConstructionError);
  CHECK_THROWS_AS(PiecewiseLinearLaw({0.0, 0.0}, {0.0, 1.0}),
                  ConstructionError);
}

TEST_CASE("element validation") {
  CHECK_NOTHROW(validate_element(ResistorSpec{1.0}));
  CHECK_NOTHROW(validate_element(ResistorSpec{-2.0}));  // flagged later, not here
  CHECK_THROWS_AS(validate_element(CapacitorSpec{0.0}), ConstructionError);
  CHECK_THROWS_AS(validate_element(InductorSpec{-1.0}), ConstructionError);
  CHECK_THROWS_AS(validate_element(DiodeSpec{-1e-14, 1.0, 0.025}),
                  ConstructionError);
  CHECK_THROWS_AS(validate_element(PiecewiseSpec{{0.0}, {0.0}}),
                  ConstructionError);
}

TEST_CASE("element relations have the expected structure") {
  const int n = 16;
  const double period = 1.0;

  // Resistor: scaled identity both ways.
  const RelationPtr rz = element_impedance(ResistorSpec{3.0}, n, period);
  CHECK(dynamic_cast<const AffineRelation*>(rz.get()) != nullptr);
  CHECK((rz->apply(Vector::Ones(n)) - 3.0 * Vector::Ones(n)).norm() < 1e-14);
  CHECK_THROWS_AS((void)element_admittance(ResistorSpec{0.0}, n, period),
                  ConstructionError);

  // Capacitor: admittance is the scaled cyclic derivative (total), impedance
  // the scaled running integral restricted to zero-mean currents.
  const RelationPtr cy = element_admittance(CapacitorSpec{2.0}, n, period);
  CHECK(dynamic_cast<const AffineRelation*>(cy.get()) != nullptr);
  CHECK_FALSE(cy->zero_mean_domain());
  const RelationPtr cz = element_impedance(CapacitorSpec{2.0}, n, period);
  CHECK(cz->zero_mean_domain());
  CHECK_THROWS_AS((void)cz->apply(Vector::Ones(n)), DomainViolation);

  // Inductor: the dual pairing.
  CHECK_FALSE(element_impedance(InductorSpec{0.5}, n, period)->zero_mean_domain());
  CHECK(element_admittance(InductorSpec{0.5}, n, period)->zero_mean_domain());

  // Diode: pointwise lift with full capabilities.
  const RelationPtr dz = element_impedance(DiodeSpec{}, n, period);
  CHECK(dz->has_apply());
  CHECK(dz->has_resolvent());
  CHECK(dz->monotone_by_construction());
}

TEST_CASE("lifted relation applies the scalar law samplewise minus a shift") {
  const auto law = std::make_shared<LinearResistorLaw>(2.0);
  Vector shift(3);
  shift << 1.0, 0.0, -1.0;
  const LiftedRelation lifted(law, shift);
  Vector u(3);
  u << 1.0, 2.0, 3.0;
  const Vector y = lifted.apply(u);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(4.0));
  CHECK(y[2] == doctest::Approx(7.0));

  // Resolvent folds the shift into the argument samplewise:
  // x_k + lambda (f(x_k) - shift_k) = z_k.
  Vector z(3);
  z << 0.5, -1.0, 2.0;
  const double lambda = 0.7;
  const Vector x = lifted.resolvent(z, lambda);
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(x[k] + lambda * (law->value(x[k]) - shift[k]) - z[k]) <
          1e-12);
  }
}

TEST_CASE("sum of uniform lifts collapses to a lift of the summed law") {
  const int n = 8;
  const RelationPtr a = lift_pointwise(std::make_shared<LinearResistorLaw>(1.0), n);
  const RelationPtr b = element_impedance(DiodeSpec{}, n, 1.0);
  const RelationPtr sum = add(a, b);
  // The collapsed sum keeps the samplewise resolvent available.
  CHECK(sum->has_resolvent());
  const Vector z = Vector::LinSpaced(n, -1.0, 2.0);
  const double lambda = 0.5;
  const Vector x = sum->resolvent(z, lambda);
  // Negative drives pin the current onto the saturation limit (the exact
  // solution is within one ulp of it), where the log side of the diode law
  // cannot be evaluated; verify x + lambda (R x + v_d(x)) = z by reading
  // the balanced diode voltage off the equation and checking membership in
  // the diode graph through the entire exponential side.
  const DiodeSpec d{};
  for (int k = 0; k < n; ++k) {
    CHECK(x[k] >= -d.saturation_current);
    const double vd = (z[k] - x[k]) / lambda - 1.0 * x[k];
    const double res =
        d.saturation_current *
            std::expm1(vd / (d.ideality * d.thermal_voltage)) -
        x[k];
    CHECK(std::abs(res) <= 1e-9 * (1.0 + std::abs(x[k])));
  }
}

TEST_CASE("diode admittance handles the full drive range") {
  const int n = 8;
  const RelationPtr gy = element_admittance(DiodeSpec{}, n, 1.0);
  Vector v(n);
  v << -5.0, -1.0, -0.1, 0.0, 0.1, 0.3, 0.5, 0.9;
  const Vector i = gy->apply(v);
  CHECK(i[0] == doctest::Approx(-1e-14).epsilon(1e-6));  // hard off: -Is floor
  CHECK(i[3] == doctest::Approx(0.0));
  CHECK(i[7] > 1.0);  // strongly conducting
}
