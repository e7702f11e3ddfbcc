#include <cmath>

#include "doctest.h"
#include "monoport/network.hpp"
#include "monoport/solvers.hpp"

using namespace monoport;

TEST_CASE("picard iteration on a contraction") {
  // x <- 0.5 x + 1 has the fixed point 2.
  const auto map = [](const Vector& x) -> Vector {
    return 0.5 * x + Vector::Ones(x.size());
  };
  const SolveReport report = picard(map, Vector::Zero(3), 1e-12, 200);
  CHECK(report.converged);
  CHECK((report.solution - 2.0 * Vector::Ones(3)).norm() < 1e-10);
  CHECK(report.algorithm == "picard");
  CHECK(report.iterations == static_cast<int>(report.residual_history.size()));
}

TEST_CASE("picard detects an expanding map") {
  const auto map = [](const Vector& x) -> Vector {
    return 1.3 * x + Vector::Ones(x.size());
  };
  CHECK_THROWS_AS((void)picard(map, Vector::Zero(2), 1e-10, 5000),
                  DivergenceError);
}

TEST_CASE("forward step solves a well-conditioned affine inclusion") {
  Matrix a(2, 2);
  a << 2.0, 0.5, -0.5, 3.0;
  Vector y_star(2);
  y_star << 1.0, -2.0;
  const RelationPtr delta =
      shift_output(make_affine_relation(AffineOperator(a)), y_star);

  SolverConfig config;
  config.algorithm = Algorithm::forward;
  config.tol = 1e-10;
  config.max_iter = 5000;
  const SolveReport report = forward_step(delta, config);
  CHECK(report.converged);
  CHECK(report.algorithm == "forward-step");
  CHECK((a * report.solution - y_star).norm() < 1e-8);
  // The automatic step size note mentions the constants it used.
  bool mentions_alpha = false;
  for (const std::string& note : report.notes) {
    mentions_alpha = mentions_alpha || note.find("alpha") != std::string::npos;
  }
  CHECK(mentions_alpha);
}

TEST_CASE("forward step at an oversized step diverges loudly") {
  // Rotation-dominated monotone operator: m = 1, L = 10. At alpha = 4 m / L^2
  // the iteration spirals outward at ~3.9% per step.
  Matrix a(2, 2);
  const double s = std::sqrt(99.0);
  a << 1.0, -s, s, 1.0;
  Vector y_star(2);
  y_star << 1.0, 0.0;
  const RelationPtr delta =
      shift_output(make_affine_relation(AffineOperator(a)), y_star);

  SolverConfig config;
  config.algorithm = Algorithm::forward;
  config.alpha = 4.0 * 1.0 / 100.0;
  config.tol = 1e-10;
  config.max_iter = 5000;
  try {
    (void)forward_step(delta, config);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() > 10);    // the grace window must have passed
    CHECK(e.iteration() < 1000);  // and it fires long before the budget
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("forward step without usable constants demands an explicit step") {
  // The diode's slope is unbounded near the domain edge, so no Lipschitz
  // constant exists and the automatic step size cannot be formed.
  const RelationPtr lift = lift_pointwise(
      std::make_shared<ShockleyDiodeLaw>(1e-14, 1.0, 0.02585), 8);
  CHECK_FALSE(lift->lipschitz_bound().has_value());
  SolverConfig config;
  config.algorithm = Algorithm::forward;
  CHECK_THROWS_AS((void)forward_step(lift, config), ConfigError);
}

TEST_CASE("douglas-rachford splits an affine pair") {
  Matrix a1(3, 3), a2(3, 3);
  a1 << 2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 3.0;
  a2 << 1.0, 0.5, 0.0, -0.5, 2.0, 0.0, 0.0, 0.0, 1.0;
  Vector y_star(3);
  y_star << 3.0, -1.0, 2.0;

  // 0 in (A1 - y*) + A2 at the solution of (A1 + A2) x = y*.
  const RelationPtr s1 =
      shift_output(make_affine_relation(AffineOperator(a1)), y_star);
  const RelationPtr s2 = make_affine_relation(AffineOperator(a2));

  SolverConfig config;
  config.lambda = 1.0;
  config.tol = 1e-12;
  config.max_iter = 20000;
  const SolveReport report = douglas_rachford(s1, s2, config);
  CHECK(report.converged);
  CHECK(report.algorithm == "douglas-rachford");
  const Vector expected = (a1 + a2).partialPivLu().solve(y_star);
  CHECK((report.solution - expected).norm() < 1e-8);
}

TEST_CASE("douglas-rachford against the zero relation is proximal-point") {
  Matrix a(2, 2);
  a << 4.0, 0.0, 0.0, 4.0;
  Vector y_star(2);
  y_star << 8.0, 4.0;
  const RelationPtr s1 =
      shift_output(make_affine_relation(AffineOperator(a)), y_star);
  SolverConfig config;
  config.lambda = 0.5;
  config.tol = 1e-12;
  const SolveReport report =
      douglas_rachford(s1, make_zero_relation(2), config);
  CHECK(report.converged);
  CHECK((a * report.solution - y_star).norm() < 1e-9);
}

TEST_CASE("solve_zero dispatch: affine goes direct") {
  Matrix a(4, 4);
  a.setIdentity();
  a *= 2.0;
  Vector y_star(4);
  y_star << 2.0, 4.0, 6.0, 8.0;
  const RelationPtr delta =
      shift_output(make_affine_relation(AffineOperator(a)), y_star);
  SolverConfig config;  // automatic
  const SolveReport report = solve_zero(delta, config);
  CHECK(report.converged);
  CHECK(report.algorithm == "direct");
  CHECK((report.solution - y_star / 2.0).norm() < 1e-12);
}

TEST_CASE("solve_zero dispatch: splittable sum runs douglas-rachford") {
  const int n = 16;
  const RelationPtr lift = lift_pointwise(
      std::make_shared<ShockleyDiodeLaw>(1e-14, 1.0, 0.02585), n);
  const RelationPtr rc = make_affine_relation(
      AffineOperator(Matrix::Identity(n, n) * 2.0));
  Vector v_star = Vector::LinSpaced(n, 0.1, 0.9);
  const RelationPtr delta = shift_output(add(lift, rc), v_star);

  SolverConfig config;
  config.tol = 1e-11;
  config.max_iter = 50000;
  const SolveReport report = solve_zero(delta, config);
  CHECK(report.converged);
  CHECK(report.algorithm == "douglas-rachford");
  // Verify the inclusion directly.
  const Vector residual = lift->apply(report.solution) +
                          rc->apply(report.solution) - v_star;
  CHECK(residual.norm() < 1e-8);
}

TEST_CASE("solve_zero reports non-convergence without throwing") {
  // The dimensional RC admittance is stiff: the certified forward step is
  // ~1e-6, so a tiny budget cannot converge. The report must say so honestly.
  Matrix a = Matrix::Identity(8, 8);
  a *= 1000.0;
  a(0, 0) = 1.0;
  const RelationPtr delta = shift_output(
      make_affine_relation(AffineOperator(a)), Vector::Ones(8));
  SolverConfig config;
  config.algorithm = Algorithm::forward;
  config.tol = 1e-10;
  config.max_iter = 50;
  const SolveReport report = solve_zero(delta, config);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations == 50);
  CHECK(report.residual_history.size() >= 50);
}

TEST_CASE("residual history starts at the initial residual") {
  Matrix a(2, 2);
  a.setIdentity();
  Vector y_star(2);
  y_star << 1.0, 1.0;
  const RelationPtr delta =
      shift_output(make_affine_relation(AffineOperator(a)), y_star);
  SolverConfig config;
  config.algorithm = Algorithm::forward;
  config.tol = 1e-10;
  const SolveReport report = forward_step(delta, config);
  REQUIRE(!report.residual_history.empty());
  // x0 = 0, so the first recorded residual is ||y*||.
  CHECK(report.residual_history.front() ==
        doctest::Approx(y_star.norm()).epsilon(1e-12));
}

TEST_CASE("guarded newton finds bracketed roots") {
  const auto sqrt2 = guarded_newton(
      [](double x) { return std::make_pair(x * x - 2.0, 2.0 * x); }, 0.0, 2.0,
      1e-14);
  CHECK(sqrt2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // A flat stretch forces bisection fallbacks but must not break bracketing.
  const auto root = guarded_newton(
      [](double x) {
        const double h = (x < 0.5) ? -1.0 + 1e-3 * x : (x - 0.5) * 50.0 - 0.9995;
        const double hp = (x < 0.5) ? 1e-3 : 50.0;
        return std::make_pair(h, hp);
      },
      0.0, 1.0, 1e-12);
  CHECK(std::isfinite(root));
  CHECK(root > 0.5);

  CHECK_THROWS_AS((void)guarded_newton(
                      [](double x) { return std::make_pair(x, 1.0); }, 1.0,
                      2.0, 1e-12),
                  ArgumentError);  // no sign change on the bracket
}

TEST_CASE("empirical contraction tracks a known linear rate") {
  // Forward step on (I - alpha A) with A = 2 I and alpha = 0.25 contracts
  // the residual by exactly 0.5 per iteration.
  Matrix a = Matrix::Identity(3, 3) * 2.0;
  const RelationPtr delta = shift_output(
      make_affine_relation(AffineOperator(a)), Vector::Ones(3));
  SolverConfig config;
  config.algorithm = Algorithm::forward;
  config.alpha = 0.25;
  config.tol = 1e-12;
  const SolveReport report = forward_step(delta, config);
  CHECK(report.converged);
  REQUIRE(report.empirical_contraction.has_value());
  CHECK(*report.empirical_contraction == doctest::Approx(0.5).epsilon(1e-6));
}
