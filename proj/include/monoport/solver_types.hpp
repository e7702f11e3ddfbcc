#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monoport/affine.hpp"

namespace monoport {

enum class Algorithm { automatic, forward, douglas_rachford };

/// Which oriented relation poses the port problem. `matched` picks the
/// orientation whose input is the drive (current drive -> impedance form,
/// voltage drive -> admittance form).
enum class SolveForm { matched, impedance, admittance };

enum class DriveKind { current, voltage };

struct SolverConfig {
  Algorithm algorithm = Algorithm::automatic;
  /// Forward step size; defaults to m / L^2 from the relation's constants.
  std::optional<double> alpha;
  /// Resolvent parameter for splitting iterations.
  double lambda = 1.0;
  double tol = 1e-8;
  int max_iter = 10000;
  /// Starting iterate; zeros when absent.
  std::optional<Vector> initial_guess;
  SolveForm form = SolveForm::matched;
};

struct SolveReport {
  Vector solution;
  bool converged = false;
  int iterations = 0;
  /// One entry per iteration: the stopping-test residual at that step.
  std::vector<double> residual_history;
  /// Geometric-mean per-iteration residual ratio past the burn-in, when
  /// enough history exists.
  std::optional<double> empirical_contraction;
  /// Which path produced the solution: "direct", "evaluation",
  /// "forward-step", "douglas-rachford", "picard".
  std::string algorithm;
  std::vector<std::string> notes;
};

}  // namespace monoport
