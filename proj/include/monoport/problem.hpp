#pragma once

#include "monoport/network.hpp"
#include "monoport/solvers.hpp"

namespace monoport {

/// A periodic drive applied to a one-port: a current source (solve for the
/// port voltage) or a voltage source (solve for the port current).
struct DriveProblem {
  OnePort network;
  PeriodicSignal drive;
  DriveKind kind = DriveKind::current;
};

/// Full port solution: both trajectories plus the solve telemetry.
struct PortSolution {
  PeriodicSignal current;
  PeriodicSignal voltage;
  SolveReport report;
  OrientationReport orientation;
};

/// Poses the drive against the oriented relation chosen by config.form and
/// solves for the complementary port variable. When the drive is the
/// relation's input the response is a direct evaluation; when it is the
/// output the solve is a zero-inclusion handled by solve_zero. Inversion
/// wrappers at the top level are unwrapped so the iteration (and its report)
/// runs on the structured relation underneath.
[[nodiscard]] PortSolution solve_problem(const DriveProblem& problem,
                                         const SolverConfig& config = {});

}  // namespace monoport
