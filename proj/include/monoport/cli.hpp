#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "monoport/netlist.hpp"

namespace monoport {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolations = 1,     // property checks found counterexamples
  kExitSchema = 2,         // schema / validation / construction / usage error
  kExitNonConvergence = 3, // iteration budget exhausted or divergence
  kExitDomain = 4,         // drive outside the network's domain
};

struct CheckSpec {
  OnePort network;
  int trials = 200;
  std::uint64_t seed = 0;  // 0: keep the sampler default
  int n_steps = 64;
  double period_seconds = 1.0;
  int verbosity = 0;
};

/// Solves the runspec's drive problem, writes the CSV (header `t,i,v`, one
/// row per sample) and the convergence log. Returns an ExitCode.
int cmd_solve(const RunSpec& spec, std::ostream& out, std::ostream& err);

/// Runs the property suites on both orientations of the netlist and prints a
/// table (one row per property per orientation).
int cmd_check(const CheckSpec& spec, std::ostream& out, std::ostream& err);

int cmd_version(std::ostream& out);
int cmd_schema(std::ostream& out);

/// Full argv-level entry point used by the binary's main().
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace monoport
