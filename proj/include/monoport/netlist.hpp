#pragma once

#include <string>

#include "monoport/network.hpp"
#include "monoport/problem.hpp"

namespace monoport {

/// Parses a JSON netlist document:
///   {"schema_version": 1, "root": {"type": "series" | "parallel" | "element",
///    "children": [...], "kind": "...", ...parameters}}
/// Throws ConfigError with a node-path context on any schema violation.
[[nodiscard]] OnePort parse_netlist(const std::string& text);

[[nodiscard]] OnePort load_netlist_file(const std::string& path);

/// Serializes the tree back to the document form. Numbers use the shortest
/// representation that round-trips, so parse(serialize(x)) reproduces x
/// exactly.
[[nodiscard]] std::string serialize_netlist(const OnePort& network);

/// Human-readable schema document printed by the schema subcommand.
[[nodiscard]] std::string netlist_schema_document();

struct DiscretizationSpec {
  int n_steps = 500;
  double period_seconds = 1.0;
};

struct OutputSpec {
  std::string csv_path;  // empty: write CSV to stdout
  std::string log_path;  // empty: log to stderr when verbose
  int verbosity = 0;
};

/// Everything needed to reproduce one solve.
struct RunSpec {
  OnePort network;
  DriveKind drive_kind = DriveKind::current;
  DriveSpec drive;
  DiscretizationSpec discretization;
  SolverConfig solver;
  OutputSpec output;
  bool allow_partial = false;
  bool dump_branches = false;
};

/// Parses a JSON runspec. The netlist is given inline under "netlist" or by
/// "netlist_path" resolved against base_dir.
[[nodiscard]] RunSpec parse_runspec(const std::string& text,
                                    const std::string& base_dir = ".");

[[nodiscard]] RunSpec load_runspec_file(const std::string& path);

}  // namespace monoport
