#include "monoport/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "monoport/diagnostics.hpp"
#include "monoport/version.hpp"

namespace monoport {

namespace {

void write_trajectory_csv(std::ostream& os, const PortSolution& sol,
                          const std::vector<BranchRecord>* branches) {
  os << "t,i,v";
  if (branches != nullptr) {
    for (const BranchRecord& b : *branches) {
      os << ",i[" << b.path << "],v[" << b.path << "]";
    }
  }
  os << "\n";
  os << std::setprecision(17);
  const Eigen::Index n = sol.current.size();
  const double period = sol.current.period;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = period * static_cast<double>(k) / static_cast<double>(n);
    os << t << "," << sol.current.samples[k] << "," << sol.voltage.samples[k];
    if (branches != nullptr) {
      for (const BranchRecord& b : *branches) {
        os << "," << b.current[k] << "," << b.voltage[k];
      }
    }
    os << "\n";
  }
}

void write_convergence_log(std::ostream& os, const SolveReport& report) {
  os << std::setprecision(17);
  for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
    os << "iter=" << (k + 1) << " residual=" << report.residual_history[k]
       << "\n";
  }
}

void write_summary(std::ostream& os, const PortSolution& sol, int verbosity) {
  const SolveReport& r = sol.report;
  os << "algorithm=" << r.algorithm << " iterations=" << r.iterations
     << " converged=" << (r.converged ? "yes" : "no");
  if (!r.residual_history.empty()) {
    os << " residual=" << std::setprecision(6) << std::scientific
       << r.residual_history.back() << std::defaultfloat;
  }
  if (r.empirical_contraction) {
    os << " contraction=" << std::setprecision(6) << *r.empirical_contraction;
  }
  os << "\n";
  if (verbosity >= 2) {
    for (const std::string& note : sol.orientation.notes) {
      os << "orientation: " << note << "\n";
    }
    for (const std::string& note : r.notes) {
      os << "solver: " << note << "\n";
    }
  }
}

int solve_exit_code(const RunSpec& spec, const PortSolution& sol,
                    std::ostream& err) {
  if (sol.report.converged) {
    return kExitOk;
  }
  err << "solve did not converge within " << spec.solver.max_iter
      << " iterations";
  if (!sol.report.residual_history.empty()) {
    err << " (last residual " << std::setprecision(6) << std::scientific
        << sol.report.residual_history.back() << std::defaultfloat << ")";
  }
  err << "\n";
  if (spec.allow_partial) {
    err << "writing the partial trajectory (--allow-partial)\n";
    return kExitOk;
  }
  return kExitNonConvergence;
}

}  // namespace

int cmd_solve(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    const PeriodicSignal drive =
        sample_drive(spec.drive, spec.discretization.n_steps,
                     spec.discretization.period_seconds);
    DriveProblem problem;
    problem.network = spec.network;
    problem.drive = drive;
    problem.kind = spec.drive_kind;
    const PortSolution sol = solve_problem(problem, spec.solver);

    if (!spec.output.log_path.empty()) {
      std::ofstream log(spec.output.log_path);
      if (!log) {
        throw ConfigError("cannot write log file: " + spec.output.log_path);
      }
      write_convergence_log(log, sol.report);
    } else if (spec.output.verbosity >= 1) {
      write_convergence_log(err, sol.report);
    }
    if (spec.output.verbosity >= 1) {
      write_summary(err, sol, spec.output.verbosity);
    }

    std::optional<AuditReport> audit;
    if (spec.dump_branches || spec.output.verbosity >= 1) {
      try {
        audit = audit_solution(spec.network, sol.current, sol.voltage);
        if (spec.output.verbosity >= 1) {
          err << "audit: kvl=" << std::setprecision(6) << std::scientific
              << audit->kvl_residual << " kcl=" << audit->kcl_residual
              << " device=" << audit->device_residual << std::defaultfloat
              << "\n";
          if (spec.output.verbosity >= 2) {
            for (const std::string& note : audit->notes) {
              err << "audit: " << note << "\n";
            }
          }
        }
      } catch (const Error& e) {
        err << "audit unavailable: " << e.what() << "\n";
        audit.reset();
      }
    }
    const std::vector<BranchRecord>* branches =
        (spec.dump_branches && audit) ? &audit->branches : nullptr;

    if (!spec.output.csv_path.empty()) {
      std::ofstream csv(spec.output.csv_path);
      if (!csv) {
        throw ConfigError("cannot write CSV file: " + spec.output.csv_path);
      }
      write_trajectory_csv(csv, sol, branches);
    } else {
      write_trajectory_csv(out, sol, branches);
    }

    return solve_exit_code(spec, sol, err);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const DomainViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const Error& e) {
    // Configuration, construction, and argument problems are schema-level.
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  }
}

namespace {

struct CheckRow {
  std::string orientation;
  std::string property;
  std::string status;  // PASS / FAIL / SKIP
  std::string detail;
};

void print_check_table(std::ostream& out, const std::vector<CheckRow>& rows) {
  std::size_t w_orient = 11;
  std::size_t w_prop = 9;
  for (const CheckRow& r : rows) {
    w_orient = std::max(w_orient, r.orientation.size());
    w_prop = std::max(w_prop, r.property.size());
  }
  out << std::left << std::setw(static_cast<int>(w_orient) + 2) << "orientation"
      << std::setw(static_cast<int>(w_prop) + 2) << "property"
      << std::setw(6) << "state" << "detail\n";
  for (const CheckRow& r : rows) {
    out << std::left << std::setw(static_cast<int>(w_orient) + 2)
        << r.orientation << std::setw(static_cast<int>(w_prop) + 2)
        << r.property << std::setw(6) << r.status << r.detail << "\n";
  }
}

std::string property_detail(const PropertyReport& report) {
  std::ostringstream s;
  s << "trials=" << report.trials << " violations=" << report.violations
    << " worst_margin=" << std::setprecision(3) << std::scientific
    << report.worst_margin;
  for (const std::string& note : report.notes) {
    s << "; " << note;
  }
  return s.str();
}

}  // namespace

int cmd_check(const CheckSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    validate_network(spec.network);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  }

  SamplerConfig sampler;
  sampler.trials = spec.trials;
  if (spec.seed != 0) {
    sampler.seed = spec.seed;
  }

  std::vector<CheckRow> rows;
  bool any_violation = false;
  bool any_built = false;

  for (const bool impedance_form : {true, false}) {
    const std::string orientation = impedance_form ? "impedance" : "admittance";
    RelationPtr rel;
    try {
      rel = impedance_form
                ? impedance_relation(spec.network, spec.n_steps,
                                     spec.period_seconds)
                : admittance_relation(spec.network, spec.n_steps,
                                      spec.period_seconds);
    } catch (const Error& e) {
      rows.push_back({orientation, "construction", "SKIP", e.what()});
      continue;
    }
    any_built = true;
    if (spec.verbosity >= 1) {
      err << orientation << ": " << rel->describe() << "\n";
    }

    const bool iterative_map =
        dynamic_cast<const InverseRelation*>(rel.get()) != nullptr;
    if (iterative_map) {
      rows.push_back({orientation, "monotone", "SKIP",
                      "map is solved iteratively; its inverse orientation "
                      "carries the same property"});
    } else {
      try {
        const PropertyReport report = check_monotone(rel, sampler);
        const bool tested = report.trials > 0;
        rows.push_back({orientation, "monotone",
                        !tested ? "SKIP" : (report.passed ? "PASS" : "FAIL"),
                        property_detail(report)});
        any_violation = any_violation || report.violations > 0;
      } catch (const Error& e) {
        rows.push_back({orientation, "monotone", "SKIP", e.what()});
      }
    }

    if (!iterative_map && rel->has_resolvent()) {
      try {
        const PropertyReport report = check_resolvent(rel, 1.0, sampler);
        const bool tested = report.trials > 0;
        rows.push_back({orientation, "resolvent",
                        !tested ? "SKIP" : (report.passed ? "PASS" : "FAIL"),
                        property_detail(report)});
        any_violation = any_violation || report.violations > 0;
      } catch (const Error& e) {
        rows.push_back({orientation, "resolvent", "SKIP", e.what()});
      }
    } else {
      rows.push_back({orientation, "resolvent", "SKIP",
                      iterative_map ? "map is solved iteratively"
                                    : "no resolvent available for this "
                                      "composition"});
    }
  }

  print_check_table(out, rows);
  if (!any_built) {
    err << "error: neither orientation of the network could be built\n";
    return kExitSchema;
  }
  out << "result: " << (any_violation ? "FAIL" : "PASS") << "\n";
  return any_violation ? kExitViolations : kExitOk;
}

int cmd_version(std::ostream& out) {
  out << "monoport " << kVersion << " (schema " << kSchemaVersion << ")\n";
  return kExitOk;
}

int cmd_schema(std::ostream& out) {
  out << netlist_schema_document();
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{
      "monoport: periodic steady-state solver for one-port networks of "
      "monotone resistive elements and linear reactances"};
  app.require_subcommand(1);

  // --- solve ----------------------------------------------------------------
  auto* solve = app.add_subcommand(
      "solve", "Solve a runspec and write the port trajectories as CSV");
  std::string runspec_path;
  solve->add_option("runspec", runspec_path, "Runspec JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  std::optional<int> opt_n;
  solve->add_option("--n", opt_n, "Override the number of time steps")
      ->check(CLI::PositiveNumber);
  std::optional<double> opt_period;
  solve->add_option("--period", opt_period, "Override the period in seconds")
      ->check(CLI::PositiveNumber);
  std::optional<double> opt_tol;
  solve->add_option("--tol", opt_tol, "Override the stopping tolerance")
      ->check(CLI::PositiveNumber);
  std::optional<int> opt_max_iter;
  solve->add_option("--max-iter", opt_max_iter,
                    "Override the iteration budget")
      ->check(CLI::PositiveNumber);
  std::optional<double> opt_alpha;
  solve->add_option("--alpha", opt_alpha, "Forward step size")
      ->check(CLI::PositiveNumber);
  std::optional<double> opt_lambda;
  solve->add_option("--lambda", opt_lambda, "Resolvent parameter")
      ->check(CLI::PositiveNumber);
  std::optional<std::string> opt_algorithm;
  solve
      ->add_option("--algorithm", opt_algorithm,
                   "Iteration to use: forward, dr, or auto")
      ->check(CLI::IsMember({"forward", "dr", "auto"}));
  std::optional<std::string> opt_form;
  solve
      ->add_option("--form", opt_form,
                   "Orientation override: matched, impedance, or admittance")
      ->check(CLI::IsMember({"matched", "impedance", "admittance"}));
  std::optional<std::uint64_t> opt_seed;
  solve->add_option("--seed", opt_seed,
                    "Random seed (reserved; the solve itself is "
                    "deterministic)");
  int solve_verbose = 0;
  solve->add_flag("-v,--verbose", solve_verbose,
                  "Log convergence to stderr (repeat for more detail)");
  bool allow_partial = false;
  solve->add_flag("--allow-partial", allow_partial,
                  "Write the trajectory and exit 0 even without convergence");

  // --- check ----------------------------------------------------------------
  auto* check = app.add_subcommand(
      "check", "Probe both orientations of a netlist for monotonicity and "
               "resolvent consistency");
  std::string netlist_path;
  check->add_option("netlist", netlist_path, "Netlist JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  CheckSpec check_spec;
  check->add_option("--trials", check_spec.trials, "Probe pairs per property")
      ->check(CLI::PositiveNumber);
  check->add_option("--seed", check_spec.seed,
                    "Sampler seed (0 keeps the default)");
  check->add_option("--n", check_spec.n_steps, "Time steps for the test grid")
      ->check(CLI::PositiveNumber);
  check->add_option("--period", check_spec.period_seconds,
                    "Period in seconds for the test grid")
      ->check(CLI::PositiveNumber);
  check->add_flag("-v,--verbose", check_spec.verbosity,
                  "Describe the oriented relations on stderr");

  // --- version / schema -----------------------------------------------------
  auto* version = app.add_subcommand("version", "Print the version");
  auto* schema =
      app.add_subcommand("schema", "Print the netlist and runspec formats");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);  // --help and friends
    }
    app.exit(e, out, err);
    return kExitSchema;
  }

  if (version->parsed()) {
    return cmd_version(out);
  }
  if (schema->parsed()) {
    return cmd_schema(out);
  }
  if (check->parsed()) {
    try {
      check_spec.network = load_netlist_file(netlist_path);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitSchema;
    }
    return cmd_check(check_spec, out, err);
  }

  // solve
  RunSpec spec;
  try {
    spec = load_runspec_file(runspec_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitSchema;
  }
  if (opt_n) {
    spec.discretization.n_steps = *opt_n;
  }
  if (opt_period) {
    spec.discretization.period_seconds = *opt_period;
  }
  if (opt_tol) {
    spec.solver.tol = *opt_tol;
  }
  if (opt_max_iter) {
    spec.solver.max_iter = *opt_max_iter;
  }
  if (opt_alpha) {
    spec.solver.alpha = *opt_alpha;
  }
  if (opt_lambda) {
    spec.solver.lambda = *opt_lambda;
  }
  if (opt_algorithm) {
    if (*opt_algorithm == "forward") {
      spec.solver.algorithm = Algorithm::forward;
    } else if (*opt_algorithm == "dr") {
      spec.solver.algorithm = Algorithm::douglas_rachford;
    } else {
      spec.solver.algorithm = Algorithm::automatic;
    }
  }
  if (opt_form) {
    if (*opt_form == "impedance") {
      spec.solver.form = SolveForm::impedance;
    } else if (*opt_form == "admittance") {
      spec.solver.form = SolveForm::admittance;
    } else {
      spec.solver.form = SolveForm::matched;
    }
  }
  if (solve_verbose > 0) {
    spec.output.verbosity = std::max(spec.output.verbosity, solve_verbose);
  }
  if (allow_partial) {
    spec.allow_partial = true;
  }
  (void)opt_seed;  // reserved for future stochastic features
  return cmd_solve(spec, out, err);
}

}  // namespace monoport
