#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <sstream>
#include <string>

#include "monoport/cli.hpp"
#include "monoport/elements.hpp"
#include "monoport/errors.hpp"
#include "monoport/netlist.hpp"
#include "monoport/network.hpp"
#include "monoport/problem.hpp"
#include "monoport/signal.hpp"
#include "monoport/version.hpp"

namespace py = pybind11;

namespace {

using namespace monoport;

py::dict report_to_dict(const SolveReport& report) {
  py::dict d;
  d["converged"] = report.converged;
  d["iterations"] = report.iterations;
  d["algorithm"] = report.algorithm;
  d["residuals"] = report.residual_history;
  if (report.empirical_contraction) {
    d["empirical_contraction"] = *report.empirical_contraction;
  }
  d["notes"] = report.notes;
  return d;
}

py::dict solve_runspec(const std::string& runspec_json,
                       const std::string& base_dir) {
  const RunSpec spec = parse_runspec(runspec_json, base_dir);
  const PeriodicSignal drive =
      sample_drive(spec.drive, spec.discretization.n_steps,
                   spec.discretization.period_seconds);
  DriveProblem problem;
  problem.network = spec.network;
  problem.drive = drive;
  problem.kind = spec.drive_kind;
  const PortSolution sol = solve_problem(problem, spec.solver);

  const Eigen::Index n = sol.current.size();
  Vector t(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    t[k] = sol.current.period * static_cast<double>(k) /
           static_cast<double>(n);
  }
  py::dict d = report_to_dict(sol.report);
  d["t"] = t;
  d["current"] = sol.current.samples;
  d["voltage"] = sol.voltage.samples;
  d["period"] = sol.current.period;
  d["orientation_notes"] = sol.orientation.notes;
  return d;
}

py::dict audit_trajectories(const std::string& netlist_json, const Vector& i,
                            const Vector& v, double period) {
  const OnePort net = parse_netlist(netlist_json);
  const AuditReport report = audit_solution(net, PeriodicSignal{i, period},
                                            PeriodicSignal{v, period});
  py::dict d;
  d["kvl_residual"] = report.kvl_residual;
  d["kcl_residual"] = report.kcl_residual;
  d["device_residual"] = report.device_residual;
  d["worst"] = report.worst();
  d["notes"] = report.notes;
  py::list branches;
  for (const BranchRecord& b : report.branches) {
    py::dict row;
    row["path"] = b.path;
    row["kind"] = b.kind;
    row["current"] = b.current;
    row["voltage"] = b.voltage;
    row["device_residual"] = b.device_residual;
    branches.append(row);
  }
  d["branches"] = branches;
  return d;
}

py::dict check_netlist(const std::string& netlist_json, int trials,
                       std::uint64_t seed, int n_steps, double period) {
  CheckSpec spec;
  spec.network = parse_netlist(netlist_json);
  spec.trials = trials;
  spec.seed = seed;
  spec.n_steps = n_steps;
  spec.period_seconds = period;
  std::ostringstream out;
  std::ostringstream err;
  const int code = cmd_check(spec, out, err);
  py::dict d;
  d["exit_code"] = code;
  d["passed"] = code == kExitOk;
  d["table"] = out.str();
  d["messages"] = err.str();
  return d;
}

Vector cyclic_derivative(const Vector& u, double period) {
  DerivativeOperator d = make_derivative(static_cast<int>(u.size()), period);
  return d.apply(u);
}

Vector cyclic_integral(const Vector& u, double period) {
  IntegralOperator j = make_integral(static_cast<int>(u.size()), period);
  return j.apply(u);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Periodic steady-state solver for one-port networks of monotone "
      "resistive elements and linear reactances";
  m.attr("__version__") = kVersion;
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  // Most-derived exceptions must be registered last so their translators run
  // first (translators execute in reverse registration order).
  static py::exception<Error> exc_base(m, "MonoportError");
  py::register_exception<ArgumentError>(m, "ArgumentError", exc_base);
  py::register_exception<ConfigError>(m, "ConfigError", exc_base);
  py::register_exception<ConstructionError>(m, "ConstructionError", exc_base);
  py::register_exception<DomainViolation>(m, "DomainViolation", exc_base);
  static py::exception<NumericalError> exc_numerical(m, "NumericalError",
                                                     exc_base);
  py::register_exception<DivergenceError>(m, "DivergenceError", exc_numerical);

  m.def("schema_text", &netlist_schema_document,
        "The netlist and runspec document formats as plain text.");
  m.def("normalize_netlist",
        [](const std::string& text) {
          return serialize_netlist(parse_netlist(text));
        },
        py::arg("netlist_json"),
        "Parses a netlist document and returns its canonical serialization.");
  m.def("validate_netlist",
        [](const std::string& text) {
          validate_network(parse_netlist(text));
        },
        py::arg("netlist_json"),
        "Raises if the document is malformed or the network is invalid.");
  m.def("solve", &solve_runspec, py::arg("runspec_json"),
        py::arg("base_dir") = std::string("."),
        "Solves a runspec document; returns t, current, voltage and the "
        "convergence report as a dict of arrays and scalars.");
  m.def("check", &check_netlist, py::arg("netlist_json"),
        py::arg("trials") = 200, py::arg("seed") = std::uint64_t{0},
        py::arg("n_steps") = 64, py::arg("period") = 1.0,
        "Runs the monotonicity and resolvent probes on both orientations; "
        "returns the rendered table and pass flag.");
  m.def("audit", &audit_trajectories, py::arg("netlist_json"),
        py::arg("current"), py::arg("voltage"), py::arg("period") = 1.0,
        "Checks a solved trajectory pair against the network's loop, node, "
        "and device laws; returns the residuals and per-branch records.");
  m.def("derivative", &cyclic_derivative, py::arg("samples"),
        py::arg("period") = 1.0,
        "Cyclic backward-difference derivative of a sampled period.");
  m.def("integral", &cyclic_integral, py::arg("samples"),
        py::arg("period") = 1.0,
        "Zero-offset running integral of a zero-mean sampled period.");
  m.def("diode_resolvent", &diode_resolvent_scalar, py::arg("z"),
        py::arg("lam"), py::arg("saturation_current") = 1e-12,
        py::arg("ideality") = 1.0, py::arg("thermal_voltage") = 0.025852,
        "Root x of x + lam * v_diode(x) = z (scalar resolvent of the "
        "logarithmic diode law).");
}
