#include "monoport/netlist.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "monoport/version.hpp"

namespace monoport {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

const json& member(const json& obj, const std::string& where,
                   const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(where, "missing required key \"" + key + "\"");
  }
  return *it;
}

double number_at(const json& obj, const std::string& where,
                 const std::string& key) {
  const json& v = member(obj, where, key);
  if (!v.is_number()) {
    fail(where, "key \"" + key + "\" must be a number");
  }
  return v.get<double>();
}

double number_or(const json& obj, const std::string& where,
                 const std::string& key, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    return fallback;
  }
  if (!it->is_number()) {
    fail(where, "key \"" + key + "\" must be a number");
  }
  return it->get<double>();
}

void require_object(const json& obj, const std::string& where) {
  if (!obj.is_object()) {
    fail(where, "expected a JSON object");
  }
}

/// Rejects keys outside the allowed set so typos surface as errors instead
/// of silently-ignored parameters.
void restrict_keys(const json& obj, const std::string& where,
                   std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      fail(where, "unknown key \"" + it.key() + "\"");
    }
  }
}

ElementSpec parse_element(const json& node, const std::string& where) {
  const json& kind_value = member(node, where, "kind");
  if (!kind_value.is_string()) {
    fail(where, "key \"kind\" must be a string");
  }
  const std::string kind = kind_value.get<std::string>();
  if (kind == "resistor") {
    restrict_keys(node, where, {"type", "kind", "resistance"});
    ResistorSpec s;
    s.resistance = number_at(node, where, "resistance");
    return s;
  }
  if (kind == "capacitor") {
    restrict_keys(node, where, {"type", "kind", "capacitance"});
    CapacitorSpec s;
    s.capacitance = number_at(node, where, "capacitance");
    return s;
  }
  if (kind == "inductor") {
    restrict_keys(node, where, {"type", "kind", "inductance"});
    InductorSpec s;
    s.inductance = number_at(node, where, "inductance");
    return s;
  }
  if (kind == "diode") {
    restrict_keys(node, where,
                  {"type", "kind", "saturation_current", "ideality",
                   "thermal_voltage"});
    DiodeSpec s;
    s.saturation_current =
        number_or(node, where, "saturation_current", s.saturation_current);
    s.ideality = number_or(node, where, "ideality", s.ideality);
    s.thermal_voltage =
        number_or(node, where, "thermal_voltage", s.thermal_voltage);
    return s;
  }
  if (kind == "piecewise") {
    restrict_keys(node, where, {"type", "kind", "points"});
    const json& points = member(node, where, "points");
    if (!points.is_array() || points.size() < 2) {
      fail(where, "key \"points\" must be an array of at least 2 [x, y] pairs");
    }
    PiecewiseSpec s;
    for (std::size_t k = 0; k < points.size(); ++k) {
      const json& p = points[k];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() ||
          !p[1].is_number()) {
        fail(where, "points[" + std::to_string(k) +
                        "] must be a [x, y] pair of numbers");
      }
      s.xs.push_back(p[0].get<double>());
      s.ys.push_back(p[1].get<double>());
    }
    return s;
  }
  fail(where, "unknown element kind \"" + kind +
                  "\" (expected resistor, capacitor, inductor, diode, or "
                  "piecewise)");
}

OnePort parse_node(const json& node, const std::string& where) {
  require_object(node, where);
  const json& type_value = member(node, where, "type");
  if (!type_value.is_string()) {
    fail(where, "key \"type\" must be a string");
  }
  const std::string type = type_value.get<std::string>();
  if (type == "element") {
    return OnePort::make_element(parse_element(node, where));
  }
  if (type != "series" && type != "parallel") {
    fail(where, "unknown node type \"" + type +
                    "\" (expected element, series, or parallel)");
  }
  restrict_keys(node, where, {"type", "children"});
  const json& children = member(node, where, "children");
  if (!children.is_array() || children.size() < 2) {
    fail(where, "key \"children\" must be an array of at least 2 nodes");
  }
  std::vector<OnePort> parsed;
  parsed.reserve(children.size());
  for (std::size_t k = 0; k < children.size(); ++k) {
    parsed.push_back(
        parse_node(children[k], where + ".children[" + std::to_string(k) + "]"));
  }
  return type == "series" ? OnePort::make_series(std::move(parsed))
                          : OnePort::make_parallel(std::move(parsed));
}

json parse_document(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": invalid JSON: " + e.what());
  }
}

void check_schema_version(const json& doc, const std::string& where) {
  auto it = doc.find("schema_version");
  if (it == doc.end()) {
    return;  // optional; absent means current
  }
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
    std::ostringstream msg;
    msg << "schema_version must be the integer " << kSchemaVersion;
    fail(where, msg.str());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot read file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json element_to_json(const ElementSpec& spec) {
  json node;
  node["type"] = "element";
  node["kind"] = element_kind_name(spec);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ResistorSpec>) {
          node["resistance"] = s.resistance;
        } else if constexpr (std::is_same_v<T, CapacitorSpec>) {
          node["capacitance"] = s.capacitance;
        } else if constexpr (std::is_same_v<T, InductorSpec>) {
          node["inductance"] = s.inductance;
        } else if constexpr (std::is_same_v<T, DiodeSpec>) {
          node["saturation_current"] = s.saturation_current;
          node["ideality"] = s.ideality;
          node["thermal_voltage"] = s.thermal_voltage;
        } else {
          json points = json::array();
          for (std::size_t k = 0; k < s.xs.size(); ++k) {
            points.push_back(json::array({s.xs[k], s.ys[k]}));
          }
          node["points"] = std::move(points);
        }
      },
      spec);
  return node;
}

json node_to_json(const OnePort& node) {
  if (node.kind == OnePort::Kind::element) {
    return element_to_json(node.element);
  }
  json out;
  out["type"] = node.kind == OnePort::Kind::series ? "series" : "parallel";
  json children = json::array();
  for (const OnePort& child : node.children) {
    children.push_back(node_to_json(child));
  }
  out["children"] = std::move(children);
  return out;
}

}  // namespace

OnePort parse_netlist(const std::string& text) {
  const json doc = parse_document(text, "netlist");
  require_object(doc, "netlist");
  restrict_keys(doc, "netlist", {"schema_version", "root"});
  check_schema_version(doc, "netlist");
  return parse_node(member(doc, "netlist", "root"), "root");
}

OnePort load_netlist_file(const std::string& path) {
  return parse_netlist(read_file(path));
}

std::string serialize_netlist(const OnePort& network) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["root"] = node_to_json(network);
  return doc.dump(2) + "\n";
}

RunSpec parse_runspec(const std::string& text, const std::string& base_dir) {
  const json doc = parse_document(text, "runspec");
  require_object(doc, "runspec");
  restrict_keys(doc, "runspec",
                {"schema_version", "netlist", "netlist_path", "drive",
                 "discretization", "solver", "output", "allow_partial",
                 "dump_branches"});
  check_schema_version(doc, "runspec");

  RunSpec spec;

  const bool has_inline = doc.contains("netlist");
  const bool has_path = doc.contains("netlist_path");
  if (has_inline == has_path) {
    fail("runspec", "exactly one of \"netlist\" and \"netlist_path\" required");
  }
  if (has_inline) {
    const json& net = doc["netlist"];
    require_object(net, "runspec.netlist");
    restrict_keys(net, "runspec.netlist", {"schema_version", "root"});
    check_schema_version(net, "runspec.netlist");
    spec.network = parse_node(member(net, "runspec.netlist", "root"), "root");
  } else {
    const json& p = doc["netlist_path"];
    if (!p.is_string()) {
      fail("runspec", "key \"netlist_path\" must be a string");
    }
    std::filesystem::path path(p.get<std::string>());
    if (path.is_relative()) {
      path = std::filesystem::path(base_dir) / path;
    }
    spec.network = load_netlist_file(path.string());
  }

  const json& drive = member(doc, "runspec", "drive");
  require_object(drive, "runspec.drive");
  restrict_keys(drive, "runspec.drive", {"kind", "bias", "tones"});
  const json& kind = member(drive, "runspec.drive", "kind");
  if (!kind.is_string()) {
    fail("runspec.drive", "key \"kind\" must be a string");
  }
  const std::string kind_name = kind.get<std::string>();
  if (kind_name == "current") {
    spec.drive_kind = DriveKind::current;
  } else if (kind_name == "voltage") {
    spec.drive_kind = DriveKind::voltage;
  } else {
    fail("runspec.drive",
         "kind \"" + kind_name + "\" must be \"current\" or \"voltage\"");
  }
  spec.drive.bias = number_or(drive, "runspec.drive", "bias", 0.0);
  if (drive.contains("tones")) {
    const json& tones = drive["tones"];
    if (!tones.is_array()) {
      fail("runspec.drive", "key \"tones\" must be an array");
    }
    for (std::size_t k = 0; k < tones.size(); ++k) {
      const std::string where = "runspec.drive.tones[" + std::to_string(k) + "]";
      const json& tone = tones[k];
      require_object(tone, where);
      restrict_keys(tone, where, {"amplitude", "frequency", "phase"});
      Tone t;
      t.amplitude = number_at(tone, where, "amplitude");
      t.frequency = number_at(tone, where, "frequency");
      t.phase = number_or(tone, where, "phase", 0.0);
      spec.drive.tones.push_back(t);
    }
  }

  if (doc.contains("discretization")) {
    const json& disc = doc["discretization"];
    require_object(disc, "runspec.discretization");
    restrict_keys(disc, "runspec.discretization", {"n_steps", "period_seconds"});
    if (disc.contains("n_steps")) {
      const json& n = disc["n_steps"];
      if (!n.is_number_integer() || n.get<int>() < 2) {
        fail("runspec.discretization", "n_steps must be an integer >= 2");
      }
      spec.discretization.n_steps = n.get<int>();
    }
    spec.discretization.period_seconds =
        number_or(disc, "runspec.discretization", "period_seconds",
                  spec.discretization.period_seconds);
    if (!(spec.discretization.period_seconds > 0.0)) {
      fail("runspec.discretization", "period_seconds must be positive");
    }
  }

  if (doc.contains("solver")) {
    const json& solver = doc["solver"];
    require_object(solver, "runspec.solver");
    restrict_keys(solver, "runspec.solver",
                  {"algorithm", "tol", "max_iter", "alpha", "lambda", "form"});
    if (solver.contains("algorithm")) {
      const json& algo = solver["algorithm"];
      if (!algo.is_string()) {
        fail("runspec.solver", "key \"algorithm\" must be a string");
      }
      const std::string name = algo.get<std::string>();
      if (name == "auto") {
        spec.solver.algorithm = Algorithm::automatic;
      } else if (name == "forward") {
        spec.solver.algorithm = Algorithm::forward;
      } else if (name == "dr") {
        spec.solver.algorithm = Algorithm::douglas_rachford;
      } else {
        fail("runspec.solver", "algorithm \"" + name +
                                   "\" must be \"auto\", \"forward\", or "
                                   "\"dr\"");
      }
    }
    spec.solver.tol = number_or(solver, "runspec.solver", "tol",
                                spec.solver.tol);
    if (solver.contains("max_iter")) {
      const json& m = solver["max_iter"];
      if (!m.is_number_integer() || m.get<int>() < 1) {
        fail("runspec.solver", "max_iter must be a positive integer");
      }
      spec.solver.max_iter = m.get<int>();
    }
    if (solver.contains("alpha")) {
      spec.solver.alpha = number_at(solver, "runspec.solver", "alpha");
    }
    spec.solver.lambda =
        number_or(solver, "runspec.solver", "lambda", spec.solver.lambda);
    if (solver.contains("form")) {
      const json& form = solver["form"];
      if (!form.is_string()) {
        fail("runspec.solver", "key \"form\" must be a string");
      }
      const std::string name = form.get<std::string>();
      if (name == "matched") {
        spec.solver.form = SolveForm::matched;
      } else if (name == "impedance") {
        spec.solver.form = SolveForm::impedance;
      } else if (name == "admittance") {
        spec.solver.form = SolveForm::admittance;
      } else {
        fail("runspec.solver", "form \"" + name +
                                   "\" must be \"matched\", \"impedance\", or "
                                   "\"admittance\"");
      }
    }
  }

  if (doc.contains("output")) {
    const json& output = doc["output"];
    require_object(output, "runspec.output");
    restrict_keys(output, "runspec.output",
                  {"csv_path", "log_path", "verbosity"});
    if (output.contains("csv_path")) {
      if (!output["csv_path"].is_string()) {
        fail("runspec.output", "csv_path must be a string");
      }
      spec.output.csv_path = output["csv_path"].get<std::string>();
    }
    if (output.contains("log_path")) {
      if (!output["log_path"].is_string()) {
        fail("runspec.output", "log_path must be a string");
      }
      spec.output.log_path = output["log_path"].get<std::string>();
    }
    if (output.contains("verbosity")) {
      if (!output["verbosity"].is_number_integer()) {
        fail("runspec.output", "verbosity must be an integer");
      }
      spec.output.verbosity = output["verbosity"].get<int>();
    }
  }

  if (doc.contains("allow_partial")) {
    if (!doc["allow_partial"].is_boolean()) {
      fail("runspec", "allow_partial must be a boolean");
    }
    spec.allow_partial = doc["allow_partial"].get<bool>();
  }
  if (doc.contains("dump_branches")) {
    if (!doc["dump_branches"].is_boolean()) {
      fail("runspec", "dump_branches must be a boolean");
    }
    spec.dump_branches = doc["dump_branches"].get<bool>();
  }

  return spec;
}

RunSpec load_runspec_file(const std::string& path) {
  const std::filesystem::path p(path);
  const std::string base =
      p.has_parent_path() ? p.parent_path().string() : std::string(".");
  return parse_runspec(read_file(path), base);
}

std::string netlist_schema_document() {
  return R"(Netlist document (JSON)
=======================

{
  "schema_version": 1,
  "root": <node>
}

<node> is one of:

  {"type": "series",   "children": [<node>, <node>, ...]}   // 2 or more
  {"type": "parallel", "children": [<node>, <node>, ...]}   // 2 or more
  {"type": "element",  "kind": <kind>, ...parameters}

Element kinds and parameters:

  resistor   resistance          ohms, any finite value; a negative value
                                 builds a non-monotone law for `check` to flag
  capacitor  capacitance         farads, must be positive
  inductor   inductance          henries, must be positive
  diode      saturation_current  amperes (default 1e-12)
             ideality            dimensionless (default 1)
             thermal_voltage     volts (default 0.025852)
  piecewise  points              [[i, v], ...] with strictly increasing i
                                 and nondecreasing v (2 or more points)

Unknown keys are rejected. "schema_version" may be omitted and defaults to
the current version.

Runspec document (JSON)
=======================

{
  "schema_version": 1,
  "netlist": {...}            // inline netlist document, or
  "netlist_path": "net.json", // path resolved against the runspec's directory
  "drive": {
    "kind": "current" | "voltage",
    "bias": 0.0,
    "tones": [{"amplitude": 1.0, "frequency": 1.0, "phase": 0.0}, ...]
  },
  "discretization": {"n_steps": 500, "period_seconds": 1.0},
  "solver": {
    "algorithm": "auto" | "forward" | "dr",
    "tol": 1e-8, "max_iter": 10000,
    "alpha": <step>,    // forward step size; omitted = automatic
    "lambda": 1.0,      // resolvent parameter
    "form": "matched" | "impedance" | "admittance"
  },
  "output": {"csv_path": "out.csv", "log_path": "run.log", "verbosity": 0},
  "allow_partial": false,
  "dump_branches": false
}

The drive samples bias + sum_k amplitude_k * sin(2 pi frequency_k t + phase_k)
on a uniform grid of n_steps points over one period. Every frequency must be
an integer multiple of 1 / period_seconds.

The solved trajectories are written as CSV with header t,i,v and one row per
sample. With dump_branches, per-branch columns i[<path>] and v[<path>] are
appended for every network node.
)";
}

}  // namespace monoport
