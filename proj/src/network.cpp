#include "monoport/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "monoport/solvers.hpp"

namespace monoport {

namespace {

std::string child_path(const std::string& base, std::size_t k) {
  if (base.empty()) {
    return std::to_string(k);
  }
  return base + "." + std::to_string(k);
}

std::string node_label(const OnePort& node) {
  switch (node.kind) {
    case OnePort::Kind::element:
      return element_kind_name(node.element);
    case OnePort::Kind::series:
      return "series";
    case OnePort::Kind::parallel:
      return "parallel";
  }
  return "?";
}

void validate_rec(const OnePort& node, const std::string& path) {
  try {
    if (node.kind == OnePort::Kind::element) {
      if (!node.children.empty()) {
        throw ConstructionError("element node must not have children");
      }
      validate_element(node.element);
      return;
    }
    if (node.children.size() < 2) {
      std::ostringstream msg;
      msg << node_label(node) << " node needs at least 2 children, has "
          << node.children.size();
      throw ConstructionError(msg.str());
    }
  } catch (const ConstructionError& e) {
    std::ostringstream msg;
    msg << "node '" << (path.empty() ? "root" : path) << "': " << e.what();
    throw ConstructionError(msg.str());
  }
  for (std::size_t k = 0; k < node.children.size(); ++k) {
    validate_rec(node.children[k], child_path(path, k));
  }
}

enum class Orientation { impedance, admittance };

bool direct_kind(const RelationPtr& rel) {
  return dynamic_cast<const InverseRelation*>(rel.get()) == nullptr;
}

RelationPtr orient(const OnePort& node, Orientation o, Eigen::Index n,
                   double period, const std::string& path,
                   OrientationReport* report) {
  if (node.kind == OnePort::Kind::element) {
    try {
      return o == Orientation::impedance
                 ? element_impedance(node.element, n, period)
                 : element_admittance(node.element, n, period);
    } catch (const ConstructionError& e) {
      std::ostringstream msg;
      msg << "node '" << (path.empty() ? "root" : path) << "': " << e.what();
      throw ConstructionError(msg.str());
    }
  }
  // Series sums impedances and parallel sums admittances; the opposite
  // orientation of each composite is the relational inverse of that sum.
  const bool summed_directly =
      (node.kind == OnePort::Kind::series) == (o == Orientation::impedance);
  const Orientation child_o =
      summed_directly ? o
                      : (o == Orientation::impedance ? Orientation::admittance
                                                     : Orientation::impedance);
  std::vector<RelationPtr> parts;
  parts.reserve(node.children.size());
  for (std::size_t k = 0; k < node.children.size(); ++k) {
    parts.push_back(orient(node.children[k], child_o, n, period,
                           child_path(path, k), report));
  }
  RelationPtr summed = add(std::move(parts));
  if (summed_directly) {
    return summed;
  }
  RelationPtr inverted = invert(summed);
  if (report != nullptr) {
    std::ostringstream note;
    note << "node '" << (path.empty() ? "root" : path) << "' ("
         << node_label(node) << "): "
         << (o == Orientation::impedance ? "impedance" : "admittance")
         << " formed by inverting the summed "
         << (o == Orientation::impedance ? "admittance" : "impedance") << " ("
         << (direct_kind(inverted) ? "closed-form" : "iterative") << ")";
    report->notes.push_back(note.str());
  }
  return inverted;
}

}  // namespace

OnePort OnePort::make_element(ElementSpec spec) {
  OnePort p;
  p.kind = Kind::element;
  p.element = std::move(spec);
  return p;
}

OnePort OnePort::make_series(std::vector<OnePort> children) {
  OnePort p;
  p.kind = Kind::series;
  p.children = std::move(children);
  return p;
}

OnePort OnePort::make_parallel(std::vector<OnePort> children) {
  OnePort p;
  p.kind = Kind::parallel;
  p.children = std::move(children);
  return p;
}

void validate_network(const OnePort& network) { validate_rec(network, ""); }

RelationPtr impedance_relation(const OnePort& network, Eigen::Index n,
                               double period, OrientationReport* report) {
  validate_network(network);
  return orient(network, Orientation::impedance, n, period, "", report);
}

RelationPtr admittance_relation(const OnePort& network, Eigen::Index n,
                                double period, OrientationReport* report) {
  validate_network(network);
  return orient(network, Orientation::admittance, n, period, "", report);
}

RelationPtr delta_relation(const RelationPtr& s, const PeriodicSignal& y_star) {
  if (!s) {
    throw ArgumentError("delta_relation: null relation");
  }
  if (y_star.size() != s->dim()) {
    std::ostringstream msg;
    msg << "delta_relation: drive length " << y_star.size()
        << " does not match relation dimension " << s->dim();
    throw ArgumentError(msg.str());
  }
  return shift_output(s, y_star.samples);
}

RelationPtr feedback(const RelationPtr& forward_path,
                     const RelationPtr& feedback_path) {
  if (!forward_path || !feedback_path) {
    throw ArgumentError("feedback: null relation");
  }
  if (forward_path->dim() != feedback_path->dim()) {
    throw ArgumentError("feedback: dimension mismatch");
  }
  return invert(add(invert(forward_path), feedback_path));
}

// ============================================================================
// Audit
// ============================================================================

namespace {

/// Evaluates one orientation of a subtree with audit-grade settings,
/// independent of whatever solver configuration produced the port solution.
Vector audit_eval(const OnePort& node, Orientation o, const Vector& input,
                  Eigen::Index n, double period) {
  RelationPtr rel = orient(node, o, n, period, "", nullptr);
  return rel->apply(input, DomainPolicy::enforce);
}

struct AuditContext {
  Eigen::Index n = 0;
  double period = 1.0;
  AuditReport* report = nullptr;
};

/// True when the subtree's voltage response to a given current is determined
/// only up to an additive constant (a capacitor's integration constant).
/// Series inherits the freedom from any child; a parallel node is free only
/// when every child absorbs constant voltage shifts without changing current.
bool voltage_dc_free(const OnePort& node) {
  switch (node.kind) {
    case OnePort::Kind::element:
      return std::holds_alternative<CapacitorSpec>(node.element);
    case OnePort::Kind::series:
      return std::any_of(node.children.begin(), node.children.end(),
                         voltage_dc_free);
    case OnePort::Kind::parallel:
      return std::all_of(node.children.begin(), node.children.end(),
                         voltage_dc_free);
  }
  return false;
}

/// Dual freedom: the subtree's current response to a given voltage is
/// determined only up to an additive constant (an inductor's circulating
/// direct current).
bool current_dc_free(const OnePort& node) {
  switch (node.kind) {
    case OnePort::Kind::element:
      return std::holds_alternative<InductorSpec>(node.element);
    case OnePort::Kind::parallel:
      return std::any_of(node.children.begin(), node.children.end(),
                         current_dc_free);
    case OnePort::Kind::series:
      return std::all_of(node.children.begin(), node.children.end(),
                         current_dc_free);
  }
  return false;
}

double element_device_residual(const ElementSpec& spec, const Vector& i,
                               const Vector& v, const AuditContext& ctx,
                               const std::string& path) {
  const int n = static_cast<int>(ctx.n);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ResistorSpec>) {
          return (v - s.resistance * i).norm();
        } else if constexpr (std::is_same_v<T, CapacitorSpec>) {
          // Check in derivative form: i = C dv/dt avoids the integration
          // constant entirely.
          DerivativeOperator d = make_derivative(n, ctx.period);
          return (i - s.capacitance * d.apply(v)).norm();
        } else if constexpr (std::is_same_v<T, InductorSpec>) {
          DerivativeOperator d = make_derivative(n, ctx.period);
          return (v - s.inductance * d.apply(i)).norm();
        } else if constexpr (std::is_same_v<T, DiodeSpec>) {
          for (Eigen::Index k = 0; k < i.size(); ++k) {
            if (i[k] <= -s.saturation_current) {
              std::ostringstream note;
              note << "element '" << path << "': current sample " << k
                   << " violates the diode domain (i = " << i[k] << ")";
              ctx.report->notes.push_back(note.str());
              return std::numeric_limits<double>::infinity();
            }
          }
          Vector model(i.size());
          for (Eigen::Index k = 0; k < i.size(); ++k) {
            model[k] = diode_v_of_i(i[k], s.saturation_current, s.ideality,
                                    s.thermal_voltage);
          }
          return (v - model).norm();
        } else {
          PiecewiseLinearLaw law(s.xs, s.ys);
          Vector model(i.size());
          for (Eigen::Index k = 0; k < i.size(); ++k) {
            model[k] = law.value(i[k]);
          }
          return (v - model).norm();
        }
      },
      spec);
}

void audit_rec(const OnePort& node, const std::string& path, const Vector& i,
               const Vector& v, const AuditContext& ctx) {
  BranchRecord record;
  record.path = path.empty() ? "root" : path;
  record.kind = node_label(node);
  record.current = i;
  record.voltage = v;

  if (node.kind == OnePort::Kind::element) {
    record.device_residual =
        element_device_residual(node.element, i, v, ctx, record.path);
    ctx.report->device_residual =
        std::max(ctx.report->device_residual, record.device_residual);
    ctx.report->branches.push_back(std::move(record));
    return;
  }

  ctx.report->branches.push_back(std::move(record));

  if (node.kind == OnePort::Kind::series) {
    // Children share the current; reconstruct each child's voltage. A child
    // whose voltage carries a free integration constant receives the direct
    // component left over by the others, so the constant is audited as part
    // of the loop law rather than double-counted against the device.
    std::vector<Vector> child_v;
    child_v.reserve(node.children.size());
    Vector v_sum = Vector::Zero(ctx.n);
    std::ptrdiff_t free_child = -1;
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      Vector vk = audit_eval(node.children[k], Orientation::impedance, i,
                             ctx.n, ctx.period);
      v_sum += vk;
      child_v.push_back(std::move(vk));
      if (free_child < 0 && voltage_dc_free(node.children[k])) {
        free_child = static_cast<std::ptrdiff_t>(k);
      }
    }
    Vector mismatch = v - v_sum;
    if (free_child >= 0) {
      const double c = mismatch.mean();
      child_v[static_cast<std::size_t>(free_child)].array() += c;
      mismatch.array() -= c;
    }
    const double kvl = mismatch.norm();
    ctx.report->kvl_residual = std::max(ctx.report->kvl_residual, kvl);
    for (std::size_t k = 0; k < node.children.size(); ++k) {
      audit_rec(node.children[k], child_path(path, k), i, child_v[k], ctx);
    }
    return;
  }

  // Parallel: children share the voltage; reconstruct each child's current.
  // Dually, a child with a free circulating direct current absorbs the
  // direct component of the current mismatch at this node.
  std::vector<Vector> child_i;
  child_i.reserve(node.children.size());
  Vector i_sum = Vector::Zero(ctx.n);
  std::ptrdiff_t free_child = -1;
  for (std::size_t k = 0; k < node.children.size(); ++k) {
    Vector ik = audit_eval(node.children[k], Orientation::admittance, v,
                           ctx.n, ctx.period);
    i_sum += ik;
    child_i.push_back(std::move(ik));
    if (free_child < 0 && current_dc_free(node.children[k])) {
      free_child = static_cast<std::ptrdiff_t>(k);
    }
  }
  Vector mismatch = i - i_sum;
  if (free_child >= 0) {
    const double c = mismatch.mean();
    child_i[static_cast<std::size_t>(free_child)].array() += c;
    mismatch.array() -= c;
  }
  const double kcl = mismatch.norm();
  ctx.report->kcl_residual = std::max(ctx.report->kcl_residual, kcl);
  for (std::size_t k = 0; k < node.children.size(); ++k) {
    audit_rec(node.children[k], child_path(path, k), child_i[k], v, ctx);
  }
}

}  // namespace

double AuditReport::worst() const {
  return std::max({kvl_residual, kcl_residual, device_residual});
}

bool AuditReport::passes(double tol) const {
  return std::isfinite(worst()) && worst() <= tol;
}

AuditReport audit_solution(const OnePort& network, const PeriodicSignal& current,
                           const PeriodicSignal& voltage) {
  validate_network(network);
  if (current.size() != voltage.size()) {
    std::ostringstream msg;
    msg << "audit_solution: current has " << current.size()
        << " samples, voltage " << voltage.size();
    throw ArgumentError(msg.str());
  }
  if (current.period != voltage.period) {
    throw ArgumentError("audit_solution: period mismatch between trajectories");
  }
  AuditReport report;
  AuditContext ctx;
  ctx.n = current.size();
  ctx.period = current.period;
  ctx.report = &report;
  try {
    audit_rec(network, "", current.samples, voltage.samples, ctx);
  } catch (const DomainViolation& e) {
    report.notes.push_back(std::string("audit aborted on domain violation: ") +
                           e.what());
    report.device_residual = std::numeric_limits<double>::infinity();
  }
  return report;
}

}  // namespace monoport
