#pragma once

#include <memory>
#include <string>
#include <vector>

#include "monoport/elements.hpp"
#include "monoport/solver_types.hpp"

namespace monoport {

// ============================================================================
// One-port network trees
// ============================================================================

/// A one-port is an element or a series/parallel interconnection of one-ports.
/// Series shares the port current and sums voltages; parallel shares the port
/// voltage and sums currents.
struct OnePort {
  enum class Kind { element, series, parallel };

  Kind kind = Kind::element;
  ElementSpec element;             // valid when kind == element
  std::vector<OnePort> children;   // valid otherwise (size >= 2)

  [[nodiscard]] static OnePort make_element(ElementSpec spec);
  [[nodiscard]] static OnePort make_series(std::vector<OnePort> children);
  [[nodiscard]] static OnePort make_parallel(std::vector<OnePort> children);
};

/// Throws ConstructionError naming the offending node path (e.g. "0.2.1").
void validate_network(const OnePort& network);

/// Notes accumulated while orienting a network: which composite nodes had to
/// be inverted, and which orientations collapsed to closed forms.
struct OrientationReport {
  std::vector<std::string> notes;
};

/// Current-to-voltage relation of the full port on n samples over one period.
/// Series nodes sum child impedances; parallel nodes invert the summed child
/// admittances.
[[nodiscard]] RelationPtr impedance_relation(const OnePort& network,
                                             Eigen::Index n, double period,
                                             OrientationReport* report = nullptr);

/// Voltage-to-current relation (dual construction).
[[nodiscard]] RelationPtr admittance_relation(const OnePort& network,
                                              Eigen::Index n, double period,
                                              OrientationReport* report = nullptr);

/// Incremental relation S(x) - y_star used to pose a drive as 0 in Delta(x).
[[nodiscard]] RelationPtr delta_relation(const RelationPtr& s,
                                         const PeriodicSignal& y_star);

/// Negative-feedback interconnection (F^-1 + G)^-1 at the relation level.
[[nodiscard]] RelationPtr feedback(const RelationPtr& forward_path,
                                   const RelationPtr& feedback_path);

// ============================================================================
// Independent solution audit
// ============================================================================

/// Per-branch trajectories reconstructed while auditing a port solution.
struct BranchRecord {
  std::string path;         // "root", then "0", "0.1", ... for children
  std::string kind;         // element kind or "series" / "parallel"
  Vector current;
  Vector voltage;
  double device_residual = 0.0;  // elementwise law mismatch, elements only
};

struct AuditReport {
  /// Max over series nodes of ||v_node - sum of child voltages||.
  double kvl_residual = 0.0;
  /// Max over parallel nodes of ||i_node - sum of child currents||.
  double kcl_residual = 0.0;
  /// Max over elements of the constitutive-law residual.
  double device_residual = 0.0;
  std::vector<BranchRecord> branches;
  std::vector<std::string> notes;

  [[nodiscard]] double worst() const;
  [[nodiscard]] bool passes(double tol) const;
};

/// Reconstructs every internal branch from the port trajectories and checks
/// the interconnection laws and each element law independently of how the
/// port solution was produced. Inner reconstructions use tight direct or
/// splitting solves, not the solver configuration under audit.
[[nodiscard]] AuditReport audit_solution(const OnePort& network,
                                         const PeriodicSignal& current,
                                         const PeriodicSignal& voltage);

}  // namespace monoport
