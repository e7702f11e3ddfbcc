#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "monoport/relation.hpp"

namespace monoport {

/// Randomized-probe configuration shared by the property checks and the
/// constant estimators. The same seed yields the same probe stream, so
/// estimates computed from different relations are comparable pair by pair.
struct SamplerConfig {
  std::uint64_t seed = 0x6d6f6e6f706f7274ull;
  int trials = 1000;
  /// Probe amplitude (componentwise standard deviation).
  double amplitude = 1.0;
  /// Slack added to every inequality test: violations must exceed
  /// abs_tol * (1 + scale of the quantities involved) to count.
  double abs_tol = 1e-10;
  /// Prepend deterministic probes (constant direction, coordinate axes,
  /// lowest Fourier pair) before the random stream. These catch degenerate
  /// directions that random probing misses in high dimension.
  bool structured_probes = true;
};

/// A concrete input pair that violated (or extremized) the tested property.
struct Witness {
  Vector u1;
  Vector u2;
  double margin = 0.0;
};

struct PropertyReport {
  bool passed = true;
  int trials = 0;
  int violations = 0;
  /// Extremal statistic of the suite. Monotone suite: smallest signed
  /// inner-product margin (negative = violation). Resolvent suite: largest
  /// normalized defect (a violation when it exceeds the suite tolerance).
  double worst_margin = 0.0;
  std::optional<Witness> worst_witness;
  std::string property;
  std::vector<std::string> notes;
};

/// Samples pairs (u1, u2), maps them through the relation, and tests the
/// monotonicity inner product <u1 - u2, S(u1) - S(u2)> >= -abs_tol * scale.
/// Inputs are projected into the relation's domain (zero-mean subspace,
/// scalar law intervals) before evaluation.
[[nodiscard]] PropertyReport check_monotone(const RelationPtr& s,
                                            const SamplerConfig& config = {});

/// Tests the resolvent against its defining inclusion: for x = res(z),
/// (z - x) / lambda must equal S(x) when S applies, and res must be firmly
/// nonexpansive across sampled pairs regardless. When the forward value at x
/// is unusable because x sits on the edge of S's domain at double precision
/// (a steep law there refuses to evaluate, or magnifies sub-ulp placement
/// error into an O(1) value gap), graph membership of (x, (z - x) / lambda)
/// is verified through the resolvent at a second scale instead, which is
/// well conditioned everywhere. worst_margin is the largest normalized
/// defect over both subtests; a trial counts as a violation when its defect
/// exceeds max(config.abs_tol, 1e-8), the floor reflecting the certified
/// accuracy of the inner linear and scalar solves.
[[nodiscard]] PropertyReport check_resolvent(const RelationPtr& s, double lambda,
                                             const SamplerConfig& config = {});

/// Largest m such that <du, dS> >= m ||du||^2 over the sampled pairs
/// (an upper bound on the true constant that tightens with more probes).
[[nodiscard]] double estimate_coercivity(const RelationPtr& s,
                                         const SamplerConfig& config = {});

/// Largest beta such that <du, dS> >= beta ||dS||^2 over the sampled pairs.
[[nodiscard]] double estimate_cocoercivity(const RelationPtr& s,
                                           const SamplerConfig& config = {});

/// Smallest L such that ||dS|| <= L ||du|| over the sampled pairs
/// (a lower bound on the true constant).
[[nodiscard]] double estimate_lipschitz(const RelationPtr& s,
                                        const SamplerConfig& config = {});

}  // namespace monoport
