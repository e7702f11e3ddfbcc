#pragma once

#include <vector>

#include "monoport/affine.hpp"

namespace monoport {

// ============================================================================
// Periodic trajectories
// ============================================================================

/// One period of a T-periodic waveform, sampled at t_j = j*T/N, j = 0..N-1.
struct PeriodicSignal {
  Vector samples;
  double period = 1.0;

  PeriodicSignal() = default;
  PeriodicSignal(Vector s, double T);

  [[nodiscard]] Eigen::Index size() const { return samples.size(); }
};

/// Compensated (Kahan) mean of the samples.
[[nodiscard]] double mean(const PeriodicSignal& s);
[[nodiscard]] double mean(const Vector& v);

/// Absolute tolerance under which a trajectory counts as zero-mean.
[[nodiscard]] double zero_mean_tolerance(const Vector& u);

/// One sinusoidal component of a drive waveform.
struct Tone {
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz; must be a harmonic of 1/T
  double phase = 0.0;      // radians
};

/// Bias plus a sum of harmonic tones.
struct DriveSpec {
  double bias = 0.0;
  std::vector<Tone> tones;
};

/// Samples bias + sum_k a_k sin(2 pi f_k t + phi_k) on the period grid.
/// Every frequency must be an integer multiple of 1/T (periodicity).
[[nodiscard]] PeriodicSignal sample_drive(const DriveSpec& spec, int n, double period);

// ============================================================================
// Periodic backward-difference calculus
// ============================================================================
//
// The derivative is the cyclic backward difference scaled by the sample rate:
//   (D u)_k = (N/T) (u_k - u_{k-1 mod N}).
// Outputs always sum to zero (the row sums of the cyclic difference vanish).
// D and the integral J are mutually inverse under two normalisation
// conventions: D takes the zero-offset representative (u_{N-1} = 0) and J
// produces it, while J accepts only zero-mean inputs (the range of D).
// On the truncated first N-1 coordinates these are the classic pair
//   D_T = lower bidiagonal(1, -1),   J_T = lower triangle of ones,
// with D_T J_T = J_T D_T = I exactly, and the full trajectories complete as
//   (D u)_{N-1} = -(N/T) u_{N-2}  (zero-mean completion),
//   (J u)_{N-1} = 0               (zero-offset completion).

/// Cyclic derivative; monotone on the whole space, bijective on the
/// zero-offset/zero-mean subspace pair.
struct DerivativeOperator {
  AffineOperator op;  // dense (N/T) (I - P), P the one-step cyclic shift
  int n = 0;
  double period = 1.0;

  /// Structural evaluation (exact cyclic differences, no dense product).
  [[nodiscard]] Vector apply(const Vector& u) const;
};

/// Running integral with zero-offset output; domain is zero-mean trajectories.
struct IntegralOperator {
  AffineOperator op;  // dense (T/N) J_full: rows 0..N-2 prefix sums, last row 0
  int n = 0;
  double period = 1.0;

  /// Structural evaluation (prefix sums). Throws DomainViolation if the
  /// input mean exceeds zero_mean_tolerance.
  [[nodiscard]] Vector apply(const Vector& u) const;
};

[[nodiscard]] DerivativeOperator make_derivative(int n, double period);
[[nodiscard]] IntegralOperator make_integral(int n, double period);

/// Raw truncated (N-1)x(N-1) blocks, unscaled, exposed for audit.
[[nodiscard]] Matrix truncated_difference(int n);
[[nodiscard]] Matrix truncated_integral(int n);

namespace detail {
void require_signal_dim(int n, const char* who);
void require_period(double period, const char* who);
}  // namespace detail

}  // namespace monoport
