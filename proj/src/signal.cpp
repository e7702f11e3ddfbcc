#include "monoport/signal.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace monoport {

namespace detail {

void require_signal_dim(int n, const char* who) {
  if (n < 2) {
    std::ostringstream msg;
    msg << who << ": need at least 2 samples per period, got " << n;
    throw ArgumentError(msg.str());
  }
}

void require_period(double period, const char* who) {
  if (!std::isfinite(period) || period <= 0.0) {
    std::ostringstream msg;
    msg << who << ": period must be positive and finite, got " << period;
    throw ArgumentError(msg.str());
  }
}

}  // namespace detail

PeriodicSignal::PeriodicSignal(Vector s, double T)
    : samples(std::move(s)), period(T) {
  detail::require_signal_dim(static_cast<int>(samples.size()), "PeriodicSignal");
  detail::require_period(period, "PeriodicSignal");
  if (!samples.allFinite()) {
    throw ArgumentError("PeriodicSignal: non-finite samples");
  }
}

double mean(const Vector& v) {
  if (v.size() == 0) {
    throw ArgumentError("mean: empty vector");
  }
  // Compensated summation keeps the zero-mean domain tests honest at n =
  // 500+. The branch (Neumaier's variant) also preserves the correction
  // when a term dominates the running sum, which plain Kahan loses.
  double sum = 0.0;
  double comp = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double t = sum + v[k];
    if (std::abs(sum) >= std::abs(v[k])) {
      comp += (sum - t) + v[k];
    } else {
      comp += (v[k] - t) + sum;
    }
    sum = t;
  }
  return (sum + comp) / static_cast<double>(v.size());
}

double mean(const PeriodicSignal& s) { return mean(s.samples); }

double zero_mean_tolerance(const Vector& u) {
  return 1e-9 * (1.0 + u.norm());
}

PeriodicSignal sample_drive(const DriveSpec& spec, int n, double period) {
  detail::require_signal_dim(n, "sample_drive");
  detail::require_period(period, "sample_drive");
  if (!std::isfinite(spec.bias)) {
    throw ArgumentError("sample_drive: non-finite bias");
  }
  for (const Tone& tone : spec.tones) {
    if (!std::isfinite(tone.amplitude) || !std::isfinite(tone.frequency) ||
        !std::isfinite(tone.phase)) {
      throw ArgumentError("sample_drive: non-finite tone parameters");
    }
    const double cycles = tone.frequency * period;
    if (std::abs(cycles - std::round(cycles)) >
        1e-9 * std::max(1.0, std::abs(cycles))) {
      std::ostringstream msg;
      msg << "sample_drive: frequency " << tone.frequency
          << " Hz is not an integer number of cycles per period " << period
          << " s (got " << cycles << " cycles); the trajectory would not be "
          << "periodic on this window";
      throw ArgumentError(msg.str());
    }
  }
  Vector samples(n);
  for (int j = 0; j < n; ++j) {
    const double t = period * static_cast<double>(j) / static_cast<double>(n);
    double value = spec.bias;
    for (const Tone& tone : spec.tones) {
      value += tone.amplitude *
               std::sin(2.0 * std::numbers::pi * tone.frequency * t + tone.phase);
    }
    samples[j] = value;
  }
  return PeriodicSignal(std::move(samples), period);
}

Vector DerivativeOperator::apply(const Vector& u) const {
  if (u.size() != n) {
    std::ostringstream msg;
    msg << "derivative: input length " << u.size() << " does not match " << n;
    throw ArgumentError(msg.str());
  }
  const double rate = static_cast<double>(n) / period;
  Vector out(n);
  out[0] = rate * (u[0] - u[n - 1]);
  for (int k = 1; k < n; ++k) {
    out[k] = rate * (u[k] - u[k - 1]);
  }
  return out;
}

Vector IntegralOperator::apply(const Vector& u) const {
  if (u.size() != n) {
    std::ostringstream msg;
    msg << "integral: input length " << u.size() << " does not match " << n;
    throw ArgumentError(msg.str());
  }
  const double m = mean(u);
  if (std::abs(m) > zero_mean_tolerance(u)) {
    std::ostringstream msg;
    msg << "integral: input must be zero-mean (a biased trajectory has no "
        << "periodic running integral); mean = " << m;
    throw DomainViolation(msg.str());
  }
  const double h = period / static_cast<double>(n);
  Vector out(n);
  double acc = 0.0;
  for (int k = 0; k + 1 < n; ++k) {
    acc += u[k];
    out[k] = h * acc;
  }
  out[n - 1] = 0.0;
  return out;
}

DerivativeOperator make_derivative(int n, double period) {
  detail::require_signal_dim(n, "make_derivative");
  detail::require_period(period, "make_derivative");
  const double rate = static_cast<double>(n) / period;
  Matrix a = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    a(k, k) = rate;
    a(k, (k + n - 1) % n) = -rate;
  }
  DerivativeOperator d;
  d.op = AffineOperator(std::move(a));
  d.n = n;
  d.period = period;
  return d;
}

IntegralOperator make_integral(int n, double period) {
  detail::require_signal_dim(n, "make_integral");
  detail::require_period(period, "make_integral");
  const double h = period / static_cast<double>(n);
  Matrix a = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) {
    for (int j = 0; j <= k; ++j) {
      a(k, j) = h;
    }
  }
  IntegralOperator integ;
  integ.op = AffineOperator(std::move(a));
  integ.n = n;
  integ.period = period;
  return integ;
}

Matrix truncated_difference(int n) {
  detail::require_signal_dim(n, "truncated_difference");
  const int m = n - 1;
  Matrix a = Matrix::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    a(k, k) = 1.0;
    if (k > 0) {
      a(k, k - 1) = -1.0;
    }
  }
  return a;
}

Matrix truncated_integral(int n) {
  detail::require_signal_dim(n, "truncated_integral");
  const int m = n - 1;
  Matrix a = Matrix::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j <= k; ++j) {
      a(k, j) = 1.0;
    }
  }
  return a;
}

}  // namespace monoport
