#pragma once

#include <functional>
#include <utility>

#include "monoport/relation.hpp"
#include "monoport/solver_types.hpp"

namespace monoport {

/// Fixed-point iteration x <- F(x) with the relative stopping test
/// ||F(x) - x|| <= tol (1 + ||x||). Throws DivergenceError when the step
/// norm grows past ten times the best step seen so far.
[[nodiscard]] SolveReport picard(const std::function<Vector(const Vector&)>& map,
                                 const Vector& x0, double tol, int max_iter);

/// Forward-step iteration x <- x - alpha * S(x) for a single-valued strongly
/// monotone Lipschitz relation. Without an explicit alpha the step is m / L^2
/// from the relation's advertised constants; the squared-norm contraction
/// factor per step is then 1 - m^2 / L^2.
[[nodiscard]] SolveReport forward_step(const RelationPtr& s,
                                       const SolverConfig& config);

/// Douglas-Rachford splitting for 0 in S1(x) + S2(x), driven entirely by the
/// two resolvents:
///   x_half = res_{S1,lambda}(y);  x_next = res_{S2,lambda}(2 x_half - y);
///   y <- y + x_next - x_half,
/// stopping when ||x_next - x_half|| <= tol (1 + ||x_next||). The returned
/// solution is the S1-side iterate x_half, which lies in dom S1 by
/// construction; its inclusion residual is bounded by the stopping test
/// through S1(x_half) + S2(x_half) = (I/lambda + dS2)(x_half - x_next).
[[nodiscard]] SolveReport douglas_rachford(const RelationPtr& s1,
                                           const RelationPtr& s2,
                                           const SolverConfig& config);

/// Zero-inclusion solve 0 in S(x). Dispatch:
///   - forced forward: requires apply plus usable constants;
///   - forced douglas_rachford: splits a (possibly shifted) sum by resolvents,
///     or runs the proximal-point special case S2 = 0;
///   - automatic: affine -> one linear solve; then the splits above; then
///     forward as a last resort.
[[nodiscard]] SolveReport solve_zero(const RelationPtr& s,
                                     const SolverConfig& config);

/// Safeguarded scalar Newton on a bracket [lo, hi] with h(lo) <= 0 <= h(hi).
/// `fn` returns {h(x), h'(x)}. Newton steps that leave the bracket, or meet a
/// nonpositive or nonfinite derivative, fall back to bisection; every iterate
/// tightens the bracket. Returns the root with |h| <= tol.
[[nodiscard]] double guarded_newton(
    const std::function<std::pair<double, double>(double)>& fn, double lo,
    double hi, double tol, int max_iter = 200);

}  // namespace monoport
