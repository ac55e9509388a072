#pragma once

#include <cstdint>
#include <span>

#include "fairaudit/context.hpp"
#include "fairaudit/perturbation.hpp"
#include "fairaudit/score.hpp"

// Brute-force verifiers for tests and the selftest command. They cross-check
// the closed forms through independent numerical routes and stay off the
// main computation path.

namespace fairaudit {

inline constexpr std::uint64_t kDefaultOracleSeed = 12022;

// Forward difference quotient of the objective along the perturbation:
// (L(p0 perturbed by eps*f) - L(p0)) / eps. Requires f in the feasible set.
double finite_difference_delta(const LambdaWeights& lam, const AuditContext& ctx,
                               const ScoreFunction& f, double eps);

// Polynomial extrapolation of the difference quotient to eps = 0 over a
// ladder of distinct positive eps values; kills the O(eps^k) bias terms.
double richardson_delta(const LambdaWeights& lam, const AuditContext& ctx,
                        const ScoreFunction& f, std::span<const double> eps_ladder);

struct BruteForceResult {
    ScoreFunction f_best;
    double delta_best = 0.0;
};

// Random search for the steepest feasible direction: Gaussian directions
// centered and scaled to the constraint set, optional projected-gradient
// polish on the sphere (gradient recovered numerically from first-order
// evaluations, not from the closed form).
BruteForceResult brute_force_min_delta(const LambdaWeights& lam, const AuditContext& ctx,
                                       std::size_t samples, bool polish,
                                       std::uint64_t seed = kDefaultOracleSeed);

// Spectral route to the maximal correlation: second-largest singular value
// of B[y][x] = W(y|x) sqrt(p0(x)) / sqrt(q0(y)), via a Jacobi eigensolver on
// the smaller Gram matrix. Clamped to [0, 1].
double maximal_correlation_svd(const AuditContext& ctx);

struct GridResult {
    DiscreteDistribution qx_best;
    double objective = 0.0;
};

// Exhaustive minimum of the four-term objective over the lattice
// {k/resolution} simplex grid; lattice points breaking absolute continuity
// of an active term are excluded. Intended for |X| <= 4.
GridResult grid_simplex_min(const LambdaWeights& lam, const AuditContext& ctx,
                            std::size_t resolution);

}  // namespace fairaudit
