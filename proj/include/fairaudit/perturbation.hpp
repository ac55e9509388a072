#pragma once

#include <cstddef>
#include <limits>

#include "fairaudit/context.hpp"
#include "fairaudit/score.hpp"

namespace fairaudit {

// Counters surfaced in reports instead of silent clipping/ignoring.
struct Warnings {
    std::size_t extreme_log_ratio = 0;  // |log(p0/p1)| or |log(q0/q1)| above log(1e6)
    std::size_t clipped_log_odds = 0;   // values clipped at +-log(1e12)
};

inline constexpr double kDefaultFeasibilityTol = 1e-9;

// Membership in the perturbation-direction set: zero mean and unit second
// moment under p.
bool is_feasible_direction(const DiscreteDistribution& p, const ScoreFunction& f,
                           double tol = kDefaultFeasibilityTol);

// Projects a raw function into the feasible set: centered and scaled to unit
// second moment under p. Throws ZeroVariance for p-a.s. constant input.
ScoreFunction normalize_direction(const DiscreteDistribution& p, const ScoreFunction& f_raw);

// Largest epsilon keeping p(x)(1 + eps f(x)) nonnegative on the support of p;
// +infinity when f >= 0 there.
double max_epsilon(const DiscreteDistribution& p, const ScoreFunction& f);

// The multiplicatively perturbed distribution p(x)(1 + eps f(x)).
DiscreteDistribution perturbed_distribution(const DiscreteDistribution& p,
                                            const ScoreFunction& f, double eps);

// g(y) = E[f(X) | Y=y, S=0] under the context's group-0 joint.
ScoreFunction induced_output_function(const AuditContext& ctx, const ScoreFunction& f);

// First-order change of the objective under the local perturbation of p0:
//   l2 E[ f log(p0/p1) | S=0 ] + l4 E[ g log(q0/q1) | S=0 ].
// Exact closed form, not a numerical limit. Requires zero mean under p0;
// the unit-second-moment constraint is not needed by the formula and is not
// enforced, so linear combinations can be evaluated directly.
double delta_lambda(const LambdaWeights& lam, const AuditContext& ctx, const ScoreFunction& f,
                    Warnings* warnings = nullptr);

}  // namespace fairaudit
