#pragma once

#include "fairaudit/channel.hpp"
#include "fairaudit/context.hpp"
#include "fairaudit/score.hpp"

namespace fairaudit {

enum class DivergenceMetric { KL, TotalVariation };

// KL divergence in nats, with the 0 log 0 := 0 convention. Throws
// AbsoluteContinuityViolation when p puts mass where q has none.
double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q);

// (1/2) sum |p - q|
double total_variation(const DiscreteDistribution& p, const DiscreteDistribution& q);

// Renyi divergence of order alpha (> 0, != 1). For alpha > 1 the same
// absolute-continuity requirement as KL applies.
double renyi_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q,
                        double alpha);

// The four-term trade-off objective
//   l1 J(qx||p0) + l2 J(qx||p1) + l3 J(qy||q0) + l4 J(qy||q1)
// with qy the pushforward of qx. Terms with zero weight are never evaluated,
// so inactive terms cannot raise continuity errors.
double objective_value(const LambdaWeights& lam, const DiscreteDistribution& qx,
                       const AuditContext& ctx,
                       DivergenceMetric metric = DivergenceMetric::KL);

}  // namespace fairaudit
