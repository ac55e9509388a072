#include "fairaudit/divergence.hpp"

#include <cmath>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

double kl_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_aligned(p.support(), q.support(), "kl_divergence");
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.mass(i);
        if (pi == 0.0) continue;
        const double qi = q.mass(i);
        if (qi == 0.0)
            fail(ErrorCode::AbsoluteContinuityViolation,
                 "kl_divergence: p has mass at '" + p.support()->label(i) +
                     "' where q has none");
        s.add(pi * std::log(pi / qi));
    }
    // Gibbs: mathematically >= 0; clamp the rounding noise at p ~ q.
    return std::max(0.0, s.value());
}

double total_variation(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_aligned(p.support(), q.support(), "total_variation");
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s.add(std::abs(p.mass(i) - q.mass(i)));
    return 0.5 * s.value();
}

double renyi_divergence(const DiscreteDistribution& p, const DiscreteDistribution& q,
                        double alpha) {
    require_aligned(p.support(), q.support(), "renyi_divergence");
    if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha))
        fail(ErrorCode::InvalidAlpha, "renyi_divergence: alpha must be positive and != 1");
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p.mass(i);
        if (pi == 0.0) continue;
        const double qi = q.mass(i);
        if (qi == 0.0) {
            if (alpha > 1.0)
                fail(ErrorCode::AbsoluteContinuityViolation,
                     "renyi_divergence: p has mass at '" + p.support()->label(i) +
                         "' where q has none (alpha > 1)");
            continue;  // p^a q^(1-a) -> 0 for alpha < 1
        }
        s.add(std::pow(pi, alpha) * std::pow(qi, 1.0 - alpha));
    }
    return std::max(0.0, std::log(s.value()) / (alpha - 1.0));
}

namespace {

double divergence(DivergenceMetric metric, const DiscreteDistribution& a,
                  const DiscreteDistribution& b) {
    switch (metric) {
        case DivergenceMetric::KL: return kl_divergence(a, b);
        case DivergenceMetric::TotalVariation: return total_variation(a, b);
    }
    fail(ErrorCode::InvalidArgument, "unknown divergence metric");
}

}  // namespace

double objective_value(const LambdaWeights& lam, const DiscreteDistribution& qx,
                       const AuditContext& ctx, DivergenceMetric metric) {
    require_aligned(qx.support(), ctx.input_support(), "objective_value");
    KahanSum total;
    if (lam.l1 > 0.0) total.add(lam.l1 * divergence(metric, qx, ctx.p0()));
    if (lam.l2 > 0.0) total.add(lam.l2 * divergence(metric, qx, ctx.p1()));
    if (lam.l3 > 0.0 || lam.l4 > 0.0) {
        const DiscreteDistribution qy = pushforward(ctx.channel(), qx);
        if (lam.l3 > 0.0) total.add(lam.l3 * divergence(metric, qy, ctx.q0()));
        if (lam.l4 > 0.0) total.add(lam.l4 * divergence(metric, qy, ctx.q1()));
    }
    return total.value();
}

}  // namespace fairaudit
