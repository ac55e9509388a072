#include "fairaudit/correction.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

constexpr double kLogOddsClip = 27.631021115928547;  // log(1e12)

double clip_log_odds(double v, Warnings* warnings) {
    if (v > kLogOddsClip) {
        if (warnings) ++warnings->clipped_log_odds;
        return kLogOddsClip;
    }
    if (v < -kLogOddsClip) {
        if (warnings) ++warnings->clipped_log_odds;
        return -kLogOddsClip;
    }
    return v;
}

// Centered log(a/b) on the shared support; a-null atoms do not enter the mean.
ScoreFunction centered_log_ratio(const DiscreteDistribution& a, const DiscreteDistribution& b,
                                 const char* what, Warnings* warnings) {
    std::vector<double> raw(a.size());
    {
        std::string violations;
        std::size_t violation_count = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.mass(i) > 0.0 && b.mass(i) == 0.0) {
                if (++violation_count > 1) violations += ", ";
                violations += "'" + a.support()->label(i) + "'";
            }
        }
        if (violation_count > 0)
            fail(ErrorCode::AbsoluteContinuityViolation,
                 std::string(what) + ": comparison distribution has no mass at " +
                     std::to_string(violation_count) + " atom(s): " + violations);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a.mass(i);
        const double bi = b.mass(i);
        if (ai == 0.0 && bi == 0.0) {
            raw[i] = 0.0;
            continue;
        }
        raw[i] = clip_log_odds(ai == 0.0 ? -std::numeric_limits<double>::infinity()
                                         : std::log(ai / bi),
                               warnings);
    }
    KahanSum mean;
    for (std::size_t i = 0; i < a.size(); ++i) mean.add(a.mass(i) * raw[i]);
    const double m = mean.value();
    for (double& v : raw) v -= m;
    return ScoreFunction(a.support(), std::move(raw));
}

double inner(const DiscreteDistribution& w, const ScoreFunction& a, const ScoreFunction& b) {
    KahanSum s;
    for (std::size_t i = 0; i < w.size(); ++i) s.add(w.mass(i) * a.value(i) * b.value(i));
    return s.value();
}

void require_binary_output(const AuditContext& ctx, const char* what) {
    if (ctx.output_size() != 2)
        fail(ErrorCode::UnsupportedOutputAlphabet,
             std::string(what) + ": requires a binary output alphabet, got " +
                 std::to_string(ctx.output_size()) + " atoms");
}

struct Basis {
    ScoreFunction f_l;
    ScoreFunction g_l;
    std::optional<PrincipalPair> principal;
    Warnings warnings;
};

Basis make_basis(const AuditContext& ctx, const std::optional<ScoreFunction>& f_l_override) {
    Warnings w;
    ScoreFunction f_l = [&] {
        if (f_l_override) {
            require_aligned(f_l_override->support(), ctx.input_support(), "correction_function");
            if (std::abs(expectation(ctx.p0(), *f_l_override)) > 1e-6)
                fail(ErrorCode::InfeasibleDirection,
                     "correction_function: supplied f_l must have zero mean under p0");
            return *f_l_override;
        }
        return log_likelihood_ratio_fl(ctx, &w);
    }();
    ScoreFunction g_l = log_likelihood_ratio_gl(ctx, &w);
    std::optional<PrincipalPair> principal;
    try {
        principal = principal_functions(ctx);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::IndependentChannel) throw;
    }
    return Basis{std::move(f_l), std::move(g_l), std::move(principal), w};
}

CorrectionCoefficients coefficients_from(const LambdaWeights& lam, const AuditContext& ctx,
                                         const Basis& basis) {
    if (!(lam.l2 > 0.0) && !(lam.l4 > 0.0))
        fail(ErrorCode::DegenerateObjective,
             "correction requires l2 > 0 or l4 > 0; first-order change is identically zero");
    CorrectionCoefficients c;
    if (basis.principal) {
        const PrincipalPair& pp = *basis.principal;
        c.rho_m = pp.rho_m;
        c.a1 = inner(ctx.p0(), basis.f_l, pp.f_m);
        c.b1 = inner(ctx.q0(), basis.g_l, pp.g_m);
        KahanSum resid;
        for (std::size_t i = 0; i < ctx.input_size(); ++i) {
            const double d = basis.f_l.value(i) - c.a1 * pp.f_m.value(i);
            resid.add(ctx.p0().mass(i) * d * d);
        }
        c.a2 = std::sqrt(std::max(0.0, resid.value()));
    } else {
        // Y carries no signal: the l4 term vanishes for every direction.
        c.a2 = std::sqrt(std::max(0.0, inner(ctx.p0(), basis.f_l, basis.f_l)));
    }
    const double bracket = lam.l2 * c.a1 + lam.l4 * c.rho_m * c.b1;
    c.denom = std::hypot(bracket, lam.l2 * c.a2);
    if (c.denom < 1e-12)
        fail(ErrorCode::DegenerateObjective,
             "no first-order improvement exists for the active terms (optimal change 0)");
    c.n_l = -lam.l2 / c.denom;
    c.n_m = -lam.l4 * c.rho_m * c.b1 / c.denom;
    return c;
}

}  // namespace

ScoreFunction log_likelihood_ratio_fl(const AuditContext& ctx, Warnings* warnings) {
    return centered_log_ratio(ctx.p0(), ctx.p1(), "log_likelihood_ratio_fl", warnings);
}

ScoreFunction log_likelihood_ratio_gl(const AuditContext& ctx, Warnings* warnings) {
    return centered_log_ratio(ctx.q0(), ctx.q1(), "log_likelihood_ratio_gl", warnings);
}

PrincipalPair principal_functions(const AuditContext& ctx) {
    require_binary_output(ctx, "principal_functions");
    const double p = ctx.q0().mass(1);
    if (!(p > 0.0) || !(p < 1.0))
        fail(ErrorCode::DegenerateOutput,
             "principal_functions: q0 is a point mass (q0(1) = " + format_double(p) + ")");
    const double g0 = std::sqrt(p / (1.0 - p));
    const double g1 = -std::sqrt((1.0 - p) / p);
    // E[g_m(Y) | X=x] is affine in W(1|x); its p0-norm is the maximal correlation.
    std::vector<double> cond(ctx.input_size());
    KahanSum rho2;
    for (std::size_t x = 0; x < ctx.input_size(); ++x) {
        cond[x] = (g1 - g0) * ctx.channel().prob(x, 1) + g0;
        rho2.add(ctx.p0().mass(x) * cond[x] * cond[x]);
    }
    const double rho = std::sqrt(std::max(0.0, rho2.value()));
    if (rho < 1e-12)
        fail(ErrorCode::IndependentChannel,
             "principal_functions: output independent of input under p0 (rho_m = 0)");
    for (double& v : cond) v /= rho;
    return PrincipalPair{ScoreFunction(ctx.input_support(), std::move(cond)),
                         ScoreFunction(ctx.output_support(), {g0, g1}), std::min(rho, 1.0)};
}

CorrectionCoefficients correction_coefficients(const LambdaWeights& lam, const AuditContext& ctx) {
    require_binary_output(ctx, "correction_coefficients");
    return coefficients_from(lam, ctx, make_basis(ctx, std::nullopt));
}

CorrectionResult correction_function(const LambdaWeights& lam, const AuditContext& ctx,
                                     const std::optional<ScoreFunction>& f_l_override) {
    require_binary_output(ctx, "correction_function");
    Basis basis = make_basis(ctx, f_l_override);
    const CorrectionCoefficients coef = coefficients_from(lam, ctx, basis);
    std::vector<double> values(ctx.input_size());
    for (std::size_t i = 0; i < ctx.input_size(); ++i) {
        const double fm = basis.principal ? basis.principal->f_m.value(i) : 0.0;
        values[i] = coef.n_l * basis.f_l.value(i) + coef.n_m * fm;
    }
    ScoreFunction f_star(ctx.input_support(), std::move(values));
    if (!is_feasible_direction(ctx.p0(), f_star, 1e-8))
        fail(ErrorCode::Internal,
             "correction_function: constructed direction violates the unit-norm constraint");
    return CorrectionResult{std::move(f_star), coef,           std::move(basis.f_l),
                            std::move(basis.g_l), basis.principal, -coef.denom,
                            basis.warnings};
}

double delta_at_optimum(const LambdaWeights& lam, const AuditContext& ctx) {
    require_binary_output(ctx, "delta_at_optimum");
    try {
        return -coefficients_from(lam, ctx, make_basis(ctx, std::nullopt)).denom;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateObjective) return 0.0;
        throw;
    }
}

ScoreFunction fl_from_membership_model(const AuditContext& ctx,
                                       std::span<const double> posterior_group0,
                                       Warnings* warnings) {
    if (posterior_group0.size() != ctx.input_size())
        fail(ErrorCode::InvalidArgument,
             "fl_from_membership_model: expected " + std::to_string(ctx.input_size()) +
                 " posterior values, got " + std::to_string(posterior_group0.size()));
    std::vector<double> raw(posterior_group0.size());
    for (std::size_t i = 0; i < posterior_group0.size(); ++i) {
        const double p = posterior_group0[i];
        if (!std::isfinite(p) || !(p > 0.0) || !(p < 1.0))
            fail(ErrorCode::DegeneratePosterior,
                 "fl_from_membership_model: posterior at '" + ctx.input_support()->label(i) +
                     "' is " + format_double(p) + ", must lie strictly inside (0, 1)");
        raw[i] = clip_log_odds(std::log(p) - std::log1p(-p), warnings);
    }
    KahanSum mean;
    for (std::size_t i = 0; i < raw.size(); ++i) mean.add(ctx.p0().mass(i) * raw[i]);
    const double m = mean.value();
    for (double& v : raw) v -= m;
    return ScoreFunction(ctx.input_support(), std::move(raw));
}

double delta_lambda_logistic(const LambdaWeights& lam, const AuditContext& ctx,
                             const ScoreFunction& f, std::span<const double> theta,
                             double gamma1) {
    require_aligned(f.support(), ctx.input_support(), "delta_lambda_logistic");
    if (std::abs(expectation(ctx.p0(), f)) > 1e-6)
        fail(ErrorCode::InfeasibleDirection,
             "delta_lambda_logistic: f must have zero mean under p0");
    KahanSum total;
    if (lam.l2 > 0.0 && !theta.empty()) {
        for (std::size_t j = 0; j < theta.size(); ++j) {
            KahanSum e;
            for (std::size_t x = 0; x < ctx.input_size(); ++x) {
                const auto& rep = ctx.input_support()->representative(x);
                if (rep.size() != theta.size())
                    fail(ErrorCode::InvalidArgument,
                         "delta_lambda_logistic: feature vector at '" +
                             ctx.input_support()->label(x) + "' has dimension " +
                             std::to_string(rep.size()) + ", theta has " +
                             std::to_string(theta.size()));
                e.add(ctx.p0().mass(x) * f.value(x) * rep[j]);
            }
            total.add(lam.l2 * theta[j] * e.value());
        }
    }
    if (lam.l4 > 0.0 && gamma1 != 0.0) {
        require_binary_output(ctx, "delta_lambda_logistic");
        const ScoreFunction g = induced_output_function(ctx, f);
        total.add(lam.l4 * gamma1 * g.value(1) * ctx.q0().mass(1));
    }
    return total.value();
}

}  // namespace fairaudit
