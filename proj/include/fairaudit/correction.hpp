#pragma once

#include <optional>
#include <span>

#include "fairaudit/context.hpp"
#include "fairaudit/perturbation.hpp"
#include "fairaudit/score.hpp"

namespace fairaudit {

// Unit-norm principal pair of the conditional-expectation operator between
// functions of X (under p0) and functions of a binary Y (under q0), with the
// sign fixed by g_m(0) >= 0.
struct PrincipalPair {
    ScoreFunction f_m;  // on the input support; zero mean, unit second moment under p0
    ScoreFunction g_m;  // on the output support; zero mean, unit second moment under q0
    double rho_m = 0.0;  // maximal correlation, in [0, 1]
};

struct CorrectionCoefficients {
    double a1 = 0.0;     // <f_l, f_m> under p0
    double a2 = 0.0;     // p0-norm of the component of f_l orthogonal to f_m
    double b1 = 0.0;     // <g_l, g_m> under q0
    double rho_m = 0.0;  // 0 when the channel carries no signal
    double denom = 0.0;  // sqrt((l2*a1 + l4*rho_m*b1)^2 + (l2*a2)^2)
    double n_l = 0.0;    // -l2 / denom
    double n_m = 0.0;    // -l4 * rho_m * b1 / denom
};

struct CorrectionResult {
    ScoreFunction f_star;  // n_l*f_l + n_m*f_m; zero mean, unit second moment under p0
    CorrectionCoefficients coef;
    ScoreFunction f_l;  // centered input log-likelihood ratio actually used
    ScoreFunction g_l;  // centered output log-likelihood ratio
    std::optional<PrincipalPair> principal;  // empty when Y is independent of X
    double delta_opt = 0.0;                  // -denom; first-order change along f_star
    Warnings warnings;
};

// Centered log(p0/p1) on the input support. Zero mean under p0; not unit
// second moment in general. Log ratios are clipped at +/- log(1e12) (counted
// in *warnings); atoms where both masses vanish get value 0.
ScoreFunction log_likelihood_ratio_fl(const AuditContext& ctx, Warnings* warnings = nullptr);

// Centered log(q0/q1) on the output support, same clipping policy.
ScoreFunction log_likelihood_ratio_gl(const AuditContext& ctx, Warnings* warnings = nullptr);

// Closed-form principal pair for binary Y (output index 1 plays the role of
// Y=1). Throws UnsupportedOutputAlphabet unless |Y| = 2, DegenerateOutput if
// q0(1) is 0 or 1, IndependentChannel if the maximal correlation is < 1e-12.
PrincipalPair principal_functions(const AuditContext& ctx);

// Coefficients of the optimal direction for the active (l2, l4) terms.
// Falls back to the channel-free solution (rho_m = b1 = 0) when the channel
// carries no signal. Throws DegenerateObjective when no first-order
// improvement exists (denom < 1e-12).
CorrectionCoefficients correction_coefficients(const LambdaWeights& lam, const AuditContext& ctx);

// Optimal unit perturbation direction f_star = n_l*f_l + n_m*f_m and its
// first-order objective change. When f_l_override is given it replaces the
// context-derived f_l (e.g. a model-based posterior log-odds); it must be
// zero mean under p0.
CorrectionResult correction_function(const LambdaWeights& lam, const AuditContext& ctx,
                                     const std::optional<ScoreFunction>& f_l_override = std::nullopt);

// -denom, the minimum of delta_lambda over unit zero-mean directions.
// Returns 0 when the objective is degenerate (nothing to improve).
double delta_at_optimum(const LambdaWeights& lam, const AuditContext& ctx);

// f_l from a group-membership model: centered log odds of posterior_group0,
// the modelled P(S=0 | X=x) per input atom. Throws DegeneratePosterior on
// probabilities outside (0, 1); clips odds at +/- log(1e12) with a warning.
ScoreFunction fl_from_membership_model(const AuditContext& ctx,
                                       std::span<const double> posterior_group0,
                                       Warnings* warnings = nullptr);

// First-order objective change via the bilinear shortcut valid when both
// P(S|X) and P(S|Y) are exactly logistic: l2 * sum_i theta[i]*E_p0[f*X_i] +
// l4 * gamma1 * E_q0[g*Y]. Input atoms must carry numeric feature vectors of
// the same dimension as theta; Y must be binary when l4 > 0.
double delta_lambda_logistic(const LambdaWeights& lam, const AuditContext& ctx,
                             const ScoreFunction& f, std::span<const double> theta, double gamma1);

}  // namespace fairaudit
