#include "fairaudit/perturbation.hpp"

#include <cmath>

#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

constexpr double kExtremeLogRatio = 13.815510557964274;  // log(1e6)

double second_moment(const DiscreteDistribution& p, const ScoreFunction& f) {
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) s.add(p.mass(i) * f.value(i) * f.value(i));
    return s.value();
}

}  // namespace

bool is_feasible_direction(const DiscreteDistribution& p, const ScoreFunction& f, double tol) {
    require_aligned(p.support(), f.support(), "is_feasible_direction");
    const double mean = expectation(p, f);
    if (std::abs(mean) > tol) return false;
    return std::abs(second_moment(p, f) - 1.0) <= tol;
}

ScoreFunction normalize_direction(const DiscreteDistribution& p, const ScoreFunction& f_raw) {
    require_aligned(p.support(), f_raw.support(), "normalize_direction");
    const double mean = expectation(p, f_raw);
    KahanSum var_acc;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = f_raw.value(i) - mean;
        var_acc.add(p.mass(i) * d * d);
    }
    const double var = var_acc.value();
    if (!(var > 0.0) || var < 1e-30)
        fail(ErrorCode::ZeroVariance, "normalize_direction: function is constant p-a.s.");
    const double scale = 1.0 / std::sqrt(var);
    std::vector<double> values(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) values[i] = (f_raw.value(i) - mean) * scale;
    return ScoreFunction(f_raw.support(), std::move(values));
}

double max_epsilon(const DiscreteDistribution& p, const ScoreFunction& f) {
    require_aligned(p.support(), f.support(), "max_epsilon");
    double most_negative = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p.mass(i) > 0.0 && f.value(i) < most_negative) most_negative = f.value(i);
    }
    if (most_negative == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / -most_negative;
}

DiscreteDistribution perturbed_distribution(const DiscreteDistribution& p,
                                            const ScoreFunction& f, double eps) {
    require_aligned(p.support(), f.support(), "perturbed_distribution");
    if (!is_feasible_direction(p, f, 1e-6))
        fail(ErrorCode::InfeasibleDirection,
             "perturbed_distribution: f must have zero mean and unit second moment under p");
    const double cap = max_epsilon(p, f);
    if (!(eps > 0.0) || eps > cap)
        fail(ErrorCode::EpsilonTooLarge,
             "perturbed_distribution: eps must lie in (0, " + format_double(cap) + "]");
    std::vector<double> mass(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        mass[i] = std::max(0.0, p.mass(i) * (1.0 + eps * f.value(i)));
    }
    // E_p[f] = 0 makes the total 1 up to rounding; normalize the residual.
    return make_distribution(p.support(), mass);
}

ScoreFunction induced_output_function(const AuditContext& ctx, const ScoreFunction& f) {
    require_aligned(f.support(), ctx.input_support(), "induced_output_function");
    const std::size_t ny = ctx.output_size();
    std::vector<KahanSum> acc(ny);
    for (std::size_t x = 0; x < ctx.input_size(); ++x) {
        const double w = ctx.p0().mass(x) * f.value(x);
        if (w == 0.0) continue;
        for (std::size_t y = 0; y < ny; ++y) acc[y].add(ctx.channel().prob(x, y) * w);
    }
    std::vector<double> g(ny);
    for (std::size_t y = 0; y < ny; ++y) g[y] = acc[y].value() / ctx.q0().mass(y);
    return ScoreFunction(ctx.output_support(), std::move(g));
}

namespace {

// E_a[f log(a/b)] over the shared support, with continuity and magnitude
// checks on the active ratio.
double weighted_log_ratio_term(const DiscreteDistribution& a, const DiscreteDistribution& b,
                               const ScoreFunction& f, const char* what, Warnings* warnings) {
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double ai = a.mass(i);
        if (ai == 0.0) continue;
        const double bi = b.mass(i);
        if (bi == 0.0)
            fail(ErrorCode::AbsoluteContinuityViolation,
                 std::string(what) + ": reference distribution has no mass at '" +
                     a.support()->label(i) + "'");
        const double ratio = std::log(ai / bi);
        if (warnings && std::abs(ratio) > kExtremeLogRatio) ++warnings->extreme_log_ratio;
        s.add(ai * f.value(i) * ratio);
    }
    return s.value();
}

}  // namespace

double delta_lambda(const LambdaWeights& lam, const AuditContext& ctx, const ScoreFunction& f,
                    Warnings* warnings) {
    require_aligned(f.support(), ctx.input_support(), "delta_lambda");
    if (std::abs(expectation(ctx.p0(), f)) > 1e-6)
        fail(ErrorCode::InfeasibleDirection, "delta_lambda: f must have zero mean under p0");
    KahanSum total;
    if (lam.l2 > 0.0)
        total.add(lam.l2 *
                  weighted_log_ratio_term(ctx.p0(), ctx.p1(), f, "delta_lambda", warnings));
    if (lam.l4 > 0.0) {
        const ScoreFunction g = induced_output_function(ctx, f);
        total.add(lam.l4 *
                  weighted_log_ratio_term(ctx.q0(), ctx.q1(), g, "delta_lambda", warnings));
    }
    return total.value();
}

}  // namespace fairaudit
