#include "fairaudit/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "fairaudit/correction.hpp"
#include "fairaudit/numeric.hpp"

namespace fairaudit {

void SolverConfig::validate() const {
    if (max_iters == 0 || !(rel_tol > 0.0) || !(interior_floor > 0.0) || !(step_init > 0.0) ||
        !(step_shrink > 0.0) || step_shrink >= 1.0 || !(armijo_c > 0.0))
        fail(ErrorCode::InvalidArgument,
             "SolverConfig: parameters must be positive, step_shrink in (0,1)");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Exponentiated-gradient minimization of the four-term KL objective over the
// simplex, restricted to atoms where every active term stays finite.
class EgSolver {
public:
    EgSolver(const LambdaWeights& lam, const AuditContext& ctx, const SolverConfig& cfg)
        : lam_(lam), ctx_(ctx), cfg_(cfg), n_(ctx.input_size()), m_(ctx.output_size()) {
        cfg.validate();
        allowed_.assign(n_, true);
        if (lam_.l1 > 0.0)
            for (std::size_t x = 0; x < n_; ++x)
                if (ctx_.p0().mass(x) == 0.0) allowed_[x] = false;
        if (lam_.l2 > 0.0)
            for (std::size_t x = 0; x < n_; ++x)
                if (ctx_.p1().mass(x) == 0.0) allowed_[x] = false;
        // An active output term with a zero-mass target excludes every input
        // atom that can reach that output.
        for (std::size_t y = 0; y < m_; ++y) {
            const bool dead3 = lam_.l3 > 0.0 && ctx_.q0().mass(y) == 0.0;
            const bool dead4 = lam_.l4 > 0.0 && ctx_.q1().mass(y) == 0.0;
            if (!dead3 && !dead4) continue;
            for (std::size_t x = 0; x < n_; ++x)
                if (ctx_.channel().prob(x, y) > 0.0) allowed_[x] = false;
        }
        if (std::none_of(allowed_.begin(), allowed_.end(), [](bool b) { return b; }))
            fail(ErrorCode::AbsoluteContinuityViolation,
                 "solve_correction_path: every input atom makes an active term infinite");
    }

    // Zeroes excluded atoms, floors the rest, renormalizes. False when the
    // input carries no admissible mass.
    bool project(std::vector<double>& q) const {
        KahanSum total;
        for (std::size_t x = 0; x < n_; ++x) {
            if (!allowed_[x])
                q[x] = 0.0;
            else
                total.add(q[x] = std::max(q[x], cfg_.interior_floor));
        }
        const double t = total.value();
        if (!(t > 0.0)) return false;
        for (double& v : q) v /= t;
        return true;
    }

    std::vector<double> initial_point() const {
        std::vector<double> q(n_, 0.0);
        for (std::size_t x = 0; x < n_; ++x) {
            if (!allowed_[x]) continue;
            if (lam_.l1 > 0.0 && lam_.l2 > 0.0)
                q[x] = std::sqrt(ctx_.p0().mass(x) * ctx_.p1().mass(x));
            else if (lam_.l1 > 0.0)
                q[x] = ctx_.p0().mass(x);
            else if (lam_.l2 > 0.0)
                q[x] = ctx_.p1().mass(x);
            else
                q[x] = 1.0;
        }
        if (!project(q))
            fail(ErrorCode::Internal, "solve_correction_path: empty initial point");
        return q;
    }

    std::vector<double> push(const std::vector<double>& q) const {
        std::vector<KahanSum> acc(m_);
        for (std::size_t x = 0; x < n_; ++x) {
            if (q[x] == 0.0) continue;
            for (std::size_t y = 0; y < m_; ++y) acc[y].add(ctx_.channel().prob(x, y) * q[x]);
        }
        std::vector<double> qy(m_);
        for (std::size_t y = 0; y < m_; ++y) qy[y] = acc[y].value();
        return qy;
    }

    double objective(const std::vector<double>& q, const std::vector<double>& qy) const {
        KahanSum s;
        auto add_kl = [&s](double w, const std::vector<double>& a, auto target) {
            if (!(w > 0.0)) return;
            KahanSum kl;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i] > 0.0) kl.add(a[i] * std::log(a[i] / target(i)));
            s.add(w * std::max(0.0, kl.value()));
        };
        add_kl(lam_.l1, q, [&](std::size_t i) { return ctx_.p0().mass(i); });
        add_kl(lam_.l2, q, [&](std::size_t i) { return ctx_.p1().mass(i); });
        add_kl(lam_.l3, qy, [&](std::size_t i) { return ctx_.q0().mass(i); });
        add_kl(lam_.l4, qy, [&](std::size_t i) { return ctx_.q1().mass(i); });
        return s.value();
    }

    std::vector<double> gradient(const std::vector<double>& q,
                                 const std::vector<double>& qy) const {
        std::vector<double> out_part(m_, 0.0);
        for (std::size_t y = 0; y < m_; ++y) {
            if (qy[y] <= 0.0) continue;  // unreachable from admissible atoms
            double v = 0.0;
            if (lam_.l3 > 0.0) v += lam_.l3 * (std::log(qy[y] / ctx_.q0().mass(y)) + 1.0);
            if (lam_.l4 > 0.0) v += lam_.l4 * (std::log(qy[y] / ctx_.q1().mass(y)) + 1.0);
            out_part[y] = v;
        }
        std::vector<double> g(n_, 0.0);
        for (std::size_t x = 0; x < n_; ++x) {
            if (!allowed_[x]) continue;
            double v = 0.0;
            if (lam_.l1 > 0.0) v += lam_.l1 * (std::log(q[x] / ctx_.p0().mass(x)) + 1.0);
            if (lam_.l2 > 0.0) v += lam_.l2 * (std::log(q[x] / ctx_.p1().mass(x)) + 1.0);
            if (lam_.l3 > 0.0 || lam_.l4 > 0.0) {
                KahanSum mix;
                for (std::size_t y = 0; y < m_; ++y)
                    mix.add(ctx_.channel().prob(x, y) * out_part[y]);
                v += mix.value();
            }
            g[x] = v;
        }
        return g;
    }

    std::vector<double> step(const std::vector<double>& q, const std::vector<double>& g,
                             double t) const {
        double lo = kInf;
        for (std::size_t x = 0; x < n_; ++x)
            if (allowed_[x]) lo = std::min(lo, g[x]);
        std::vector<double> next(n_, 0.0);
        for (std::size_t x = 0; x < n_; ++x)
            if (allowed_[x]) next[x] = q[x] * std::exp(-t * (g[x] - lo));
        if (!project(next))
            fail(ErrorCode::Internal, "solve_correction_path: step lost all mass");
        return next;
    }

    // Weighted stationarity measure: max_x q_x |g_x - E_q[g]|, zero at a
    // KKT point of the simplex-constrained problem.
    double stationarity(const std::vector<double>& q, const std::vector<double>& g) const {
        KahanSum mean;
        for (std::size_t x = 0; x < n_; ++x) mean.add(q[x] * g[x]);
        const double gbar = mean.value();
        double s = 0.0;
        for (std::size_t x = 0; x < n_; ++x) s = std::max(s, q[x] * std::abs(g[x] - gbar));
        return s / (1.0 + std::abs(gbar));
    }

    PathPoint run(std::optional<std::vector<double>> warm) const {
        std::vector<double> q;
        if (warm && warm->size() == n_ && project(*warm))
            q = std::move(*warm);
        else
            q = initial_point();
        std::vector<double> qy = push(q);
        double obj = objective(q, qy);
        bool converged = false;
        std::size_t iters = 0;
        while (iters < cfg_.max_iters) {
            const std::vector<double> g = gradient(q, qy);
            if (stationarity(q, g) <= 1e-13) {
                converged = true;
                break;
            }
            ++iters;
            double t = cfg_.step_init;
            bool accepted = false;
            std::vector<double> cand;
            std::vector<double> cand_qy;
            double cand_obj = 0.0;
            while (t >= 1e-18) {
                cand = step(q, g, t);
                cand_qy = push(cand);
                cand_obj = objective(cand, cand_qy);
                KahanSum pred;  // first-order predicted decrease, >= 0 up to rounding
                for (std::size_t x = 0; x < n_; ++x) pred.add(g[x] * (q[x] - cand[x]));
                if (cand_obj <= obj - cfg_.armijo_c * std::max(0.0, pred.value())) {
                    accepted = true;
                    break;
                }
                t *= cfg_.step_shrink;
            }
            if (!accepted) {  // no descent at any step length: numerically stationary
                converged = true;
                break;
            }
            const double decrease = obj - cand_obj;
            q = std::move(cand);
            qy = std::move(cand_qy);
            obj = cand_obj;
            if (decrease <= cfg_.rel_tol * std::max(1.0, std::abs(obj))) {
                converged = true;
                break;
            }
        }
        return finish(std::move(q), converged, iters);
    }

    PathPoint finish(std::vector<double> q, bool converged, std::size_t iters) const {
        DiscreteDistribution qx = make_distribution(ctx_.input_support(), q);
        DiscreteDistribution qy = pushforward(ctx_.channel(), qx);
        auto safe_kl = [](const DiscreteDistribution& a, const DiscreteDistribution& b) {
            try {
                return kl_divergence(a, b);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::AbsoluteContinuityViolation) return kInf;
                throw;
            }
        };
        std::array<double, 4> div{safe_kl(qx, ctx_.p0()), safe_kl(qx, ctx_.p1()),
                                  safe_kl(qy, ctx_.q0()), safe_kl(qy, ctx_.q1())};
        const double weights[4] = {lam_.l1, lam_.l2, lam_.l3, lam_.l4};
        KahanSum obj;
        for (int i = 0; i < 4; ++i)
            if (weights[i] > 0.0) obj.add(weights[i] * div[i]);
        return PathPoint{std::move(qx), std::move(qy), div,       lam_,
                         obj.value(),   iters,         converged, lam_.l1 + lam_.l2 == 0.0};
    }

    const LambdaWeights lam_;
    const AuditContext& ctx_;
    const SolverConfig cfg_;
    std::size_t n_;
    std::size_t m_;
    std::vector<bool> allowed_;
};

}  // namespace

PathPoint solve_correction_path(const LambdaWeights& lam, const AuditContext& ctx,
                                const SolverConfig& cfg) {
    return EgSolver(lam, ctx, cfg).run(std::nullopt);
}

std::vector<PathPoint> trace_path(const std::vector<LambdaWeights>& schedule,
                                  const AuditContext& ctx, const SolverConfig& cfg) {
    if (schedule.empty())
        fail(ErrorCode::InvalidArgument, "trace_path: schedule must be nonempty");
    std::vector<PathPoint> points;
    points.reserve(schedule.size());
    std::optional<std::vector<double>> warm;
    for (const LambdaWeights& lam : schedule) {
        points.push_back(EgSolver(lam, ctx, cfg).run(warm));
        warm = points.back().qx.masses();
    }
    return points;
}

DirectionConsistency local_direction_consistency(const LambdaWeights& lam,
                                                 const AuditContext& ctx,
                                                 const SolverConfig& cfg, double probe_step) {
    if (!(probe_step > 0.0))
        fail(ErrorCode::InvalidArgument, "local_direction_consistency: probe_step must be > 0");
    std::optional<CorrectionResult> corr;
    try {
        corr = correction_function(lam, ctx);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::DegenerateObjective)
            return DirectionConsistency{true, 0.0, probe_step};
        throw;
    }
    EgSolver solver(lam, ctx, cfg);
    std::vector<double> q = ctx.p0().masses();
    if (!solver.project(q)) return DirectionConsistency{true, 0.0, probe_step};
    const std::vector<double> qy = solver.push(q);
    const std::vector<double> g = solver.gradient(q, qy);
    const std::vector<double> next = solver.step(q, g, probe_step);
    std::vector<double> f_step(q.size(), 0.0);
    for (std::size_t x = 0; x < q.size(); ++x)
        if (q[x] > 0.0) f_step[x] = (next[x] - q[x]) / (probe_step * q[x]);
    KahanSum mean;
    for (std::size_t x = 0; x < q.size(); ++x) mean.add(ctx.p0().mass(x) * f_step[x]);
    const double mu = mean.value();
    KahanSum dot, norm2;
    for (std::size_t x = 0; x < q.size(); ++x) {
        const double v = f_step[x] - mu;
        dot.add(ctx.p0().mass(x) * v * corr->f_star.value(x));
        norm2.add(ctx.p0().mass(x) * v * v);
    }
    const double norm = std::sqrt(std::max(0.0, norm2.value()));
    if (norm < 1e-15) return DirectionConsistency{true, 0.0, probe_step};
    return DirectionConsistency{false, dot.value() / norm, probe_step};
}

}  // namespace fairaudit
