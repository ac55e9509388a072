#include "fairaudit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fairaudit/divergence.hpp"
#include "fairaudit/numeric.hpp"

namespace fairaudit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Local centering + unit-norm scaling so the oracle does not lean on the
// module it verifies. Returns false when the vector is p-a.s. constant.
bool center_normalize(const DiscreteDistribution& p, std::vector<double>& v) {
    KahanSum mean;
    for (std::size_t i = 0; i < v.size(); ++i) mean.add(p.mass(i) * v[i]);
    const double mu = mean.value();
    KahanSum ss;
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] -= mu;
        ss.add(p.mass(i) * v[i] * v[i]);
    }
    const double norm = std::sqrt(std::max(0.0, ss.value()));
    if (norm < 1e-14) return false;
    for (double& x : v) x /= norm;
    return true;
}

double p_inner(const DiscreteDistribution& p, const std::vector<double>& a,
               const std::vector<double>& b) {
    KahanSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(p.mass(i) * a[i] * b[i]);
    return s.value();
}

}  // namespace

double finite_difference_delta(const LambdaWeights& lam, const AuditContext& ctx,
                               const ScoreFunction& f, double eps) {
    const DiscreteDistribution perturbed = perturbed_distribution(ctx.p0(), f, eps);
    const double base = objective_value(lam, ctx.p0(), ctx);
    const double moved = objective_value(lam, perturbed, ctx);
    return (moved - base) / eps;
}

double richardson_delta(const LambdaWeights& lam, const AuditContext& ctx,
                        const ScoreFunction& f, std::span<const double> eps_ladder) {
    if (eps_ladder.empty())
        fail(ErrorCode::InvalidArgument, "richardson_delta: eps ladder must be nonempty");
    const std::size_t k = eps_ladder.size();
    std::vector<double> x(eps_ladder.begin(), eps_ladder.end());
    std::vector<double> p(k);
    for (std::size_t i = 0; i < k; ++i) {
        if (!(x[i] > 0.0))
            fail(ErrorCode::InvalidArgument, "richardson_delta: eps values must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (x[i] == x[j])
                fail(ErrorCode::InvalidArgument, "richardson_delta: eps values must be distinct");
        p[i] = finite_difference_delta(lam, ctx, f, x[i]);
    }
    // Neville's scheme evaluated at eps = 0.
    for (std::size_t level = 1; level < k; ++level)
        for (std::size_t i = 0; i + level < k; ++i)
            p[i] = (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i]);
    return p[0];
}

BruteForceResult brute_force_min_delta(const LambdaWeights& lam, const AuditContext& ctx,
                                       std::size_t samples, bool polish, std::uint64_t seed) {
    const std::size_t n = ctx.input_size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto delta_of = [&](const std::vector<double>& v) {
        return delta_lambda(lam, ctx, ScoreFunction(ctx.input_support(), v));
    };

    std::vector<double> best;
    double best_delta = kInf;
    std::vector<double> draw(n);
    for (std::size_t s = 0; s < samples; ++s) {
        for (double& x : draw) x = gauss(rng);
        std::vector<double> cand = draw;
        if (!center_normalize(ctx.p0(), cand)) continue;
        const double d = delta_of(cand);
        if (d < best_delta) {
            best_delta = d;
            best = std::move(cand);
        }
    }
    if (best.empty()) {
        // Pathological sampling (e.g. single-atom support): fall back to zero
        // delta with an arbitrary feasible direction if one exists at all.
        fail(ErrorCode::ZeroVariance,
             "brute_force_min_delta: no feasible direction found by sampling");
    }

    if (polish) {
        // The first-order change is linear in the direction, so its gradient
        // in the p0-weighted geometry is a fixed vector; recover it by
        // evaluating the functional on centered coordinate indicators.
        std::vector<double> grad(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = ctx.p0().mass(i);
            if (pi == 0.0) continue;
            // centered coordinate indicator: e_i - E_p0[e_i]
            std::vector<double> basis(n, -pi);
            basis[i] += 1.0;
            grad[i] = delta_of(basis) / pi;
        }
        for (int iter = 0; iter < 200; ++iter) {
            std::vector<double> dir(n);
            const double along = p_inner(ctx.p0(), grad, best);
            for (std::size_t i = 0; i < n; ++i) dir[i] = -(grad[i] - along * best[i]);
            const double dir_norm = std::sqrt(std::max(0.0, p_inner(ctx.p0(), dir, dir)));
            if (dir_norm < 1e-14) break;
            double eta = 1.0;
            bool improved = false;
            while (eta > 1e-16) {
                std::vector<double> cand(n);
                for (std::size_t i = 0; i < n; ++i) cand[i] = best[i] + eta * dir[i];
                if (center_normalize(ctx.p0(), cand)) {
                    const double d = delta_of(cand);
                    if (d < best_delta) {
                        best = std::move(cand);
                        best_delta = d;
                        improved = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if (!improved) break;
        }
    }
    return BruteForceResult{ScoreFunction(ctx.input_support(), std::move(best)), best_delta};
}

namespace {

// Cyclic Jacobi eigenvalues of a small symmetric matrix, descending order.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t k = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < k; ++i) {
                    const double aip = a[i][p];
                    const double aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double api = a[p][i];
                    const double aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> ev(k);
    for (std::size_t i = 0; i < k; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

}  // namespace

double maximal_correlation_svd(const AuditContext& ctx) {
    const std::size_t n = ctx.input_size();
    const std::size_t m = ctx.output_size();
    // B[y][x] = W(y|x) sqrt(p0(x)) / sqrt(q0(y)). Its top singular pair is
    // always (sqrt(q0), sqrt(p0)) with value 1; deflate it so the second
    // singular value becomes the *largest* eigenvalue of the Gram, which
    // stays well conditioned when it is near zero.
    std::vector<std::vector<double>> b(m, std::vector<double>(n));
    for (std::size_t y = 0; y < m; ++y) {
        const double sq = std::sqrt(ctx.q0().mass(y));
        for (std::size_t x = 0; x < n; ++x) {
            const double sp = std::sqrt(ctx.p0().mass(x));
            b[y][x] = ctx.channel().prob(x, y) * sp / sq - sq * sp;
        }
    }
    const std::size_t k = std::min(n, m);
    std::vector<std::vector<double>> gram(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            KahanSum s;
            if (m <= n)
                for (std::size_t x = 0; x < n; ++x) s.add(b[i][x] * b[j][x]);
            else
                for (std::size_t y = 0; y < m; ++y) s.add(b[y][i] * b[y][j]);
            gram[i][j] = gram[j][i] = s.value();
        }
    }
    const std::vector<double> ev = jacobi_eigenvalues(std::move(gram));
    return std::clamp(std::sqrt(std::max(0.0, ev.front())), 0.0, 1.0);
}

namespace {

struct GridState {
    const LambdaWeights& lam;
    const AuditContext& ctx;
    std::size_t resolution;
    std::vector<double> lp0, lp1, lq0, lq1;
    std::vector<std::size_t> counts;
    std::vector<std::size_t> best_counts;
    double best = kInf;

    // Objective at the lattice point, +inf when an active term diverges.
    double eval() const {
        const std::size_t n = counts.size();
        const std::size_t m = ctx.output_size();
        const double r = static_cast<double>(resolution);
        KahanSum obj;
        for (std::size_t x = 0; x < n; ++x) {
            if (counts[x] == 0) continue;
            const double qx = counts[x] / r;
            const double lq = std::log(qx);
            if (lam.l1 > 0.0) {
                if (lp0[x] == -kInf) return kInf;
                obj.add(lam.l1 * qx * (lq - lp0[x]));
            }
            if (lam.l2 > 0.0) {
                if (lp1[x] == -kInf) return kInf;
                obj.add(lam.l2 * qx * (lq - lp1[x]));
            }
        }
        if (lam.l3 > 0.0 || lam.l4 > 0.0) {
            for (std::size_t y = 0; y < m; ++y) {
                KahanSum push;
                for (std::size_t x = 0; x < n; ++x)
                    if (counts[x] != 0) push.add(ctx.channel().prob(x, y) * (counts[x] / r));
                const double qy = push.value();
                if (qy <= 0.0) continue;
                const double lq = std::log(qy);
                if (lam.l3 > 0.0) {
                    if (lq0[y] == -kInf) return kInf;
                    obj.add(lam.l3 * qy * (lq - lq0[y]));
                }
                if (lam.l4 > 0.0) {
                    if (lq1[y] == -kInf) return kInf;
                    obj.add(lam.l4 * qy * (lq - lq1[y]));
                }
            }
        }
        return std::max(0.0, obj.value());
    }

    void recurse(std::size_t x, std::size_t remaining) {
        if (x + 1 == counts.size()) {
            counts[x] = remaining;
            const double v = eval();
            if (v < best) {
                best = v;
                best_counts = counts;
            }
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[x] = c;
            recurse(x + 1, remaining - c);
        }
    }
};

std::vector<double> log_or_neg_inf(const DiscreteDistribution& d) {
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        out[i] = d.mass(i) > 0.0 ? std::log(d.mass(i)) : -kInf;
    return out;
}

}  // namespace

GridResult grid_simplex_min(const LambdaWeights& lam, const AuditContext& ctx,
                            std::size_t resolution) {
    if (resolution == 0)
        fail(ErrorCode::InvalidArgument, "grid_simplex_min: resolution must be >= 1");
    GridState st{lam,
                 ctx,
                 resolution,
                 log_or_neg_inf(ctx.p0()),
                 log_or_neg_inf(ctx.p1()),
                 log_or_neg_inf(ctx.q0()),
                 log_or_neg_inf(ctx.q1()),
                 std::vector<std::size_t>(ctx.input_size(), 0),
                 {},
                 kInf};
    st.recurse(0, resolution);
    if (!std::isfinite(st.best))
        fail(ErrorCode::AbsoluteContinuityViolation,
             "grid_simplex_min: every lattice point makes an active term infinite");
    std::vector<double> mass(st.best_counts.size());
    for (std::size_t i = 0; i < mass.size(); ++i)
        mass[i] = static_cast<double>(st.best_counts[i]) / static_cast<double>(resolution);
    return GridResult{make_distribution(ctx.input_support(), mass), st.best};
}

}  // namespace fairaudit
