#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "fairaudit/context.hpp"
#include "fairaudit/divergence.hpp"
#include "fairaudit/score.hpp"

namespace fairaudit {

struct SolverConfig {
    std::size_t max_iters = 10000;
    double rel_tol = 1e-10;        // relative objective decrease treated as converged
    double interior_floor = 1e-12; // minimum mass kept on admissible atoms
    double step_init = 1.0;        // Armijo backtracking start
    double step_shrink = 0.5;
    double armijo_c = 1e-4;

    void validate() const;
};

// One solved point of the trade-off curve. divergences holds
// (KL(qx||p0), KL(qx||p1), KL(qy||q0), KL(qy||q1)); entries whose weight is
// zero may be +infinity when the corresponding KL genuinely diverges.
struct PathPoint {
    DiscreteDistribution qx;
    DiscreteDistribution qy;
    std::array<double, 4> divergences{};
    LambdaWeights lam;
    double objective = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    bool non_unique = false;  // l1 = l2 = 0: minimizers form a preimage set
};

// Minimizes l1 KL(q||p0) + l2 KL(q||p1) + l3 KL(Wq||q0) + l4 KL(Wq||q1)
// over the simplex by exponentiated gradient with Armijo backtracking.
// Atoms that would make an active term infinite are fixed at zero mass; if
// every atom is excluded the problem is infeasible
// (AbsoluteContinuityViolation). Hitting max_iters returns the best iterate
// with converged = false rather than throwing.
PathPoint solve_correction_path(const LambdaWeights& lam, const AuditContext& ctx,
                                const SolverConfig& cfg = {});

// Solves the schedule in order, warm-starting each point from the previous
// solution (re-projected onto the new admissible set).
std::vector<PathPoint> trace_path(const std::vector<LambdaWeights>& schedule,
                                  const AuditContext& ctx, const SolverConfig& cfg = {});

// Agreement between the solver's first multiplicative step away from p0 and
// the closed-form optimal direction.
struct DirectionConsistency {
    bool degenerate = false;  // no first-order improvement (zero gradient)
    double cosine = 0.0;      // p0-weighted cosine between step direction and f_star
    double probe_step = 0.0;
};

DirectionConsistency local_direction_consistency(const LambdaWeights& lam,
                                                 const AuditContext& ctx,
                                                 const SolverConfig& cfg = {},
                                                 double probe_step = 1e-4);

}  // namespace fairaudit
