#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "fairaudit/divergence.hpp"
#include "fairaudit/perturbation.hpp"
#include "helpers.hpp"

using namespace fairaudit;
using fairaudit::test::random_context;
using fairaudit::test::random_direction;
using fairaudit::test::two_cell;

static ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

TEST_CASE("feasible-direction membership") {
    const AuditContext ctx = two_cell();
    const ScoreFunction good(ctx.input_support(), {0.5, -2.0});
    CHECK(is_feasible_direction(ctx.p0(), good));
    CHECK_FALSE(is_feasible_direction(ctx.p0(), ScoreFunction(ctx.input_support(), {1.0, 1.0})));
    CHECK_FALSE(is_feasible_direction(ctx.p0(), ScoreFunction(ctx.input_support(), {1.0, -4.0})));
}

TEST_CASE("normalize_direction centers and scales") {
    const AuditContext ctx = two_cell();
    // Raw (1, -1) under p0 = (0.8, 0.2): mean 0.6, sd 0.8 -> exactly (0.5, -2).
    const ScoreFunction f =
        normalize_direction(ctx.p0(), ScoreFunction(ctx.input_support(), {1.0, -1.0}));
    CHECK(f.value(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(f.value(1) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(code_of([&] {
              normalize_direction(ctx.p0(), ScoreFunction(ctx.input_support(), {3.0, 3.0}));
          }) == ErrorCode::ZeroVariance);
}

TEST_CASE("max_epsilon is the nonnegativity cap") {
    const AuditContext ctx = two_cell();
    CHECK(max_epsilon(ctx.p0(), ScoreFunction(ctx.input_support(), {0.5, -2.0})) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::isinf(max_epsilon(ctx.p0(), ScoreFunction(ctx.input_support(), {0.5, 2.0}))));
}

TEST_CASE("perturbed_distribution applies the multiplicative tilt") {
    const AuditContext ctx = two_cell();
    const ScoreFunction f(ctx.input_support(), {0.5, -2.0});
    const auto tilted = perturbed_distribution(ctx.p0(), f, 0.25);
    CHECK(tilted.mass(0) == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(tilted.mass(1) == doctest::Approx(0.1).epsilon(1e-14));

    // The cap itself is allowed: the atom lands exactly at zero mass.
    const auto boundary = perturbed_distribution(ctx.p0(), f, 0.5);
    CHECK(boundary.mass(1) == 0.0);

    CHECK(code_of([&] { perturbed_distribution(ctx.p0(), f, 0.6); }) ==
          ErrorCode::EpsilonTooLarge);
    CHECK(code_of([&] {
              perturbed_distribution(ctx.p0(),
                                     ScoreFunction(ctx.input_support(), {1.0, 1.0}), 0.1);
          }) == ErrorCode::InfeasibleDirection);
}

TEST_CASE("induced output function is the conditional mean") {
    const AuditContext ctx = two_cell();
    const ScoreFunction f(ctx.input_support(), {0.5, -2.0});
    const ScoreFunction g = induced_output_function(ctx, f);
    // (0.5*0.25*0.8 - 2*0.9*0.2)/0.38 and (0.5*0.75*0.8 - 2*0.1*0.2)/0.62.
    CHECK(g.value(0) == doctest::Approx(-0.6842105263157895).epsilon(1e-14));
    CHECK(g.value(1) == doctest::Approx(0.4193548387096774).epsilon(1e-14));
    CHECK(std::abs(expectation(ctx.q0(), g)) < 1e-14);
}

TEST_CASE("delta_lambda: frozen value and structure") {
    const AuditContext ctx = two_cell();
    const ScoreFunction f(ctx.input_support(), {0.5, -2.0});
    CHECK(delta_lambda(LambdaWeights(0, 1, 0, 1), ctx, f) ==
          doctest::Approx(1.5504789410191548).epsilon(1e-13));
    CHECK(delta_lambda(LambdaWeights(0, 0, 0, 0), ctx, f) == 0.0);

    SUBCASE("linearity in the direction") {
        std::mt19937_64 rng(11);
        const AuditContext big = random_context(rng, 5);
        const LambdaWeights lam(0, 1.3, 0, 0.7);
        const ScoreFunction f1 = random_direction(rng, big.p0());
        const ScoreFunction f2 = random_direction(rng, big.p0());
        std::vector<double> sum(5);
        for (std::size_t i = 0; i < 5; ++i) sum[i] = 0.4 * f1.value(i) - 1.7 * f2.value(i);
        const double lhs =
            delta_lambda(lam, big, ScoreFunction(big.input_support(), std::move(sum)));
        const double rhs =
            0.4 * delta_lambda(lam, big, f1) - 1.7 * delta_lambda(lam, big, f2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    SUBCASE("requires zero mean") {
        CHECK(code_of([&] {
                  delta_lambda(LambdaWeights(0, 1, 0, 1), ctx,
                               ScoreFunction(ctx.input_support(), {1.0, 1.0}));
              }) == ErrorCode::InfeasibleDirection);
    }

    SUBCASE("inactive terms are never evaluated") {
        SupportPtr in = make_support({"a", "b"});
        SupportPtr out = make_support({"0", "1"});
        // p1 misses an atom p0 uses: the l2 term would diverge.
        const AuditContext gappy(make_distribution(in, {0.5, 0.5}),
                                 make_distribution(in, {1.0, 0.0}),
                                 Channel(in, out, {{0.3, 0.7}, {0.4, 0.6}}));
        const ScoreFunction f(in, {1.0, -1.0});
        CHECK_NOTHROW(delta_lambda(LambdaWeights(0, 0, 0, 1), gappy, f));
        CHECK(code_of([&] { delta_lambda(LambdaWeights(0, 1, 0, 0), gappy, f); }) ==
              ErrorCode::AbsoluteContinuityViolation);
    }
}

TEST_CASE("self-divergence of a small tilt is quadratic") {
    const AuditContext ctx = two_cell();
    const ScoreFunction f(ctx.input_support(), {0.5, -2.0});
    const double eps = 1e-4;
    const double ratio = kl_divergence(perturbed_distribution(ctx.p0(), f, eps), ctx.p0()) /
                         (eps * eps);
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}
