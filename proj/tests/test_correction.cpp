#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fairaudit/correction.hpp"
#include "fairaudit/perturbation.hpp"
#include "helpers.hpp"

using namespace fairaudit;
using fairaudit::test::no_disparity;
using fairaudit::test::random_context;
using fairaudit::test::random_direction;
using fairaudit::test::three_cell;
using fairaudit::test::two_cell;

static ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

TEST_CASE("log-likelihood-ratio functions: frozen 2-cell values") {
    const AuditContext ctx = two_cell();
    const ScoreFunction fl = log_likelihood_ratio_fl(ctx);
    CHECK(fl.value(0) == doctest::Approx(0.5545177444479563).epsilon(1e-14));
    CHECK(fl.value(1) == doctest::Approx(-2.218070977791825).epsilon(1e-14));
    CHECK(std::abs(expectation(ctx.p0(), fl)) < 1e-14);

    const ScoreFunction gl = log_likelihood_ratio_gl(ctx);
    CHECK(gl.value(0) == doctest::Approx(-1.052672847370809).epsilon(1e-14));
    CHECK(gl.value(1) == doctest::Approx(0.6451865838724311).epsilon(1e-14));
    CHECK(std::abs(expectation(ctx.q0(), gl)) < 1e-14);
}

TEST_CASE("log-ratio clipping is counted") {
    SupportPtr in = make_support({"a", "b"});
    SupportPtr out = make_support({"0", "1"});
    const AuditContext ctx(make_distribution(in, {0.5, 0.5}),
                           make_distribution(in, {1.0, 1e-300}),
                           Channel(in, out, {{0.3, 0.7}, {0.4, 0.6}}));
    Warnings warn;
    const ScoreFunction fl = log_likelihood_ratio_fl(ctx, &warn);
    CHECK(warn.clipped_log_odds >= 1);
    for (std::size_t i = 0; i < fl.size(); ++i) CHECK(std::isfinite(fl.value(i)));
}

TEST_CASE("absolute-continuity failure names every offending cell") {
    SupportPtr in = make_support({"a", "b", "c"});
    SupportPtr out = make_support({"0", "1"});
    const AuditContext ctx(make_distribution(in, {0.4, 0.3, 0.3}),
                           make_distribution(in, {1.0, 0.0, 0.0}),
                           Channel(in, out, {{0.3, 0.7}, {0.4, 0.6}, {0.5, 0.5}}));
    try {
        log_likelihood_ratio_fl(ctx);
        FAIL("expected AbsoluteContinuityViolation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AbsoluteContinuityViolation);
        const std::string msg = e.what();
        CHECK(msg.find("'b'") != std::string::npos);
        CHECK(msg.find("'c'") != std::string::npos);
    }
}

TEST_CASE("principal functions: frozen values and moment structure") {
    const AuditContext ctx = two_cell();
    const PrincipalPair pp = principal_functions(ctx);
    CHECK(pp.rho_m == doctest::Approx(0.5356556682297139).epsilon(1e-13));
    CHECK(pp.g_m.value(0) == doctest::Approx(1.2773327473170104).epsilon(1e-13));
    CHECK(pp.g_m.value(1) == doctest::Approx(-0.7828813612588125).epsilon(1e-13));
    CHECK(pp.f_m.value(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(pp.f_m.value(1) == doctest::Approx(2.0).epsilon(1e-12));

    SUBCASE("unit moments under the group-0 laws") {
        std::mt19937_64 rng(21);
        for (int i = 0; i < 10; ++i) {
            const AuditContext r = random_context(rng, 2 + i % 5);
            const PrincipalPair p = principal_functions(r);
            CHECK(std::abs(expectation(r.q0(), p.g_m)) < 1e-12);
            CHECK(std::abs(expectation(r.p0(), p.f_m)) < 1e-12);
            double m2g = 0.0, m2f = 0.0;
            for (std::size_t y = 0; y < r.output_size(); ++y)
                m2g += r.q0().mass(y) * p.g_m.value(y) * p.g_m.value(y);
            for (std::size_t x = 0; x < r.input_size(); ++x)
                m2f += r.p0().mass(x) * p.f_m.value(x) * p.f_m.value(x);
            CHECK(m2g == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(m2f == doctest::Approx(1.0).epsilon(1e-12));

            // The induced conditional mean of f_m is rho_m * g_m.
            const ScoreFunction g = induced_output_function(r, p.f_m);
            for (std::size_t y = 0; y < r.output_size(); ++y)
                CHECK(g.value(y) ==
                      doctest::Approx(p.rho_m * p.g_m.value(y)).epsilon(1e-11));
        }
    }

    SUBCASE("channel independent of the input") {
        CHECK(code_of([] { principal_functions(no_disparity()); }) ==
              ErrorCode::IndependentChannel);
    }

    SUBCASE("non-binary output refused") {
        SupportPtr in = make_support({"a", "b"});
        SupportPtr out = make_support({"0", "1", "2"});
        const AuditContext wide(make_distribution(in, {0.5, 0.5}),
                                make_distribution(in, {0.4, 0.6}),
                                Channel(in, out, {{0.2, 0.3, 0.5}, {0.5, 0.3, 0.2}}));
        CHECK(code_of([&] { principal_functions(wide); }) ==
              ErrorCode::UnsupportedOutputAlphabet);
        CHECK(code_of([&] { correction_function(LambdaWeights(0, 1, 0, 1), wide); }) ==
              ErrorCode::UnsupportedOutputAlphabet);
    }
}

TEST_CASE("binary output collapses conditional means onto g_m") {
    const AuditContext ctx = three_cell();
    const PrincipalPair pp = principal_functions(ctx);
    std::mt19937_64 rng(31);
    for (int i = 0; i < 5; ++i) {
        const ScoreFunction f = random_direction(rng, ctx.p0());
        const ScoreFunction g = induced_output_function(ctx, f);
        double dot = 0.0;
        for (std::size_t y = 0; y < 2; ++y)
            dot += ctx.q0().mass(y) * g.value(y) * pp.g_m.value(y);
        for (std::size_t y = 0; y < 2; ++y)
            CHECK(g.value(y) == doctest::Approx(dot * pp.g_m.value(y)).epsilon(1e-11));
    }

    SUBCASE("direction orthogonal to f_m induces a null conditional mean") {
        const ScoreFunction fl = log_likelihood_ratio_fl(ctx);
        const CorrectionCoefficients c =
            correction_coefficients(LambdaWeights(0, 1, 0, 1), ctx);
        std::vector<double> residual(3);
        for (std::size_t x = 0; x < 3; ++x)
            residual[x] = fl.value(x) - c.a1 * pp.f_m.value(x);
        const ScoreFunction g = induced_output_function(
            ctx, ScoreFunction(ctx.input_support(), std::move(residual)));
        for (std::size_t y = 0; y < 2; ++y) CHECK(std::abs(g.value(y)) < 1e-12);
    }
}

TEST_CASE("correction coefficients and function: frozen 3-cell battery") {
    const AuditContext ctx = three_cell();

    SUBCASE("weights (0,1,0,1)") {
        const CorrectionResult r = correction_function(LambdaWeights(0, 1, 0, 1), ctx);
        CHECK(r.coef.a1 == doctest::Approx(-0.6829682956167579).epsilon(1e-13));
        CHECK(r.coef.a2 == doctest::Approx(0.2137835761386045).epsilon(1e-13));
        CHECK(r.coef.b1 == doctest::Approx(-0.2984175875344728).epsilon(1e-13));
        CHECK(r.coef.rho_m == doctest::Approx(0.4512343952698513).epsilon(1e-13));
        CHECK(r.coef.n_l == doctest::Approx(-1.1832758857913221).epsilon(1e-13));
        CHECK(r.coef.n_m == doctest::Approx(0.1593355285790413).epsilon(1e-13));
        CHECK(r.delta_opt == doctest::Approx(-0.8451114503455334).epsilon(1e-13));
        CHECK(r.f_star.value(0) == doctest::Approx(-0.9163535907177287).epsilon(1e-12));
        CHECK(r.f_star.value(1) == doctest::Approx(0.45404619402338636).epsilon(1e-12));
        CHECK(r.f_star.value(2) == doctest::Approx(1.6098146857592424).epsilon(1e-12));
    }

    SUBCASE("weights (0,2,0,0.5)") {
        const CorrectionResult r = correction_function(LambdaWeights(0, 2, 0, 0.5), ctx);
        CHECK(r.delta_opt == doctest::Approx(-1.4956809348926183).epsilon(1e-13));
        CHECK(r.f_star.value(0) == doctest::Approx(-0.9021414213621269).epsilon(1e-12));
        CHECK(r.f_star.value(1) == doctest::Approx(0.4039569095424982).epsilon(1e-12));
        CHECK(r.f_star.value(2) == doctest::Approx(1.6494181890915698).epsilon(1e-12));
    }

    SUBCASE("membership-only weights align with the principal direction") {
        const CorrectionResult r = correction_function(LambdaWeights(0, 0, 0, 1.5), ctx);
        const PrincipalPair pp = principal_functions(ctx);
        // b1 < 0 here, so the optimum is +f_m.
        for (std::size_t x = 0; x < 3; ++x)
            CHECK(r.f_star.value(x) == doctest::Approx(pp.f_m.value(x)).epsilon(1e-12));
        CHECK(r.delta_opt == doctest::Approx(-0.2019844194735086).epsilon(1e-13));
    }

    SUBCASE("2-cell instance: residual norm vanishes, optimum flips f_l") {
        const AuditContext tiny = two_cell();
        const CorrectionResult r = correction_function(LambdaWeights(0, 1, 0, 1), tiny);
        CHECK(std::abs(r.coef.a2) < 1e-12);
        CHECK(r.delta_opt == doctest::Approx(-1.550478941019155).epsilon(1e-13));
        CHECK(r.f_star.value(0) == doctest::Approx(-0.5).epsilon(1e-11));
        CHECK(r.f_star.value(1) == doctest::Approx(2.0).epsilon(1e-11));
    }
}

TEST_CASE("correction invariants on random instances") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> lamdraw(0.1, 2.0);
    for (int i = 0; i < 20; ++i) {
        const AuditContext ctx = random_context(rng, 2 + i % 5);
        const LambdaWeights lam(0, lamdraw(rng), 0, lamdraw(rng));
        const CorrectionResult r = correction_function(lam, ctx);

        CHECK(is_feasible_direction(ctx.p0(), r.f_star, 1e-8));

        // First-order change at the optimum equals the closed-form optimum.
        CHECK(delta_lambda(lam, ctx, r.f_star) ==
              doctest::Approx(r.delta_opt).epsilon(1e-11));
        CHECK(delta_at_optimum(lam, ctx) == doctest::Approx(r.delta_opt).epsilon(1e-13));

        // f_star really is the stated combination of the basis functions.
        REQUIRE(r.principal.has_value());
        for (std::size_t x = 0; x < ctx.input_size(); ++x)
            CHECK(r.f_star.value(x) ==
                  doctest::Approx(r.coef.n_l * r.f_l.value(x) +
                                  r.coef.n_m * r.principal->f_m.value(x))
                      .epsilon(1e-10));

        // Scaling all weights scales the optimum value, not the direction.
        const LambdaWeights scaled(0, 3.0 * lam.l2, 0, 3.0 * lam.l4);
        const CorrectionResult rs = correction_function(scaled, ctx);
        CHECK(rs.delta_opt == doctest::Approx(3.0 * r.delta_opt).epsilon(1e-12));
        for (std::size_t x = 0; x < ctx.input_size(); ++x)
            CHECK(rs.f_star.value(x) == doctest::Approx(r.f_star.value(x)).epsilon(1e-10));
    }
}

TEST_CASE("optimum dominates random feasible directions") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> lamdraw(0.1, 2.0);
    for (int inst = 0; inst < 5; ++inst) {
        const AuditContext ctx = random_context(rng, 3 + inst % 3);
        const LambdaWeights lam(0, lamdraw(rng), 0, lamdraw(rng));
        const double best = delta_at_optimum(lam, ctx);
        for (int i = 0; i < 200; ++i) {
            const ScoreFunction f = random_direction(rng, ctx.p0());
            CHECK(delta_lambda(lam, ctx, f) >= best - 1e-12);
        }
    }
}

TEST_CASE("degenerate objectives") {
    SUBCASE("no active first-order terms") {
        CHECK(code_of([] {
                  correction_function(LambdaWeights(1, 0, 1, 0), two_cell());
              }) == ErrorCode::DegenerateObjective);
    }
    SUBCASE("identical groups carry no signal") {
        CHECK(code_of([] {
                  correction_function(LambdaWeights(0, 1, 0, 1), no_disparity());
              }) == ErrorCode::DegenerateObjective);
        CHECK(delta_at_optimum(LambdaWeights(0, 1, 0, 1), no_disparity()) == 0.0);
    }
}

TEST_CASE("independent channel falls back to the likelihood direction") {
    SupportPtr in = make_support({"a", "b"});
    SupportPtr out = make_support({"0", "1"});
    // Same row everywhere: outputs carry no information about the input.
    const AuditContext ctx(make_distribution(in, {0.8, 0.2}),
                           make_distribution(in, {0.2, 0.8}),
                           Channel(in, out, {{0.3, 0.7}, {0.3, 0.7}}));
    const CorrectionResult r = correction_function(LambdaWeights(0, 1, 0, 1), ctx);
    CHECK_FALSE(r.principal.has_value());
    CHECK(r.coef.rho_m == 0.0);
    // f_star = -f_l / ||f_l||; for p0=(0.8,0.2) vs p1=(0.2,0.8) that is
    // -(0.5,-2)... f_l/||f_l|| = (0.5,-2) again (same laws as two_cell).
    CHECK(r.f_star.value(0) == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(r.f_star.value(1) == doctest::Approx(2.0).epsilon(1e-12));
    // ||f_l|| = 0.8 log 4, and delta = -l2 * ||f_l||.
    CHECK(r.delta_opt == doctest::Approx(-1.1090354888959125).epsilon(1e-13));
}

TEST_CASE("membership-model route to f_l") {
    const AuditContext ctx = two_cell();
    // Posterior with a uniform prior: p0/(p0+p1) per cell.
    const std::vector<double> posterior = {0.8, 0.2};
    const ScoreFunction fl = fl_from_membership_model(ctx, posterior);
    const ScoreFunction direct = log_likelihood_ratio_fl(ctx);
    for (std::size_t x = 0; x < 2; ++x)
        CHECK(fl.value(x) == doctest::Approx(direct.value(x)).epsilon(1e-13));

    const std::vector<double> short_post = {0.8};
    const std::vector<double> sure_post = {0.8, 1.0};
    const std::vector<double> zero_post = {0.8, 0.0};
    CHECK(code_of([&] { fl_from_membership_model(ctx, short_post); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { fl_from_membership_model(ctx, sure_post); }) ==
          ErrorCode::DegeneratePosterior);
    CHECK(code_of([&] { fl_from_membership_model(ctx, zero_post); }) ==
          ErrorCode::DegeneratePosterior);

    SUBCASE("override flows through the correction") {
        const CorrectionResult base = correction_function(LambdaWeights(0, 1, 0, 1), ctx);
        const CorrectionResult via =
            correction_function(LambdaWeights(0, 1, 0, 1), ctx, fl);
        CHECK(via.delta_opt == doctest::Approx(base.delta_opt).epsilon(1e-13));
        CHECK(code_of([&] {
                  correction_function(LambdaWeights(0, 1, 0, 1), ctx,
                                      ScoreFunction(ctx.input_support(), {1.0, 1.0}));
              }) == ErrorCode::InfeasibleDirection);
    }
}

TEST_CASE("logistic shortcut matches the general first-order change") {
    // Construct a context whose group posterior is exactly logistic in the
    // cell representatives, then compare the two evaluation routes.
    const std::vector<std::vector<double>> reps = {
        {0.0, 1.0}, {1.5, -0.5}, {-2.0, 0.25}, {0.75, 2.0}};
    SupportPtr in = make_support({"a", "b", "c", "d"}, reps);
    SupportPtr out = make_support({"0", "1"});
    const double th0 = 0.3;
    const std::vector<double> theta = {0.7, -1.2};
    const std::vector<double> px = {0.3, 0.25, 0.25, 0.2};
    std::vector<double> w0(4), w1(4), post(4);
    for (std::size_t x = 0; x < 4; ++x) {
        const double eta = th0 + theta[0] * reps[x][0] + theta[1] * reps[x][1];
        post[x] = 1.0 / (1.0 + std::exp(-eta));
        w0[x] = post[x] * px[x];
        w1[x] = (1.0 - post[x]) * px[x];
    }
    const AuditContext ctx(
        make_distribution(in, w0), make_distribution(in, w1),
        Channel(in, out, {{0.2, 0.8}, {0.5, 0.5}, {0.85, 0.15}, {0.4, 0.6}}));

    SUBCASE("posterior route equals the likelihood-ratio route") {
        const ScoreFunction via_model = fl_from_membership_model(ctx, post);
        const ScoreFunction direct = log_likelihood_ratio_fl(ctx);
        for (std::size_t x = 0; x < 4; ++x)
            CHECK(via_model.value(x) == doctest::Approx(direct.value(x)).epsilon(1e-12));
    }

    SUBCASE("coefficient form of the first-order change") {
        const double gamma1 = std::log(ctx.q0().mass(1) / ctx.q1().mass(1)) -
                              std::log(ctx.q0().mass(0) / ctx.q1().mass(0));
        std::mt19937_64 rng(61);
        const LambdaWeights lam(0, 1.3, 0, 0.8);
        for (int i = 0; i < 5; ++i) {
            const ScoreFunction f = random_direction(rng, ctx.p0());
            CHECK(delta_lambda_logistic(lam, ctx, f, theta, gamma1) ==
                  doctest::Approx(delta_lambda(lam, ctx, f)).epsilon(1e-11));
        }
    }
}
