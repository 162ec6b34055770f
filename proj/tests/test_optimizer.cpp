#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "vqls/optimizer.hpp"

using namespace vqls;
using namespace vqls::testing;

namespace {

std::vector<double> finite_difference(const LinearProblem &p, const AnsatzSpec &spec,
                                      ParamVector params, double h) {
    std::vector<double> g(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double orig = params[k];
        params[k] = orig + h;
        const double plus = local_cost(p, spec, params).value;
        params[k] = orig - h;
        const double minus = local_cost(p, spec, params).value;
        params[k] = orig;
        g[k] = (plus - minus) / (2 * h);
    }
    return g;
}

} // namespace

TEST(Gradient, VanishesAtExactSolution) {
    const auto p = identity_problem(3);
    const auto spec = build_ansatz(3, 2);
    const auto g = gradient(p, spec, ParamVector(spec.param_count(), 0.0));
    double norm = 0.0;
    for (double v : g) {
        norm += v * v;
    }
    EXPECT_LT(std::sqrt(norm), 1e-6);
}

TEST(Gradient, MatchesFiniteDifferencesOnTestInstance) {
    Rng rng(1);
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 2);
    const auto params = random_angles(spec, rng);
    const auto g = gradient(p, spec, params);
    const auto fd = finite_difference(p, spec, params, 1e-5);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(g[k], fd[k], 1e-5) << k;
    }
}

TEST(Gradient, PeriodicInEachParameter) {
    Rng rng(2);
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 1);
    auto params = random_angles(spec, rng);
    const auto g1 = gradient(p, spec, params);
    params[0] += 2 * std::numbers::pi;
    const auto g2 = gradient(p, spec, params);
    for (std::size_t k = 0; k < g1.size(); ++k) {
        EXPECT_NEAR(g1[k], g2[k], 1e-12);
    }
}

TEST(Gradient, SizeMismatchThrows) {
    const auto p = build_test_instance(1.0, 3);
    EXPECT_THROW((void)gradient(p, build_ansatz(3, 1), ParamVector(5)), SizeError);
}

// Property: parameter-shift matches central differences (h = 1e-5) to 1e-5 on 50 configurations.
TEST(OptimizerProperties, GradientMatchesFiniteDifferences) {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 2 + pick(rng, 3);
        const auto p = t % 2 ? random_problem(n, rng) : laplacian_1d(n);
        const auto spec = build_ansatz(n, 1 + pick(rng, 3));
        const auto params = random_angles(spec, rng);
        const auto g = gradient(p, spec, params);
        const auto fd = finite_difference(p, spec, params, 1e-5);
        for (std::size_t k = 0; k < g.size(); ++k) {
            EXPECT_NEAR(g[k], fd[k], 1e-5) << "config " << t << " component " << k;
        }
    }
}

TEST(Minimize, IdentitySystemConverges) {
    const auto p = identity_problem(2);
    const auto spec = build_ansatz(2, 2);
    OptimizerConfig c = default_optimizer();
    c.epsilon = 0.01;
    c.seed = 3;
    const auto r = minimize(p, spec, c);
    ASSERT_TRUE(r.converged);
    EXPECT_GE(std::norm(r.solution_state[0]), 0.99);
}

TEST(Minimize, TestInstanceMatchesDenseSolve) {
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, default_layers(3));
    OptimizerConfig c = default_optimizer();
    c.epsilon = 0.001;
    c.seed = 1;
    const auto r = minimize(p, spec, c);
    ASSERT_TRUE(r.converged);
    EXPECT_GE(fidelity(r.solution_state, classical_solve(p)), 0.999);
    EXPECT_EQ(r.cost_evaluations, r.iterations + 1);
    EXPECT_EQ(r.gradient_evaluations, r.iterations);
    EXPECT_EQ(r.cost_trace.size(), r.iterations + 1);
}

TEST(Minimize, DeterministicAndSeedSensitive) {
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 2);
    OptimizerConfig c = default_optimizer();
    c.epsilon = 0.01;
    c.max_iterations = 300;
    c.seed = 5;
    const auto a = minimize(p, spec, c);
    const auto b = minimize(p, spec, c);
    EXPECT_EQ(a.cost_trace, b.cost_trace);
    EXPECT_EQ(a.final_params, b.final_params);
    c.seed = 6;
    EXPECT_NE(minimize(p, spec, c).cost_trace, a.cost_trace);
}

TEST(Minimize, MomentumAndAdamBothRun) {
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 4);
    for (auto cfg : {OptimizerConfig{}, OptimizerConfig::adam()}) {
        cfg.stop_rule = StopRule::Cost;
        cfg.epsilon = 0.01;
        cfg.seed = 2;
        const auto r = minimize(p, spec, cfg);
        EXPECT_TRUE(r.converged) << to_string(cfg.method);
        EXPECT_LE(r.final_cost, 0.01);
    }
}

TEST(Minimize, ThresholdFollowsStopRule) {
    OptimizerConfig c;
    c.epsilon = 0.05;
    c.stop_rule = StopRule::Cost;
    EXPECT_DOUBLE_EQ(cost_threshold(c, 3, 10.0), 0.05);
    c.stop_rule = StopRule::Precision;
    EXPECT_DOUBLE_EQ(cost_threshold(c, 3, 10.0), 0.05 * 0.05 / (3 * 100.0));
}

TEST(Minimize, ConfigValidation) {
    const auto p = build_test_instance(1.0, 2);
    const auto spec = build_ansatz(2, 1);
    OptimizerConfig c;
    c.epsilon = 0.0;
    EXPECT_THROW((void)minimize(p, spec, c), ArgumentError);
    c = OptimizerConfig{};
    c.epsilon = 0.5;
    EXPECT_THROW((void)minimize(p, spec, c), ArgumentError);
    c = OptimizerConfig{};
    c.learning_rate = -1;
    EXPECT_THROW((void)minimize(p, spec, c), ArgumentError);
    c = OptimizerConfig{};
    c.max_iterations = 0;
    EXPECT_THROW((void)minimize(p, spec, c), ArgumentError);
    EXPECT_THROW((void)parse_optimizer_method("sgd"), UsageError);
    EXPECT_THROW((void)parse_stop_rule("never"), UsageError);
}

TEST(Minimize, NonFiniteCostIsNumericalFailure) {
    auto p = build_test_instance(1.0, 2);
    p.decomposition.terms[0].coefficient = std::nan("");
    OptimizerConfig c;
    c.condition_number = 2.0;
    try {
        (void)minimize(p, build_ansatz(2, 1), c);
        FAIL() << "expected NumericalFailure";
    } catch (const NumericalFailure &e) {
        EXPECT_EQ(e.iteration(), 0u);
    }
}

TEST(Minimize, ShotsModeRuns) {
    const auto p = build_test_instance(1.0, 2);
    const auto spec = build_ansatz(2, 1);
    OptimizerConfig c = default_optimizer();
    c.stop_rule = StopRule::Cost;
    c.epsilon = 0.05;
    c.max_iterations = 5;
    c.cost_mode = CostMode::with_shots(2000, 17);
    const auto a = minimize(p, spec, c);
    const auto b = minimize(p, spec, c);
    EXPECT_EQ(a.cost_trace, b.cost_trace);
    EXPECT_LE(a.iterations, 5u);
}

// Properties over converged analytic runs: running minimum non-increasing,
// converged implies final_cost <= threshold <= epsilon, seeds isolate traces.
TEST(OptimizerProperties, RunInvariants) {
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 4);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        OptimizerConfig c = default_optimizer();
        c.epsilon = 0.01;
        c.seed = seed;
        const auto r = minimize(p, spec, c);
        double best = r.cost_trace.front();
        for (double v : r.cost_trace) {
            const double next = std::min(best, v);
            EXPECT_LE(next, best);
            best = next;
        }
        if (r.converged) {
            EXPECT_LE(r.final_cost, r.cost_threshold);
            EXPECT_LE(r.final_cost, c.epsilon);
        }
    }
}

// Property: the precomputed quadratic forms reproduce the statevector cost path.
TEST(OptimizerProperties, QuadraticFormsMatchStatevectorPath) {
    Rng rng(4);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 2 + pick(rng, 3);
        const auto p = t % 2 ? random_problem(n, rng) : laplacian_1d(n);
        const auto spec = build_ansatz(n, 1 + pick(rng, 3));
        const auto params = random_angles(spec, rng);
        const auto forms = detail::quadratic_forms(p);
        const auto fast = detail::local_parts(p, spec, params, CostMode::analytic(), &forms);
        const auto slow = detail::local_parts(p, spec, params, CostMode::analytic());
        EXPECT_NEAR(fast.numerator, slow.numerator, 1e-10);
        EXPECT_NEAR(fast.denominator, slow.denominator, 1e-10);
        const auto g_fast =
            detail::shift_gradient(p, spec, params, CostMode::analytic(), &forms);
        const auto g_slow = gradient(p, spec, params);
        for (std::size_t k = 0; k < g_fast.size(); ++k) {
            EXPECT_NEAR(g_fast[k], g_slow[k], 1e-10);
        }
    }
}

TEST(Minimize, TraceStartsAtLocalCostOfInitialParams) {
    const auto p = laplacian_1d(3);
    const auto spec = build_ansatz(3, 2);
    OptimizerConfig c = default_optimizer();
    c.seed = 12;
    c.max_iterations = 3;
    const auto r = minimize(p, spec, c);
    EXPECT_NEAR(r.cost_trace.front(), local_cost(p, spec, random_params(spec, 12)).value, 1e-12);
}
