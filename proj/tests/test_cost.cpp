#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"
#include "vqls/cost.hpp"

using namespace vqls;
using namespace vqls::testing;

TEST(UCoefficient, IdentityInsertionIsOne) {
    Rng rng(1);
    const auto p = random_problem(3, rng);
    const auto spec = build_ansatz(3, 2);
    const auto params = random_angles(spec, rng);
    for (std::size_t m = 0; m < p.decomposition.size(); ++m) {
        EXPECT_NEAR(std::abs(u_coefficient_analytic(p, spec, params, m, m, -1) - 1.0), 0.0, 1e-12);
    }
}

TEST(UCoefficient, HadamardBasisGivesZero) {
    auto p = identity_problem(2);
    for (std::size_t q = 0; q < 2; ++q) {
        p.b_prep.add(Gate::single(GateKind::H, q));
    }
    const auto spec = build_ansatz(2, 1);
    const ParamVector zeros(spec.param_count(), 0.0);
    EXPECT_NEAR(std::abs(u_coefficient_analytic(p, spec, zeros, 0, 0, 0)), 0.0, 1e-12);
}

TEST(UCoefficient, IndexErrors) {
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 1);
    const ParamVector zeros(spec.param_count(), 0.0);
    EXPECT_THROW((void)u_coefficient_analytic(p, spec, zeros, 3, 0, 0), IndexError);
    EXPECT_THROW((void)u_coefficient_analytic(p, spec, zeros, 0, 0, 3), IndexError);
    EXPECT_THROW((void)u_coefficient_analytic(p, spec, zeros, 0, 0, -2), IndexError);
    EXPECT_THROW((void)u_coefficient_analytic(p, build_ansatz(2, 1), ParamVector(4), 0, 0, 0),
                 SizeError);
    UTable t(2, 2);
    EXPECT_THROW((void)t.at(2, 0, 0), IndexError);
}

TEST(UCoefficient, HadamardIdentityIsExact) {
    const auto p = identity_problem(3);
    const auto spec = build_ansatz(3, 2);
    Rng rng(2);
    const auto params = random_angles(spec, rng);
    for (std::uint64_t shots : {1u, 7u, 1000u}) {
        EXPECT_EQ(u_coefficient_hadamard(p, spec, params, 0, 0, -1, shots, 5), Complex(1.0));
    }
}

TEST(UCoefficient, HadamardIsReproducibleAndConverges) {
    Rng rng(3);
    const auto p = random_complex_problem(2, rng);
    const auto spec = build_ansatz(2, 2);
    const auto params = random_angles(spec, rng);
    const std::size_t m = 1;
    const std::size_t mp = 2;
    const auto a = u_coefficient_hadamard(p, spec, params, m, mp, 1, 1000, 77, false);
    EXPECT_EQ(a, u_coefficient_hadamard(p, spec, params, m, mp, 1, 1000, 77, false));
    const auto exact = u_coefficient_analytic(p, spec, params, m, mp, 1);
    const auto big = u_coefficient_hadamard(p, spec, params, m, mp, 1, 1'000'000, 78, false);
    // Each part uses half the shots.
    const double tol = 5.0 * 3.0 / std::sqrt(1e6) * std::sqrt(2.0);
    EXPECT_NEAR(big.real(), exact.real(), tol);
    EXPECT_NEAR(big.imag(), exact.imag(), tol);
}

TEST(LocalCost, ExactSolutionIsZero) {
    const auto p = identity_problem(2);
    const auto spec = build_ansatz(2, 1);
    const ParamVector zeros(spec.param_count(), 0.0);
    EXPECT_NEAR(local_cost(p, spec, zeros).value, 0.0, 1e-15);
    EXPECT_NEAR(global_cost(p, spec, zeros).value, 0.0, 1e-15);
}

TEST(LocalCost, OrthogonalStateIsOne) {
    const auto p = identity_problem(2);
    const auto spec = build_ansatz(2, 1);
    const ParamVector params = {std::numbers::pi, std::numbers::pi, 0, 0};
    EXPECT_NEAR(local_cost(p, spec, params).value, 1.0, 1e-12);
    EXPECT_NEAR(global_cost(p, spec, params).value, 1.0, 1e-12);
}

TEST(LocalCost, ShotsModeCloseToAnalytic) {
    Rng rng(4);
    const auto p = build_test_instance(1.0, 3);
    const auto spec = build_ansatz(3, 1);
    const auto params = random_angles(spec, rng);
    const double exact = local_cost(p, spec, params).value;
    const auto est = local_cost(p, spec, params, CostMode::with_shots(100000, 9));
    EXPECT_NEAR(est.value, exact, 0.02);
    ASSERT_TRUE(est.u_table.has_value());
    EXPECT_EQ(est.mode.name(), "shots:100000");
    const double g_exact = global_cost(p, spec, params).value;
    EXPECT_NEAR(global_cost(p, spec, params, CostMode::with_shots(100000, 10)).value, g_exact,
                0.02);
}

TEST(LocalCost, TableAndContractedPathsAgree) {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto p = t % 2 ? random_complex_problem(2 + pick(rng, 2), rng)
                             : random_problem(2 + pick(rng, 2), rng);
        const auto spec = build_ansatz(p.n_qubits, 2);
        const auto params = random_angles(spec, rng);
        const auto direct = local_cost(p, spec, params);
        const auto via_table =
            local_cost_from_table(p, u_table_analytic(p, spec, params), CostMode::analytic());
        EXPECT_NEAR(direct.value, via_table.value, 1e-12);
        EXPECT_NEAR(direct.numerator, via_table.numerator, 1e-10);
        EXPECT_NEAR(direct.denominator, via_table.denominator, 1e-10);
    }
}

TEST(NormPhiSquared, Examples) {
    Rng rng(6);
    const auto spec = build_ansatz(3, 2);
    EXPECT_NEAR(norm_phi_squared(identity_problem(3), spec, random_angles(spec, rng)), 1.0, 1e-12);

    const auto p = build_test_instance(1.0, 3);
    const ParamVector zeros(spec.param_count(), 0.0);
    const Vec col = p.dense_matrix.col(0).cast<Complex>();
    EXPECT_NEAR(norm_phi_squared(p, spec, zeros), col.squaredNorm(), 1e-10);

    LinearProblem scaled = p;
    scaled.decomposition = p.decomposition.scaled(3.0);
    const auto params = random_angles(spec, rng);
    EXPECT_NEAR(norm_phi_squared(scaled, spec, params), 9.0 * norm_phi_squared(p, spec, params),
                1e-10);
}

TEST(Cost, DegenerateDenominatorThrows) {
    LinearProblem p = identity_problem(2);
    p.decomposition = p.decomposition.scaled(1e-9);
    const auto spec = build_ansatz(2, 1);
    EXPECT_THROW((void)local_cost(p, spec, ParamVector(4, 0.0)), DegenerateStateError);
    EXPECT_THROW((void)global_cost(p, spec, ParamVector(4, 0.0)), DegenerateStateError);
}

// Property: analytic costs equal the dense-operator formulas (200 instances, n <= 4).
TEST(CostProperties, OracleEquivalence) {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + pick(rng, 3);
        const auto p = t % 3 == 0 ? random_complex_problem(n, rng) : random_problem(n, rng);
        const auto spec = build_ansatz(n, 1 + pick(rng, 3));
        const auto params = random_angles(spec, rng);
        const auto oracle = dense_costs(p, ansatz_state(spec, params));
        EXPECT_NEAR(local_cost(p, spec, params).value, oracle.local, 1e-9);
        EXPECT_NEAR(global_cost(p, spec, params).value, oracle.global, 1e-9);
        EXPECT_NEAR(norm_phi_squared(p, spec, params), oracle.norm, 1e-9 * oracle.norm);
    }
}

// Property: u(m, m', l) = conj(u(m', m, l)).
TEST(CostProperties, UTableHermitian) {
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const auto p = random_complex_problem(2 + pick(rng, 2), rng);
        const auto spec = build_ansatz(p.n_qubits, 2);
        const auto params = random_angles(spec, rng);
        const auto table = u_table_analytic(p, spec, params);
        for (std::size_t m = 0; m < table.n_terms(); ++m) {
            for (std::size_t mp = 0; mp < table.n_terms(); ++mp) {
                for (int l = -1; l < static_cast<int>(p.n_qubits); ++l) {
                    const auto direct = u_coefficient_analytic(p, spec, params, m, mp, l);
                    EXPECT_NEAR(std::abs(table.at(m, mp, l) - direct), 0.0, 1e-12);
                    EXPECT_NEAR(std::abs(table.at(m, mp, l) - std::conj(table.at(mp, m, l))), 0.0,
                                1e-12);
                }
            }
        }
    }
}

// Property: analytic costs lie in [0, 1].
TEST(CostProperties, Bounds) {
    Rng rng(9);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 2 + pick(rng, 3);
        const auto p = random_problem(n, rng);
        const auto spec = build_ansatz(n, 1 + pick(rng, 3));
        const auto params = random_angles(spec, rng);
        const double cl = local_cost(p, spec, params).value;
        const double cg = global_cost(p, spec, params).value;
        EXPECT_GE(cl, -1e-12);
        EXPECT_LE(cl, 1.0 + 1e-12);
        EXPECT_GE(cg, -1e-12);
        EXPECT_LE(cg, 1.0 + 1e-12);
    }
}

// Property: C_local < 1e-9 exactly when C_global < 1e-9. Both vanish when
// A V|0> is parallel to |b>, so problems are built around random ansatz
// states to hit the zero set as well as generic points.
TEST(CostProperties, ZeroCoincidence) {
    Rng rng(10);
    int zeros = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + pick(rng, 3);
        LinearProblem p = random_problem(n, rng);
        const auto spec = build_ansatz(n, 2);
        auto params = random_angles(spec, rng);
        if (t % 2 == 0) {
            // Choose U so that |b> = V(params)|0>; with A = I the state is exact.
            p.decomposition = {n, {{1.5, PauliString::identity(n)}}};
            p.b_prep = spec.circuit(params);
            if (t % 4 == 0) {
                params[pick(rng, params.size())] += 0.3;
            } else {
                ++zeros;
            }
        }
        const double cl = local_cost(p, spec, params).value;
        const double cg = global_cost(p, spec, params).value;
        EXPECT_EQ(cl < 1e-9, cg < 1e-9) << "C_L=" << cl << " C_G=" << cg;
    }
    EXPECT_GT(zeros, 0);
}

// Property: mean of 20 independent 1e4-shot estimates is within 4 standard
// errors of the analytic value on at least 95% of 50 random configurations.
TEST(CostProperties, HadamardUnbiased) {
    Rng rng(11);
    constexpr int kConfigs = 50;
    constexpr int kReps = 20;
    constexpr std::uint64_t kShots = 10000;
    int passed = 0;
    for (int t = 0; t < kConfigs; ++t) {
        const std::size_t n = 2 + pick(rng, 2);
        const auto p = t % 2 ? random_complex_problem(n, rng) : random_problem(n, rng);
        const auto spec = build_ansatz(n, 1 + pick(rng, 2));
        const auto params = random_angles(spec, rng);
        const std::size_t m = pick(rng, p.decomposition.size());
        const std::size_t mp = pick(rng, p.decomposition.size());
        const int l = static_cast<int>(pick(rng, n + 1)) - 1;
        const bool skip = p.is_real();
        const Complex exact = u_coefficient_analytic(p, spec, params, m, mp, l);
        Complex mean = 0.0;
        for (int r = 0; r < kReps; ++r) {
            mean += u_coefficient_hadamard(p, spec, params, m, mp, l, kShots,
                                           derive_seed(1000 + t, {static_cast<std::uint64_t>(r)}),
                                           skip) /
                    static_cast<double>(kReps);
        }
        const bool both = m != mp && !skip;
        const double part_shots = both ? kShots / 2.0 : static_cast<double>(kShots);
        auto within = [&](double est, double ex) {
            const double se = std::sqrt(std::max(1.0 - ex * ex, 0.0) / (part_shots * kReps));
            return std::abs(est - ex) <= 4.0 * se + 1e-12;
        };
        if (within(mean.real(), exact.real()) && (!both || within(mean.imag(), exact.imag()))) {
            ++passed;
        }
    }
    EXPECT_GE(passed, 48) << passed << " of " << kConfigs;
}
