#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vqls/ansatz.hpp"
#include "vqls/cost.hpp"
#include "vqls/errors.hpp"
#include "vqls/problems.hpp"
#include "vqls/seeds.hpp"

namespace vqls {

enum class OptimizerMethod { Momentum, Adam };

[[nodiscard]] inline std::string to_string(OptimizerMethod m) {
    return m == OptimizerMethod::Momentum ? "momentum" : "adam";
}

[[nodiscard]] inline OptimizerMethod parse_optimizer_method(const std::string &s) {
    if (s == "momentum") {
        return OptimizerMethod::Momentum;
    }
    if (s == "adam") {
        return OptimizerMethod::Adam;
    }
    throw UsageError("unknown optimizer '" + s + "' (expected momentum or adam)");
}

/**
 * What `epsilon` bounds. Precision treats it as the target solution
 * precision and stops once C <= epsilon^2 / (n kappa^2), which bounds the
 * trace distance between the normalized solution and |x(a)> by epsilon.
 * Cost stops as soon as C <= epsilon.
 */
enum class StopRule { Precision, Cost };

[[nodiscard]] inline std::string to_string(StopRule r) {
    return r == StopRule::Precision ? "precision" : "cost";
}

[[nodiscard]] inline StopRule parse_stop_rule(const std::string &s) {
    if (s == "precision") {
        return StopRule::Precision;
    }
    if (s == "cost") {
        return StopRule::Cost;
    }
    throw UsageError("unknown stop rule '" + s + "' (expected precision or cost)");
}

struct OptimizerConfig {
    OptimizerMethod method = OptimizerMethod::Momentum;
    double learning_rate = 0.1;
    double momentum_beta = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Learning-rate reduction on plateaus: every `plateau_patience`
    /// iterations, if the best cost has not dropped by `plateau_min_gain`
    /// (relative) since the previous check, the rate is multiplied by
    /// `plateau_factor`, down to `learning_rate * min_lr_ratio`. 0 disables it.
    std::size_t plateau_patience = 0;
    double plateau_factor = 0.5;
    double plateau_min_gain = 0.01;
    double min_lr_ratio = 1e-3;
    std::size_t max_iterations = 50000;
    double epsilon = 0.01;
    StopRule stop_rule = StopRule::Precision;
    double condition_number = 0.0; // 0: computed from the problem's dense matrix
    std::uint64_t seed = 0;
    CostMode cost_mode = CostMode::analytic();

    /// Adam with its usual learning rate.
    [[nodiscard]] static OptimizerConfig adam() {
        OptimizerConfig c;
        c.method = OptimizerMethod::Adam;
        c.learning_rate = 0.05;
        return c;
    }

    void validate() const {
        if (!(learning_rate > 0.0)) {
            throw ArgumentError("learning rate must be positive");
        }
        if (!(momentum_beta >= 0.0 && momentum_beta < 1.0) ||
            !(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
            throw ArgumentError("momentum / Adam betas must lie in [0, 1)");
        }
        if (!(adam_eps > 0.0)) {
            throw ArgumentError("Adam eps must be positive");
        }
        if (!(plateau_factor > 0.0 && plateau_factor <= 1.0) ||
            !(min_lr_ratio > 0.0 && min_lr_ratio <= 1.0) || !(plateau_min_gain >= 0.0)) {
            throw ArgumentError("plateau schedule parameters out of range");
        }
        if (max_iterations == 0) {
            throw ArgumentError("max_iterations must be positive");
        }
        if (!(epsilon > 0.0 && epsilon < 0.5)) {
            throw ArgumentError("epsilon must lie in (0, 0.5), got " + std::to_string(epsilon));
        }
    }
};

/// Settings used by the CLI and the end-to-end solves.
[[nodiscard]] inline OptimizerConfig default_optimizer() {
    OptimizerConfig c = OptimizerConfig::adam();
    c.learning_rate = 0.01;
    c.plateau_patience = 2000;
    c.max_iterations = 250000;
    return c;
}

struct SolveResult {
    ParamVector final_params;
    double final_cost = 0.0;
    double cost_threshold = 0.0;
    double condition_number = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t cost_evaluations = 0;
    std::size_t gradient_evaluations = 0;
    std::vector<double> cost_trace; // length iterations + 1
    std::vector<double> numerator_trace;
    std::vector<double> denominator_trace;
    Statevector solution_state;
};

namespace detail {

struct Parts {
    double numerator;
    double denominator;
};

/// N(x) = x^T numerator x and D(x) = x^T denominator x for real x, with
/// numerator = A^dag U Z U^dag A (Z = sum_l Z_l) and denominator = A^dag A.
struct QuadraticForms {
    RealMatrix numerator;
    RealMatrix denominator;
};

[[nodiscard]] inline QuadraticForms quadratic_forms(const LinearProblem &problem) {
    const std::size_t n = problem.n_qubits;
    const DenseMatrix a = reconstruct(problem.decomposition);
    const Eigen::Index dim = a.rows();
    DenseMatrix u(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        std::vector<Complex> basis(static_cast<std::size_t>(dim), 0.0);
        basis[static_cast<std::size_t>(j)] = 1.0;
        const Statevector col = apply_circuit(Statevector(n, std::move(basis)), problem.b_prep);
        for (Eigen::Index i = 0; i < dim; ++i) {
            u(i, j) = col[static_cast<BasisIndex>(i)];
        }
    }
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        z(i) = static_cast<double>(static_cast<int>(n) -
                                   2 * std::popcount(static_cast<BasisIndex>(i)));
    }
    const DenseMatrix w = u.adjoint() * a;
    return {(w.adjoint() * z.asDiagonal() * w).real(), (a.adjoint() * a).real()};
}

inline Parts local_parts(const LinearProblem &problem, const AnsatzSpec &spec,
                         std::span<const double> params, const CostMode &mode,
                         const QuadraticForms *forms = nullptr) {
    if (mode.is_analytic() && forms != nullptr) {
        const auto amps = ansatz_amplitudes(spec, params);
        const Eigen::Map<const Eigen::VectorXd> x(amps.data(), static_cast<Eigen::Index>(amps.size()));
        return {x.dot(forms->numerator * x), x.dot(forms->denominator * x)};
    }
    if (mode.is_analytic()) {
        const auto p = analytic_parts(problem, ansatz_state(spec, params));
        return {p.local_numerator, p.denominator};
    }
    const auto e = local_cost(problem, spec, params, mode);
    return {e.numerator, e.denominator};
}

} // namespace detail

/**
 * Gradient of the local cost by the parameter-shift rule.
 *
 * C = 1/2 - N / (2 n D) with N and D both expectation values in V(a)|0>.
 * Each Ry parameter enters once, so dN/da_k = (N(a + pi/2 e_k) - N(a - pi/2 e_k)) / 2
 * exactly, and likewise for D. The quotient rule then gives dC/da_k.
 */
namespace detail {

inline std::vector<double> shift_gradient(const LinearProblem &problem, const AnsatzSpec &spec,
                                          std::span<const double> params, const CostMode &mode,
                                          const QuadraticForms *forms) {
    constexpr double kShift = std::numbers::pi / 2.0;
    const double n = static_cast<double>(problem.n_qubits);

    auto sub_mode = [&](std::uint64_t k, std::uint64_t which) {
        CostMode m = mode;
        m.seed = derive_seed(mode.seed, {k, which});
        return m;
    };
    const auto centre = local_parts(problem, spec, params, sub_mode(params.size(), 0), forms);
    if (std::isfinite(centre.denominator) && centre.denominator <= kDegenerateDenominator) {
        throw DegenerateStateError("<Phi|Phi> vanishes at the gradient point");
    }

    std::vector<double> grad(params.size());
    std::vector<double> shifted(params.begin(), params.end());
    for (std::size_t k = 0; k < params.size(); ++k) {
        shifted[k] = params[k] + kShift;
        const auto plus = local_parts(problem, spec, shifted, sub_mode(k, 1), forms);
        shifted[k] = params[k] - kShift;
        const auto minus = local_parts(problem, spec, shifted, sub_mode(k, 2), forms);
        shifted[k] = params[k];

        const double d_num = 0.5 * (plus.numerator - minus.numerator);
        const double d_den = 0.5 * (plus.denominator - minus.denominator);
        grad[k] = -(d_num * centre.denominator - centre.numerator * d_den) /
                  (2.0 * n * centre.denominator * centre.denominator);
    }
    return grad;
}

} // namespace detail

[[nodiscard]] inline std::vector<double> gradient(const LinearProblem &problem,
                                                  const AnsatzSpec &spec,
                                                  std::span<const double> params,
                                                  const CostMode &mode = CostMode::analytic()) {
    detail::check_problem(problem, spec);
    if (params.size() != spec.param_count()) {
        throw SizeError("gradient expects " + std::to_string(spec.param_count()) +
                        " parameters, got " + std::to_string(params.size()));
    }
    return detail::shift_gradient(problem, spec, params, mode, nullptr);
}

/// Local-cost value below which a run counts as converged.
[[nodiscard]] inline double cost_threshold(const OptimizerConfig &config, std::size_t n_qubits,
                                           double kappa) {
    if (config.stop_rule == StopRule::Cost) {
        return config.epsilon;
    }
    return config.epsilon * config.epsilon / (static_cast<double>(n_qubits) * kappa * kappa);
}

/// Uniform draw in [0, 2 pi) per parameter from `seed`.
[[nodiscard]] inline ParamVector random_params(const AnsatzSpec &spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    ParamVector p(spec.param_count());
    for (auto &v : p) {
        v = angle(rng);
    }
    return p;
}

/**
 * Gradient descent on the local cost.
 *
 * Momentum: v <- beta v + g, a <- a - lr v. Adam uses bias-corrected first
 * and second moments. The cost is evaluated once before the loop and once
 * per iteration; only those count toward `cost_evaluations`. The run stops
 * at the first evaluation at or below `cost_threshold`.
 */
[[nodiscard]] inline SolveResult minimize(const LinearProblem &problem, const AnsatzSpec &spec,
                                          const OptimizerConfig &config) {
    config.validate();
    detail::check_problem(problem, spec);

    SolveResult r;
    r.condition_number =
        config.condition_number > 0.0 ? config.condition_number : condition_number(problem);
    r.cost_threshold = cost_threshold(config, problem.n_qubits, r.condition_number);
    const double threshold = r.cost_threshold;
    ParamVector params = random_params(spec, config.seed);
    const std::size_t dim = params.size();
    std::vector<double> velocity(dim, 0.0);
    std::vector<double> m1(dim, 0.0);
    std::vector<double> m2(dim, 0.0);
    double beta1_power = 1.0;
    double beta2_power = 1.0;

    auto iteration_mode = [&](std::size_t it, std::uint64_t which) {
        CostMode m = config.cost_mode;
        m.seed = derive_seed(config.cost_mode.seed, {it, which});
        return m;
    };
    std::optional<detail::QuadraticForms> forms;
    if (config.cost_mode.is_analytic()) {
        forms = detail::quadratic_forms(problem);
    }
    const detail::QuadraticForms *forms_ptr = forms ? &*forms : nullptr;
    auto record = [&](std::size_t it) {
        const auto e = detail::local_parts(problem, spec, params, iteration_mode(it, 0), forms_ptr);
        ++r.cost_evaluations;
        const double value = detail::local_from_parts(e.numerator, e.denominator, problem.n_qubits);
        if (!std::isfinite(value)) {
            throw NumericalFailure("non-finite cost", it);
        }
        r.cost_trace.push_back(value);
        r.numerator_trace.push_back(e.numerator);
        r.denominator_trace.push_back(e.denominator);
        return value;
    };

    double cost = record(0);
    double lr = config.learning_rate;
    const double lr_floor = config.learning_rate * config.min_lr_ratio;
    double best = cost;
    double best_at_check = cost;
    std::size_t it = 0;
    while (cost > threshold && it < config.max_iterations) {
        ++it;
        const auto g = detail::shift_gradient(problem, spec, params, iteration_mode(it, 1), forms_ptr);
        ++r.gradient_evaluations;
        for (std::size_t k = 0; k < dim; ++k) {
            if (!std::isfinite(g[k])) {
                throw NumericalFailure("non-finite gradient component " + std::to_string(k), it);
            }
        }
        if (config.method == OptimizerMethod::Momentum) {
            for (std::size_t k = 0; k < dim; ++k) {
                velocity[k] = config.momentum_beta * velocity[k] + g[k];
                params[k] -= lr * velocity[k];
            }
        } else {
            beta1_power *= config.adam_beta1;
            beta2_power *= config.adam_beta2;
            for (std::size_t k = 0; k < dim; ++k) {
                m1[k] = config.adam_beta1 * m1[k] + (1.0 - config.adam_beta1) * g[k];
                m2[k] = config.adam_beta2 * m2[k] + (1.0 - config.adam_beta2) * g[k] * g[k];
                const double m_hat = m1[k] / (1.0 - beta1_power);
                const double v_hat = m2[k] / (1.0 - beta2_power);
                params[k] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
            }
        }
        cost = record(it);
        best = std::min(best, cost);
        if (config.plateau_patience > 0 && it % config.plateau_patience == 0) {
            if (best > (1.0 - config.plateau_min_gain) * best_at_check) {
                lr = std::max(lr_floor, lr * config.plateau_factor);
            }
            best_at_check = best;
        }
    }

    r.iterations = it;
    r.converged = cost <= threshold;
    r.final_cost = cost;
    r.solution_state = ansatz_state(spec, params);
    r.final_params = std::move(params);
    return r;
}

inline void to_json(nlohmann::json &j, const OptimizerConfig &c) {
    j = nlohmann::json{{"method", to_string(c.method)},
                       {"learning_rate", c.learning_rate},
                       {"momentum_beta", c.momentum_beta},
                       {"adam_beta1", c.adam_beta1},
                       {"adam_beta2", c.adam_beta2},
                       {"adam_eps", c.adam_eps},
                       {"plateau_patience", c.plateau_patience},
                       {"plateau_factor", c.plateau_factor},
                       {"max_iterations", c.max_iterations},
                       {"epsilon", c.epsilon},
                       {"stop_rule", to_string(c.stop_rule)},
                       {"seed", c.seed},
                       {"cost_mode", c.cost_mode.name()}};
}

} // namespace vqls
