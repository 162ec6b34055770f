#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vqls/ansatz.hpp"
#include "vqls/errors.hpp"
#include "vqls/problems.hpp"
#include "vqls/seeds.hpp"
#include "vqls/statevector.hpp"

namespace vqls {

/// Below this <Phi|Phi> the normalized costs are meaningless.
inline constexpr double kDegenerateDenominator = 1e-14;

/**
 * How u-coefficients are obtained. Analytic uses statevector algebra on the
 * n-qubit register; Shots simulates the (n+1)-qubit Hadamard tests and
 * estimates each ancilla expectation from a binomial draw.
 */
struct CostMode {
    enum class Kind { Analytic, Shots };

    Kind kind = Kind::Analytic;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
    /// Skip imaginary-part circuits when the problem is real. Their exact
    /// value is zero there.
    bool skip_imaginary_when_real = true;

    [[nodiscard]] static CostMode analytic() { return {}; }
    [[nodiscard]] static CostMode with_shots(std::uint64_t shots, std::uint64_t seed) {
        if (shots == 0) {
            throw ArgumentError("shot count must be positive");
        }
        return CostMode{Kind::Shots, shots, seed, true};
    }

    [[nodiscard]] bool is_analytic() const noexcept { return kind == Kind::Analytic; }
    [[nodiscard]] std::string name() const {
        return is_analytic() ? "analytic" : "shots:" + std::to_string(shots);
    }
};

/// u(m, m', l) for l in {-1, 0, ..., n-1}; l = -1 is the identity insertion.
class UTable {
  public:
    UTable() = default;
    UTable(std::size_t n_terms, std::size_t n_qubits)
        : n_terms_(n_terms), n_qubits_(n_qubits),
          data_(n_terms * n_terms * (n_qubits + 1)) {}

    [[nodiscard]] std::size_t n_terms() const noexcept { return n_terms_; }
    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }

    [[nodiscard]] Complex &at(std::size_t m, std::size_t mp, int l) {
        return data_[offset(m, mp, l)];
    }
    [[nodiscard]] const Complex &at(std::size_t m, std::size_t mp, int l) const {
        return data_[offset(m, mp, l)];
    }

  private:
    [[nodiscard]] std::size_t offset(std::size_t m, std::size_t mp, int l) const {
        if (m >= n_terms_ || mp >= n_terms_ || l < -1 || l >= static_cast<int>(n_qubits_)) {
            throw IndexError("u-table index (" + std::to_string(m) + ", " + std::to_string(mp) +
                             ", " + std::to_string(l) + ") out of range");
        }
        return (m * n_terms_ + mp) * (n_qubits_ + 1) + static_cast<std::size_t>(l + 1);
    }

    std::size_t n_terms_ = 0;
    std::size_t n_qubits_ = 0;
    std::vector<Complex> data_;
};

struct CostEvaluation {
    double value = 0.0;
    CostMode mode;
    double numerator = 0.0;
    double denominator = 0.0;
    std::optional<UTable> u_table;
};

namespace detail {

inline void check_term_index(const LinearProblem &problem, std::size_t m, std::size_t mp, int l) {
    const std::size_t terms = problem.decomposition.size();
    if (m >= terms || mp >= terms) {
        throw IndexError("term index out of range (decomposition has " + std::to_string(terms) +
                         " terms)");
    }
    if (l < -1 || l >= static_cast<int>(problem.n_qubits)) {
        throw IndexError("qubit index l = " + std::to_string(l) + " out of range");
    }
}

inline void check_problem(const LinearProblem &problem, const AnsatzSpec &spec) {
    if (problem.decomposition.terms.empty()) {
        throw ArgumentError("problem decomposition is empty");
    }
    if (spec.n_qubits != problem.n_qubits) {
        throw SizeError("ansatz on " + std::to_string(spec.n_qubits) + " qubits, problem on " +
                        std::to_string(problem.n_qubits));
    }
}

/// Sum over l of <chi|Z_l|chi> for every qubit l.
inline double sum_z_expectations(const Statevector &chi) {
    const std::size_t n = chi.n_qubits();
    double total = 0.0;
    for (BasisIndex i = 0; i < chi.dim(); ++i) {
        const int ones = std::popcount(i);
        total += std::norm(chi[i]) * static_cast<double>(static_cast<int>(n) - 2 * ones);
    }
    return total;
}

/// <a|Z_l|b>, with Z_l omitted for l = -1.
inline Complex z_matrix_element(const Statevector &a, const Statevector &b, int l) {
    if (l < 0) {
        return inner_product(a, b);
    }
    const BasisIndex bit = qubit_bit(static_cast<std::size_t>(l), a.n_qubits());
    Complex s = 0.0;
    for (BasisIndex i = 0; i < a.dim(); ++i) {
        const Complex t = std::conj(a[i]) * b[i];
        s += (i & bit) ? -t : t;
    }
    return s;
}

/// Phi = A x computed term by term as sum_m c_m A_m x.
inline Statevector apply_decomposition(const PauliDecomposition &d, const Statevector &x) {
    Statevector phi(x.n_qubits(), std::vector<Complex>(x.dim(), 0.0));
    auto out = phi.amplitudes();
    for (const auto &t : d.terms) {
        const BasisIndex flip = t.string.flip_mask();
        for (BasisIndex i = 0; i < x.dim(); ++i) {
            out[i ^ flip] += t.coefficient * t.string.phase_on(i) * x[i];
        }
    }
    return phi;
}

/// Numerator and denominator shared by the local and global cost.
struct CostParts {
    double local_numerator = 0.0;  // sum_l sum_{m,m'} u_{m,m',l} c_m c*_{m'}
    double global_numerator = 0.0; // |<b|Phi>|^2
    double denominator = 0.0;      // <Phi|Phi>
};

inline CostParts analytic_parts(const LinearProblem &problem, const Statevector &x) {
    const Statevector phi = apply_decomposition(problem.decomposition, x);
    const Statevector chi = apply_circuit(phi, problem.b_prep, Direction::Adjoint);
    return {sum_z_expectations(chi), std::norm(chi[0]), phi.norm_squared()};
}

inline double local_from_parts(double numerator, double denominator, std::size_t n) {
    if (std::isfinite(denominator) && denominator <= kDegenerateDenominator) {
        throw DegenerateStateError("<Phi|Phi> = " + std::to_string(denominator) +
                                   " is numerically zero");
    }
    return 0.5 - numerator / (2.0 * static_cast<double>(n) * denominator);
}

inline double global_from_parts(double numerator, double denominator) {
    if (std::isfinite(denominator) && denominator <= kDegenerateDenominator) {
        throw DegenerateStateError("<Phi|Phi> = " + std::to_string(denominator) +
                                   " is numerically zero");
    }
    return 1.0 - numerator / denominator;
}

/// Ancilla-last expectation P0 - P1 estimated from `shots` samples.
inline double sample_ancilla_z(const Statevector &s, std::uint64_t shots, std::uint64_t seed) {
    double p1 = 0.0;
    for (BasisIndex i = 1; i < s.dim(); i += 2) {
        p1 += std::norm(s[i]);
    }
    p1 = std::clamp(p1, 0.0, 1.0);
    std::mt19937_64 rng(seed);
    std::binomial_distribution<std::uint64_t> draw(shots, p1);
    const auto ones = static_cast<double>(draw(rng));
    const auto total = static_cast<double>(shots);
    return (total - 2.0 * ones) / total;
}

inline PauliString with_ancilla(const PauliString &p) { return PauliString(p.str() + "I"); }

/// Final ancilla rotation of a Hadamard test; Im adds S^dagger before H.
inline void close_hadamard_test(Circuit &c, std::size_t ancilla, bool imaginary) {
    if (imaginary) {
        c.add(Gate::single(GateKind::Sdg, ancilla));
    }
    c.add(Gate::single(GateKind::H, ancilla));
}

} // namespace detail

/**
 * Exact <0|V^dag A_{m'}^dag U Z_l U^dag A_m V|0>: psi = A_m V|0>,
 * phi = A_{m'} V|0>, then <U^dag phi|Z_l|U^dag psi>.
 */
[[nodiscard]] inline Complex u_coefficient_analytic(const LinearProblem &problem,
                                                    const AnsatzSpec &spec,
                                                    std::span<const double> params, std::size_t m,
                                                    std::size_t mp, int l) {
    detail::check_problem(problem, spec);
    detail::check_term_index(problem, m, mp, l);
    const Statevector x = ansatz_state(spec, params);
    const auto &terms = problem.decomposition.terms;
    Statevector psi = apply_pauli_string(x, terms[m].string);
    Statevector phi = apply_pauli_string(x, terms[mp].string);
    if (l >= 0) {
        psi = apply_circuit(std::move(psi), problem.b_prep, Direction::Adjoint);
        phi = apply_circuit(std::move(phi), problem.b_prep, Direction::Adjoint);
    }
    return detail::z_matrix_element(phi, psi, l);
}

/// Full analytic table, evaluating m' <= m and filling the rest by conjugation.
[[nodiscard]] inline UTable u_table_analytic(const LinearProblem &problem, const AnsatzSpec &spec,
                                             std::span<const double> params) {
    detail::check_problem(problem, spec);
    const Statevector x = ansatz_state(spec, params);
    const auto &terms = problem.decomposition.terms;
    const std::size_t m_count = terms.size();
    const int n = static_cast<int>(problem.n_qubits);

    std::vector<Statevector> psi;
    std::vector<Statevector> chi;
    psi.reserve(m_count);
    chi.reserve(m_count);
    for (const auto &t : terms) {
        psi.push_back(apply_pauli_string(x, t.string));
        chi.push_back(apply_circuit(psi.back(), problem.b_prep, Direction::Adjoint));
    }
    UTable table(m_count, problem.n_qubits);
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t mp = 0; mp <= m; ++mp) {
            for (int l = -1; l < n; ++l) {
                const Complex u = l < 0 ? inner_product(psi[mp], psi[m])
                                        : detail::z_matrix_element(chi[mp], chi[m], l);
                table.at(m, mp, l) = u;
                table.at(mp, m, l) = std::conj(u);
            }
        }
    }
    return table;
}

/// Hadamard-test circuit whose ancilla gives Re (or Im) of u(m, m', l).
/// The ancilla is the last qubit; only A_m, Z_l and A_{m'}^dag are controlled.
[[nodiscard]] inline Circuit hadamard_test_circuit(const LinearProblem &problem,
                                                   const AnsatzSpec &spec,
                                                   std::span<const double> params, std::size_t m,
                                                   std::size_t mp, int l, bool imaginary) {
    detail::check_problem(problem, spec);
    detail::check_term_index(problem, m, mp, l);
    const std::size_t n = problem.n_qubits;
    const std::size_t anc = n;
    const auto &terms = problem.decomposition.terms;

    Circuit c(n + 1);
    c.add(Gate::single(GateKind::H, anc));
    for (auto &g : spec.circuit(params).embedded(n + 1, 0).gates) {
        c.add(std::move(g));
    }
    c.add(Gate::controlled_pauli_string(anc, detail::with_ancilla(terms[m].string)));
    if (l >= 0) {
        const Circuit u_dag = problem.b_prep.adjoint().embedded(n + 1, 0);
        for (const auto &g : u_dag.gates) {
            c.add(g);
        }
        c.add(Gate::controlled_pauli_string(
            anc, detail::with_ancilla(PauliString::single(n, static_cast<std::size_t>(l), 'Z'))));
        for (const auto &g : problem.b_prep.embedded(n + 1, 0).gates) {
            c.add(g);
        }
    }
    // Pauli strings are Hermitian, so A_{m'}^dag = A_{m'}.
    c.add(Gate::controlled_pauli_string(anc, detail::with_ancilla(terms[mp].string)));
    detail::close_hadamard_test(c, anc, imaginary);
    return c;
}

namespace detail {

inline double hadamard_estimate(const LinearProblem &problem, const AnsatzSpec &spec,
                                std::span<const double> params, std::size_t m, std::size_t mp,
                                int l, bool imaginary, std::uint64_t shots, std::uint64_t seed) {
    const Circuit c = hadamard_test_circuit(problem, spec, params, m, mp, l, imaginary);
    const Statevector out = apply_circuit(init_zero_state(problem.n_qubits + 1), c);
    return sample_ancilla_z(out, shots, seed);
}

inline bool needs_imaginary(const LinearProblem &problem, const CostMode &mode, std::size_t m,
                            std::size_t mp) {
    // Diagonal entries are expectations of Hermitian operators.
    return m != mp && !(mode.skip_imaginary_when_real && problem.is_real());
}

} // namespace detail

/**
 * Shot-based estimate of u(m, m', l). Shots are split evenly between the
 * real- and imaginary-part tests when both are run.
 */
[[nodiscard]] inline Complex u_coefficient_hadamard(const LinearProblem &problem,
                                                    const AnsatzSpec &spec,
                                                    std::span<const double> params, std::size_t m,
                                                    std::size_t mp, int l, std::uint64_t shots,
                                                    std::uint64_t seed,
                                                    bool skip_imaginary_when_real = true) {
    if (shots == 0) {
        throw ArgumentError("shot count must be positive");
    }
    CostMode mode = CostMode::with_shots(shots, seed);
    mode.skip_imaginary_when_real = skip_imaginary_when_real;
    const bool imag = detail::needs_imaginary(problem, mode, m, mp);
    const std::uint64_t part_shots = imag ? std::max<std::uint64_t>(1, shots / 2) : shots;
    const double re = detail::hadamard_estimate(problem, spec, params, m, mp, l, false, part_shots,
                                                derive_seed(seed, {0}));
    const double im = imag ? detail::hadamard_estimate(problem, spec, params, m, mp, l, true,
                                                       part_shots, derive_seed(seed, {1}))
                           : 0.0;
    return {re, im};
}

/// Shot-based table; coefficient (m, m', l) draws from a sub-seed of `seed`.
[[nodiscard]] inline UTable u_table_hadamard(const LinearProblem &problem, const AnsatzSpec &spec,
                                             std::span<const double> params, const CostMode &mode) {
    detail::check_problem(problem, spec);
    const std::size_t m_count = problem.decomposition.size();
    const int n = static_cast<int>(problem.n_qubits);
    UTable table(m_count, problem.n_qubits);
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t mp = 0; mp <= m; ++mp) {
            for (int l = -1; l < n; ++l) {
                const std::uint64_t sub =
                    derive_seed(mode.seed, {m, mp, static_cast<std::uint64_t>(l + 1)});
                Complex u;
                if (m == mp && l < 0) {
                    // <x|A_m^dag A_m|x> = 1 for unitary A_m; the test is deterministic.
                    u = 1.0;
                } else {
                    u = u_coefficient_hadamard(problem, spec, params, m, mp, l, mode.shots, sub,
                                               mode.skip_imaginary_when_real);
                }
                table.at(m, mp, l) = u;
                table.at(mp, m, l) = std::conj(u);
            }
        }
    }
    return table;
}

/// Weighted sum sum_{m,m'} u_{m,m',l} c_m c*_{m'}, real part.
[[nodiscard]] inline double weighted_u_sum(const UTable &table, const PauliDecomposition &d,
                                           int l) {
    Complex s = 0.0;
    for (std::size_t m = 0; m < d.size(); ++m) {
        for (std::size_t mp = 0; mp < d.size(); ++mp) {
            s += table.at(m, mp, l) * d.terms[m].coefficient * std::conj(d.terms[mp].coefficient);
        }
    }
    return s.real();
}

/// Local cost assembled from a u-table.
[[nodiscard]] inline CostEvaluation local_cost_from_table(const LinearProblem &problem,
                                                          UTable table, const CostMode &mode) {
    double numerator = 0.0;
    for (int l = 0; l < static_cast<int>(problem.n_qubits); ++l) {
        numerator += weighted_u_sum(table, problem.decomposition, l);
    }
    const double denominator = weighted_u_sum(table, problem.decomposition, -1);
    const double value = detail::local_from_parts(numerator, denominator, problem.n_qubits);
    return {value, mode, numerator, denominator, std::move(table)};
}

/**
 * Local cost C = 1/2 - (1/2n) sum_l N_l / D.
 *
 * In Analytic mode the u-sums are contracted before evaluation:
 * sum_{m,m'} u_{m,m',l} c_m c*_{m'} = <Phi|U Z_l U^dag|Phi> with
 * Phi = sum_m c_m A_m V|0>, which is the same bilinear form evaluated once.
 */
[[nodiscard]] inline CostEvaluation local_cost(const LinearProblem &problem,
                                               const AnsatzSpec &spec,
                                               std::span<const double> params,
                                               const CostMode &mode = CostMode::analytic()) {
    detail::check_problem(problem, spec);
    if (mode.is_analytic()) {
        const auto parts = detail::analytic_parts(problem, ansatz_state(spec, params));
        const double value =
            detail::local_from_parts(parts.local_numerator, parts.denominator, problem.n_qubits);
        return {value, mode, parts.local_numerator, parts.denominator, std::nullopt};
    }
    return local_cost_from_table(problem, u_table_hadamard(problem, spec, params, mode), mode);
}

/// <Phi|Phi> = sum_{m,m'} u_{m,m',-1} c_m c*_{m'}.
[[nodiscard]] inline double norm_phi_squared(const LinearProblem &problem, const AnsatzSpec &spec,
                                             std::span<const double> params,
                                             const CostMode &mode = CostMode::analytic()) {
    detail::check_problem(problem, spec);
    if (mode.is_analytic()) {
        return detail::apply_decomposition(problem.decomposition, ansatz_state(spec, params))
            .norm_squared();
    }
    return weighted_u_sum(u_table_hadamard(problem, spec, params, mode), problem.decomposition, -1);
}

/// Hadamard-test circuit for Re/Im of <0|U^dag A_m V|0> (fully controlled).
[[nodiscard]] inline Circuit overlap_test_circuit(const LinearProblem &problem,
                                                  const AnsatzSpec &spec,
                                                  std::span<const double> params, std::size_t m,
                                                  bool imaginary) {
    detail::check_problem(problem, spec);
    const std::size_t n = problem.n_qubits;
    const std::size_t anc = n;
    Circuit c(n + 1);
    c.add(Gate::single(GateKind::H, anc));
    for (auto &g : spec.circuit(params).embedded(n + 1, 0, anc).gates) {
        c.add(std::move(g));
    }
    c.add(Gate::controlled_pauli_string(
        anc, detail::with_ancilla(problem.decomposition.terms.at(m).string)));
    for (auto &g : problem.b_prep.adjoint().embedded(n + 1, 0, anc).gates) {
        c.add(std::move(g));
    }
    detail::close_hadamard_test(c, anc, imaginary);
    return c;
}

/// Global cost C_p = 1 - |<b|Phi>|^2 / <Phi|Phi>.
[[nodiscard]] inline CostEvaluation global_cost(const LinearProblem &problem,
                                                const AnsatzSpec &spec,
                                                std::span<const double> params,
                                                const CostMode &mode = CostMode::analytic()) {
    detail::check_problem(problem, spec);
    if (mode.is_analytic()) {
        const auto parts = detail::analytic_parts(problem, ansatz_state(spec, params));
        const double value = detail::global_from_parts(parts.global_numerator, parts.denominator);
        return {value, mode, parts.global_numerator, parts.denominator, std::nullopt};
    }
    UTable table = u_table_hadamard(problem, spec, params, mode);
    const double denominator = weighted_u_sum(table, problem.decomposition, -1);

    // |<b|Phi>|^2 = |sum_m c_m <0|U^dag A_m V|0>|^2.
    const bool imag = !(mode.skip_imaginary_when_real && problem.is_real());
    const std::uint64_t part_shots = imag ? std::max<std::uint64_t>(1, mode.shots / 2) : mode.shots;
    const std::uint64_t base = derive_seed(mode.seed, {0xb0});
    Complex overlap = 0.0;
    for (std::size_t m = 0; m < problem.decomposition.size(); ++m) {
        auto estimate = [&](bool im) {
            const Circuit c = overlap_test_circuit(problem, spec, params, m, im);
            const Statevector out = apply_circuit(init_zero_state(problem.n_qubits + 1), c);
            return detail::sample_ancilla_z(out, part_shots, derive_seed(base, {m, im ? 1u : 0u}));
        };
        const Complex beta{estimate(false), imag ? estimate(true) : 0.0};
        overlap += problem.decomposition.terms[m].coefficient * beta;
    }
    const double numerator = std::norm(overlap);
    const double value = detail::global_from_parts(numerator, denominator);
    return {value, mode, numerator, denominator, std::move(table)};
}

} // namespace vqls
