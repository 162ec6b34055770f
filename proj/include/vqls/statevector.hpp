#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vqls/errors.hpp"
#include "vqls/pauli_string.hpp"

namespace vqls {

/// Default simulator cap. Dense amplitudes at 12 qubits are 64 KiB.
inline constexpr std::size_t kDefaultMaxQubits = 12;

/**
 * Dense n-qubit statevector. Qubit 0 is the most significant bit of the
 * basis index, so |q0 q1 ... q_{n-1}> reads like a binary number.
 */
class Statevector {
  public:
    Statevector() = default;

    explicit Statevector(std::size_t n_qubits, std::size_t max_qubits = kDefaultMaxQubits)
        : n_qubits_(check_size(n_qubits, max_qubits)),
          amplitudes_(std::size_t{1} << n_qubits) {
        amplitudes_[0] = 1.0;
    }

    Statevector(std::size_t n_qubits, std::vector<Complex> amplitudes)
        : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
        if (n_qubits_ == 0 || n_qubits_ >= 63 ||
            amplitudes_.size() != (std::size_t{1} << n_qubits_)) {
            throw SizeError("amplitude vector of length " +
                            std::to_string(amplitudes_.size()) +
                            " does not describe " + std::to_string(n_qubits_) +
                            " qubits");
        }
    }

    /// Computational basis state |index>.
    [[nodiscard]] static Statevector basis(std::size_t n_qubits, BasisIndex index) {
        Statevector s(n_qubits);
        if (index >= s.dim()) {
            throw IndexError("basis index " + std::to_string(index) + " out of range");
        }
        s.amplitudes_[0] = 0.0;
        s.amplitudes_[index] = 1.0;
        return s;
    }

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dim() const noexcept { return amplitudes_.size(); }

    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amplitudes_; }

    [[nodiscard]] const Complex &operator[](BasisIndex i) const { return amplitudes_[i]; }
    [[nodiscard]] Complex &operator[](BasisIndex i) { return amplitudes_[i]; }

    [[nodiscard]] double norm_squared() const noexcept {
        double s = 0.0;
        for (const auto &a : amplitudes_) {
            s += std::norm(a);
        }
        return s;
    }

    [[nodiscard]] std::vector<double> probabilities() const {
        std::vector<double> p(amplitudes_.size());
        std::transform(amplitudes_.begin(), amplitudes_.end(), p.begin(),
                       [](const Complex &a) { return std::norm(a); });
        return p;
    }

  private:
    static std::size_t check_size(std::size_t n, std::size_t max_qubits) {
        if (n < 1 || n > max_qubits) {
            throw SizeError("qubit count " + std::to_string(n) +
                            " outside supported range [1, " +
                            std::to_string(max_qubits) + "]");
        }
        return n;
    }

    std::size_t n_qubits_ = 0;
    std::vector<Complex> amplitudes_;
};

[[nodiscard]] inline Statevector init_zero_state(std::size_t n,
                                                 std::size_t max_qubits = kDefaultMaxQubits) {
    return Statevector(n, max_qubits);
}

enum class GateKind { H, X, Y, Z, S, Sdg, Ry, CZ, CNOT, PauliString };

[[nodiscard]] inline const char *gate_name(GateKind k) {
    switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::S: return "S";
    case GateKind::Sdg: return "Sdg";
    case GateKind::Ry: return "Ry";
    case GateKind::CZ: return "CZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::PauliString: return "PauliString";
    }
    return "?";
}

/**
 * One circuit instruction.
 *
 * Single-qubit kinds carry one target. CZ carries two targets; CNOT carries
 * (control, target). PauliString applies `pauli` to the whole register and
 * has no targets. Any gate may additionally be conditioned on `control`,
 * which is how the Hadamard tests build controlled-A_m and controlled-Z_l.
 */
struct Gate {
    GateKind kind = GateKind::X;
    std::vector<std::size_t> targets;
    double angle = 0.0;
    vqls::PauliString pauli;
    std::optional<std::size_t> control;

    [[nodiscard]] static Gate single(GateKind kind, std::size_t q) {
        return Gate{kind, {q}, 0.0, {}, std::nullopt};
    }
    [[nodiscard]] static Gate ry(std::size_t q, double angle) {
        return Gate{GateKind::Ry, {q}, angle, {}, std::nullopt};
    }
    [[nodiscard]] static Gate cz(std::size_t a, std::size_t b) {
        return Gate{GateKind::CZ, {a, b}, 0.0, {}, std::nullopt};
    }
    [[nodiscard]] static Gate cnot(std::size_t control, std::size_t target) {
        return Gate{GateKind::CNOT, {control, target}, 0.0, {}, std::nullopt};
    }
    [[nodiscard]] static Gate pauli_string(vqls::PauliString p) {
        return Gate{GateKind::PauliString, {}, 0.0, std::move(p), std::nullopt};
    }
    [[nodiscard]] static Gate controlled_pauli_string(std::size_t control, vqls::PauliString p) {
        return Gate{GateKind::PauliString, {}, 0.0, std::move(p), control};
    }

    [[nodiscard]] Gate controlled_by(std::size_t q) const {
        Gate g = *this;
        g.control = q;
        return g;
    }

    [[nodiscard]] Gate adjoint() const {
        Gate g = *this;
        switch (kind) {
        case GateKind::S: g.kind = GateKind::Sdg; break;
        case GateKind::Sdg: g.kind = GateKind::S; break;
        case GateKind::Ry: g.angle = -angle; break;
        default: break; // remaining kinds are Hermitian
        }
        return g;
    }

    /// Throws IndexError / SizeError if the gate cannot act on `n` qubits.
    void validate(std::size_t n) const {
        std::size_t expected = 1;
        if (kind == GateKind::CZ || kind == GateKind::CNOT) {
            expected = 2;
        } else if (kind == GateKind::PauliString) {
            expected = 0;
            if (pauli.size() != n) {
                throw SizeError("Pauli string \"" + pauli.str() + "\" has length " +
                                std::to_string(pauli.size()) + ", register has " +
                                std::to_string(n) + " qubits");
            }
        }
        if (targets.size() != expected) {
            throw ArgumentError(std::string(gate_name(kind)) + " expects " +
                                std::to_string(expected) + " target(s), got " +
                                std::to_string(targets.size()));
        }
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (targets[i] >= n) {
                throw IndexError(std::string(gate_name(kind)) + " target " +
                                 std::to_string(targets[i]) + " out of range for " +
                                 std::to_string(n) + " qubits");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (targets[i] == targets[j]) {
                    throw IndexError(std::string(gate_name(kind)) + " has repeated target " +
                                     std::to_string(targets[i]));
                }
            }
        }
        if (control) {
            if (*control >= n) {
                throw IndexError("control qubit " + std::to_string(*control) + " out of range");
            }
            if (std::find(targets.begin(), targets.end(), *control) != targets.end() ||
                (kind == GateKind::PauliString && pauli[*control] != 'I')) {
                throw IndexError("control qubit " + std::to_string(*control) +
                                 " overlaps the gate's targets");
            }
        }
    }
};

struct Circuit {
    std::size_t n_qubits = 0;
    std::vector<Gate> gates;

    Circuit() = default;
    explicit Circuit(std::size_t n, std::vector<Gate> g = {}) : n_qubits(n), gates(std::move(g)) {}

    Circuit &add(Gate g) {
        g.validate(n_qubits);
        gates.push_back(std::move(g));
        return *this;
    }

    void validate() const {
        for (const auto &g : gates) {
            g.validate(n_qubits);
        }
    }

    /// Reversed gate order with every gate conjugate-transposed.
    [[nodiscard]] Circuit adjoint() const {
        Circuit out(n_qubits);
        out.gates.reserve(gates.size());
        for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
            out.gates.push_back(it->adjoint());
        }
        return out;
    }

    /// Embeds this circuit in a larger register, shifting qubit indices by
    /// `offset`, and optionally conditions every gate on `control`.
    [[nodiscard]] Circuit embedded(std::size_t n_total, std::size_t offset,
                                   std::optional<std::size_t> control = std::nullopt) const {
        Circuit out(n_total);
        for (const auto &g : gates) {
            Gate h = g;
            for (auto &t : h.targets) {
                t += offset;
            }
            if (h.kind == GateKind::PauliString) {
                std::string s(n_total, 'I');
                std::copy(g.pauli.str().begin(), g.pauli.str().end(), s.begin() + offset);
                h.pauli = vqls::PauliString(s);
            }
            if (h.control) {
                throw ArgumentError("cannot embed an already-controlled gate");
            }
            h.control = control;
            out.add(std::move(h));
        }
        return out;
    }
};

enum class Direction { Forward, Adjoint };

namespace detail {

using Mat2 = std::array<Complex, 4>; // row-major 2x2

inline Mat2 single_qubit_matrix(const Gate &g) {
    const double r = 1.0 / std::sqrt(2.0);
    const Complex i{0.0, 1.0};
    switch (g.kind) {
    case GateKind::H: return {r, r, r, -r};
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::Y: return {0.0, -i, i, 0.0};
    case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
    case GateKind::S: return {1.0, 0.0, 0.0, i};
    case GateKind::Sdg: return {1.0, 0.0, 0.0, -i};
    case GateKind::Ry: {
        const double c = std::cos(g.angle / 2.0);
        const double s = std::sin(g.angle / 2.0);
        return {c, -s, s, c};
    }
    default: break;
    }
    throw ArgumentError(std::string(gate_name(g.kind)) + " is not a single-qubit gate");
}

inline void apply_single(std::span<Complex> a, std::size_t n, const Gate &g) {
    const Mat2 m = single_qubit_matrix(g);
    const BasisIndex bit = qubit_bit(g.targets[0], n);
    const BasisIndex cmask = g.control ? qubit_bit(*g.control, n) : 0;
    for (BasisIndex i = 0; i < a.size(); ++i) {
        if ((i & bit) != 0 || (i & cmask) != cmask) {
            continue;
        }
        const BasisIndex j = i | bit;
        const Complex a0 = a[i];
        const Complex a1 = a[j];
        a[i] = m[0] * a0 + m[1] * a1;
        a[j] = m[2] * a0 + m[3] * a1;
    }
}

inline void apply_pauli(std::span<Complex> a, const vqls::PauliString &p, BasisIndex cmask) {
    const BasisIndex flip = p.flip_mask();
    if (flip == 0) {
        for (BasisIndex i = 0; i < a.size(); ++i) {
            if ((i & cmask) == cmask) {
                a[i] *= p.phase_on(i);
            }
        }
        return;
    }
    // Pairs (i, i ^ flip) are swapped with phases; visit each pair once.
    const BasisIndex top = BasisIndex{1} << (std::bit_width(flip) - 1);
    for (BasisIndex i = 0; i < a.size(); ++i) {
        if ((i & top) != 0 || (i & cmask) != cmask) {
            continue;
        }
        const BasisIndex j = i ^ flip;
        const Complex ai = a[i];
        const Complex aj = a[j];
        a[j] = p.phase_on(i) * ai;
        a[i] = p.phase_on(j) * aj;
    }
}

inline void apply_in_place(std::span<Complex> a, std::size_t n, const Gate &g) {
    switch (g.kind) {
    case GateKind::CZ: {
        const BasisIndex mask = qubit_bit(g.targets[0], n) | qubit_bit(g.targets[1], n) |
                                (g.control ? qubit_bit(*g.control, n) : 0);
        for (BasisIndex i = 0; i < a.size(); ++i) {
            if ((i & mask) == mask) {
                a[i] = -a[i];
            }
        }
        return;
    }
    case GateKind::CNOT: {
        const BasisIndex cmask = qubit_bit(g.targets[0], n) |
                                 (g.control ? qubit_bit(*g.control, n) : 0);
        const BasisIndex t = qubit_bit(g.targets[1], n);
        for (BasisIndex i = 0; i < a.size(); ++i) {
            if ((i & cmask) == cmask && (i & t) == 0) {
                std::swap(a[i], a[i | t]);
            }
        }
        return;
    }
    case GateKind::PauliString:
        apply_pauli(a, g.pauli, g.control ? qubit_bit(*g.control, n) : 0);
        return;
    default:
        apply_single(a, n, g);
        return;
    }
}

} // namespace detail

[[nodiscard]] inline Statevector apply_gate(Statevector state, const Gate &gate) {
    gate.validate(state.n_qubits());
    detail::apply_in_place(state.amplitudes(), state.n_qubits(), gate);
    return state;
}

[[nodiscard]] inline Statevector apply_circuit(Statevector state, const Circuit &circuit,
                                               Direction direction = Direction::Forward) {
    if (circuit.n_qubits != state.n_qubits()) {
        throw SizeError("circuit on " + std::to_string(circuit.n_qubits) +
                        " qubits applied to a " + std::to_string(state.n_qubits()) +
                        "-qubit state");
    }
    const std::size_t n = state.n_qubits();
    if (direction == Direction::Forward) {
        for (const auto &g : circuit.gates) {
            g.validate(n);
            detail::apply_in_place(state.amplitudes(), n, g);
        }
    } else {
        for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
            it->validate(n);
            detail::apply_in_place(state.amplitudes(), n, it->adjoint());
        }
    }
    return state;
}

[[nodiscard]] inline Statevector apply_pauli_string(Statevector state, const PauliString &p) {
    if (p.size() != state.n_qubits()) {
        throw SizeError("Pauli string \"" + p.str() + "\" does not match " +
                        std::to_string(state.n_qubits()) + "-qubit state");
    }
    detail::apply_pauli(state.amplitudes(), p, 0);
    return state;
}

/// <a|b>, conjugate-linear in `a`.
[[nodiscard]] inline Complex inner_product(const Statevector &a, const Statevector &b) {
    if (a.n_qubits() != b.n_qubits()) {
        throw SizeError("inner product of states with different qubit counts");
    }
    Complex s = 0.0;
    const auto x = a.amplitudes();
    const auto y = b.amplitudes();
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += std::conj(x[i]) * y[i];
    }
    return s;
}

using Histogram = std::map<BasisIndex, std::uint64_t>;

/// Multinomial draw of `shots` computational-basis measurements.
[[nodiscard]] inline Histogram sample_counts(const Statevector &state, std::uint64_t shots,
                                             std::uint64_t seed) {
    if (shots == 0) {
        throw ArgumentError("shot count must be positive");
    }
    const auto p = state.probabilities();
    std::mt19937_64 rng(seed);
    std::discrete_distribution<BasisIndex> dist(p.begin(), p.end());
    std::vector<std::uint64_t> counts(p.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        ++counts[dist(rng)];
    }
    Histogram h;
    for (BasisIndex i = 0; i < counts.size(); ++i) {
        if (counts[i] != 0) {
            h.emplace(i, counts[i]);
        }
    }
    return h;
}

} // namespace vqls
