#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vqls/errors.hpp"
#include "vqls/statevector.hpp"

namespace vqls {

using ParamVector = std::vector<double>;

/**
 * Fixed-structure hardware-efficient ansatz: an Ry column on every qubit,
 * then `layers` repetitions of a CZ pass followed by an Ry column. The CZ
 * passes alternate between pairs (0,1), (2,3), ... on even layers and
 * (1,2), (3,4), ... on odd layers; an unpaired qubit is skipped.
 *
 * Running both pair sets back to back inside one layer with no rotation in
 * between leaves some real states unreachable at any depth (the 1D heat
 * solution on 3 qubits stalls at infidelity ~1.5e-3).
 */
struct AnsatzSpec {
    std::size_t n_qubits = 0;
    std::size_t layers = 0;

    [[nodiscard]] std::size_t param_count() const noexcept { return n_qubits * (layers + 1); }

    /// First qubit of the CZ pairs in `layer`: 0 for even layers, 1 for odd
    /// ones. Two qubits have no odd pair, so every layer uses (0, 1).
    [[nodiscard]] std::size_t pair_offset(std::size_t layer) const noexcept {
        return n_qubits > 2 ? layer % 2 : 0;
    }

    /// Gate list with Ry angles filled in from `params` (in gate order).
    [[nodiscard]] Circuit circuit(std::span<const double> params) const {
        if (params.size() != param_count()) {
            throw SizeError("ansatz expects " + std::to_string(param_count()) +
                            " parameters, got " + std::to_string(params.size()));
        }
        Circuit c(n_qubits);
        c.gates.reserve(param_count() + layers * n_qubits);
        std::size_t k = 0;
        for (std::size_t q = 0; q < n_qubits; ++q) {
            c.gates.push_back(Gate::ry(q, params[k++]));
        }
        for (std::size_t layer = 0; layer < layers; ++layer) {
            for (std::size_t q = pair_offset(layer); q + 1 < n_qubits; q += 2) {
                c.gates.push_back(Gate::cz(q, q + 1));
            }
            for (std::size_t q = 0; q < n_qubits; ++q) {
                c.gates.push_back(Gate::ry(q, params[k++]));
            }
        }
        return c;
    }
};

/// Depth used when the caller does not pick one.
[[nodiscard]] inline std::size_t default_layers(std::size_t n_qubits) noexcept {
    return n_qubits <= 4 ? 4 : 8;
}

[[nodiscard]] inline AnsatzSpec build_ansatz(std::size_t n, std::size_t layers) {
    if (n < 2) {
        throw ArgumentError("hardware-efficient ansatz needs at least 2 qubits, got " +
                            std::to_string(n));
    }
    if (layers < 1) {
        throw ArgumentError("ansatz needs at least one layer");
    }
    return AnsatzSpec{n, layers};
}

/// Real amplitudes of V(params)|0...0>. Same gate sequence as
/// `spec.circuit(params)`; this sits in the optimizer's inner loop.
[[nodiscard]] inline std::vector<double> ansatz_amplitudes(const AnsatzSpec &spec,
                                                           std::span<const double> params) {
    if (params.size() != spec.param_count()) {
        throw SizeError("ansatz expects " + std::to_string(spec.param_count()) +
                        " parameters, got " + std::to_string(params.size()));
    }
    const std::size_t n = spec.n_qubits;
    const std::size_t dim = std::size_t{1} << n;
    std::vector<double> a(dim, 0.0);
    a[0] = 1.0;
    auto ry = [&](std::size_t q, double angle) {
        const double c = std::cos(angle / 2.0);
        const double s = std::sin(angle / 2.0);
        const std::size_t bit = qubit_bit(q, n);
        for (std::size_t i = 0; i < dim; ++i) {
            if ((i & bit) == 0) {
                const double a0 = a[i];
                const double a1 = a[i | bit];
                a[i] = c * a0 - s * a1;
                a[i | bit] = s * a0 + c * a1;
            }
        }
    };
    std::size_t k = 0;
    for (std::size_t q = 0; q < n; ++q) {
        ry(q, params[k++]);
    }
    for (std::size_t layer = 0; layer < spec.layers; ++layer) {
        for (std::size_t q = spec.pair_offset(layer); q + 1 < n; q += 2) {
            const std::size_t mask = qubit_bit(q, n) | qubit_bit(q + 1, n);
            for (std::size_t i = 0; i < dim; ++i) {
                if ((i & mask) == mask) {
                    a[i] = -a[i];
                }
            }
        }
        for (std::size_t q = 0; q < n; ++q) {
            ry(q, params[k++]);
        }
    }
    return a;
}

/// V(params)|0...0>.
[[nodiscard]] inline Statevector ansatz_state(const AnsatzSpec &spec,
                                              std::span<const double> params) {
    const auto a = ansatz_amplitudes(spec, params);
    return Statevector(spec.n_qubits, std::vector<Complex>(a.begin(), a.end()));
}

inline void to_json(nlohmann::json &j, const AnsatzSpec &s) {
    j = nlohmann::json{{"n", s.n_qubits}, {"layers", s.layers}, {"param_count", s.param_count()}};
}

inline void from_json(const nlohmann::json &j, AnsatzSpec &s) {
    s = build_ansatz(j.at("n").get<std::size_t>(), j.at("layers").get<std::size_t>());
}

} // namespace vqls
