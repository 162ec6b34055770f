#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vqls/errors.hpp"
#include "vqls/pauli_string.hpp"

namespace vqls {

using DenseMatrix = Eigen::MatrixXcd;

/// Largest register for which dense Pauli matrices and full decomposition are offered.
inline constexpr std::size_t kMaxDenseQubits = 8;

struct PauliTerm {
    Complex coefficient;
    PauliString string;
};

/// A = sum_m c_m A_m with every A_m a Pauli string on `n_qubits` qubits.
struct PauliDecomposition {
    std::size_t n_qubits = 0;
    std::vector<PauliTerm> terms;

    [[nodiscard]] std::size_t size() const noexcept { return terms.size(); }

    /// True when every coefficient is real to `tol`.
    [[nodiscard]] bool is_real(double tol = 1e-12) const {
        return std::all_of(terms.begin(), terms.end(), [tol](const PauliTerm &t) {
            return std::abs(t.coefficient.imag()) <= tol;
        });
    }

    void validate() const {
        std::set<std::string> seen;
        for (const auto &t : terms) {
            if (t.string.size() != n_qubits) {
                throw SizeError("term \"" + t.string.str() + "\" does not act on " +
                                std::to_string(n_qubits) + " qubits");
            }
            if (!seen.insert(t.string.str()).second) {
                throw ArgumentError("duplicate Pauli string \"" + t.string.str() + "\"");
            }
        }
    }

    /// Multiplies every coefficient by `s`.
    [[nodiscard]] PauliDecomposition scaled(Complex s) const {
        PauliDecomposition d = *this;
        for (auto &t : d.terms) {
            t.coefficient *= s;
        }
        return d;
    }
};

namespace detail {

inline std::size_t log2_dim(Eigen::Index dim) {
    if (dim <= 0 || (dim & (dim - 1)) != 0) {
        throw ShapeError("matrix dimension " + std::to_string(dim) + " is not a power of two");
    }
    return static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(dim)));
}

inline void check_dense_cap(std::size_t n) {
    if (n > kMaxDenseQubits) {
        throw SizeError(std::to_string(n) + " qubits exceeds the dense cap of " +
                        std::to_string(kMaxDenseQubits));
    }
}

} // namespace detail

/// Dense Kronecker product of the single-qubit factors, qubit 0 leftmost.
[[nodiscard]] inline DenseMatrix pauli_matrix(const PauliString &p) {
    const std::size_t n = p.size();
    detail::check_dense_cap(n);
    const Eigen::Index dim = Eigen::Index{1} << n;
    DenseMatrix m = DenseMatrix::Zero(dim, dim);
    for (BasisIndex i = 0; i < static_cast<BasisIndex>(dim); ++i) {
        m(static_cast<Eigen::Index>(i ^ p.flip_mask()), static_cast<Eigen::Index>(i)) =
            p.phase_on(i);
    }
    return m;
}

/**
 * Pauli-basis decomposition with c_m = Tr(A_m A) / 2^n.
 *
 * All 4^n strings are enumerated. A_m is a permutation with phases, so each
 * trace only touches the 2^n entries A(i ^ flip, i). Terms with
 * |c_m| <= tolerance are dropped.
 */
[[nodiscard]] inline PauliDecomposition decompose(const DenseMatrix &matrix,
                                                  double tolerance = 1e-12) {
    if (matrix.rows() != matrix.cols()) {
        throw ShapeError("matrix is " + std::to_string(matrix.rows()) + "x" +
                         std::to_string(matrix.cols()) + ", expected square");
    }
    const std::size_t n = detail::log2_dim(matrix.rows());
    if (n == 0) {
        throw ShapeError("1x1 matrix has no qubit register");
    }
    detail::check_dense_cap(n);
    const BasisIndex dim = BasisIndex{1} << n;
    const double inv_dim = 1.0 / static_cast<double>(dim);

    PauliDecomposition out{n, {}};
    for (BasisIndex flip = 0; flip < dim; ++flip) {
        for (BasisIndex z = 0; z < dim; ++z) {
            // phase mask = Y|Z qubits; Y qubits are flip & z.
            const PauliString p = PauliString::from_masks(n, flip, z);
            Complex trace = 0.0;
            // Tr(P A) = sum_i <i|P A|i> = sum_j phase(j) A(j, i) with P|j> = phase(j)|i>.
            for (BasisIndex i = 0; i < dim; ++i) {
                const BasisIndex j = i ^ flip;
                trace += p.phase_on(j) *
                         matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            }
            const Complex c = trace * inv_dim;
            if (std::abs(c) > tolerance) {
                out.terms.push_back({c, p});
            }
        }
    }
    std::sort(out.terms.begin(), out.terms.end(),
              [](const PauliTerm &a, const PauliTerm &b) { return a.string < b.string; });
    return out;
}

[[nodiscard]] inline DenseMatrix reconstruct(const PauliDecomposition &d) {
    detail::check_dense_cap(d.n_qubits);
    const Eigen::Index dim = Eigen::Index{1} << d.n_qubits;
    DenseMatrix m = DenseMatrix::Zero(dim, dim);
    for (const auto &t : d.terms) {
        if (t.string.size() != d.n_qubits) {
            throw SizeError("term \"" + t.string.str() + "\" has the wrong length");
        }
        for (BasisIndex i = 0; i < static_cast<BasisIndex>(dim); ++i) {
            m(static_cast<Eigen::Index>(i ^ t.string.flip_mask()), static_cast<Eigen::Index>(i)) +=
                t.coefficient * t.string.phase_on(i);
        }
    }
    return m;
}

struct PauliProduct {
    Complex phase;
    PauliString string;
};

/// p * q = phase * r with phase in {1, -1, i, -i}.
[[nodiscard]] inline PauliProduct multiply_strings(const PauliString &p, const PauliString &q) {
    if (p.size() != q.size()) {
        throw SizeError("cannot multiply Pauli strings of lengths " + std::to_string(p.size()) +
                        " and " + std::to_string(q.size()));
    }
    // Single-qubit table: letter index I=0,X=1,Y=2,Z=3; a*b = i^k * c.
    static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
    auto index = [](char c) {
        switch (c) {
        case 'X': return 1;
        case 'Y': return 2;
        case 'Z': return 3;
        default: return 0;
        }
    };
    int power = 0; // exponent of i
    std::string out(p.size(), 'I');
    for (std::size_t k = 0; k < p.size(); ++k) {
        const int a = index(p[k]);
        const int b = index(q[k]);
        if (a == 0 || b == 0 || a == b) {
            out[k] = kLetters[a ^ b];
            continue;
        }
        const int c = 6 - a - b;
        out[k] = kLetters[c];
        // XY=iZ, YZ=iX, ZX=iY; reversed order gives -i.
        const bool cyclic = (b - a + 3) % 3 == 1;
        power += cyclic ? 1 : 3;
    }
    static constexpr Complex kIPowers[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    return {kIPowers[power % 4], PauliString(out)};
}

inline void to_json(nlohmann::json &j, const PauliDecomposition &d) {
    j = nlohmann::json{{"n", d.n_qubits}, {"terms", nlohmann::json::array()}};
    for (const auto &t : d.terms) {
        j["terms"].push_back(
            {{"string", t.string.str()}, {"re", t.coefficient.real()}, {"im", t.coefficient.imag()}});
    }
}

inline void from_json(const nlohmann::json &j, PauliDecomposition &d) {
    d.n_qubits = j.at("n").get<std::size_t>();
    d.terms.clear();
    for (const auto &t : j.at("terms")) {
        d.terms.push_back({Complex{t.at("re").get<double>(), t.at("im").get<double>()},
                           PauliString(t.at("string").get<std::string>())});
    }
    d.validate();
}

} // namespace vqls
