#pragma once

// Independent dense oracles and random-instance generators for the tests.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "vqls/ansatz.hpp"
#include "vqls/cost.hpp"
#include "vqls/pauli.hpp"
#include "vqls/problems.hpp"
#include "vqls/statevector.hpp"

namespace vqls::testing {

using Rng = std::mt19937_64;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

inline Mat m2(Complex a, Complex b, Complex c, Complex d) {
    Mat m(2, 2);
    m << a, b, c, d;
    return m;
}

inline Mat letter_matrix(char c) {
    switch (c) {
    case 'X': return m2(0, 1, 1, 0);
    case 'Y': return m2(0, -kI, kI, 0);
    case 'Z': return m2(1, 0, 0, -1);
    default: return Mat::Identity(2, 2);
    }
}

inline Mat single_matrix(const Gate &g) {
    const double r = 1.0 / std::sqrt(2.0);
    switch (g.kind) {
    case GateKind::H: return m2(r, r, r, -r);
    case GateKind::X: return letter_matrix('X');
    case GateKind::Y: return letter_matrix('Y');
    case GateKind::Z: return letter_matrix('Z');
    case GateKind::S: return m2(1, 0, 0, kI);
    case GateKind::Sdg: return m2(1, 0, 0, -kI);
    case GateKind::Ry: {
        const double c = std::cos(g.angle / 2);
        const double s = std::sin(g.angle / 2);
        return m2(c, -s, s, c);
    }
    default: return Mat::Identity(2, 2);
    }
}

/// Kronecker product of per-qubit 2x2 factors, qubit 0 leftmost.
inline Mat kron_all(const std::vector<Mat> &factors) {
    Mat out = Mat::Identity(1, 1);
    for (const auto &f : factors) {
        Mat next = Eigen::kroneckerProduct(out, f).eval();
        out = next;
    }
    return out;
}

inline Mat projector(bool one) { return one ? m2(0, 0, 0, 1) : m2(1, 0, 0, 0); }

/// Operator that applies `ops` (indexed by qubit, identity where absent)
/// only when every qubit in `ones` is |1>.
inline Mat conditioned(std::size_t n, const std::vector<std::pair<std::size_t, Mat>> &ops,
                       const std::vector<std::size_t> &ones) {
    std::vector<Mat> active(n, Mat::Identity(2, 2));
    for (const auto &[q, m] : ops) {
        active[q] = m;
    }
    if (ones.empty()) {
        return kron_all(active);
    }
    // I - P + P (x) ops, where P projects all `ones` qubits onto |1>.
    std::vector<Mat> p(n, Mat::Identity(2, 2));
    for (auto q : ones) {
        p[q] = projector(true);
        active[q] = projector(true);
    }
    const Mat proj = kron_all(p);
    return Mat::Identity(proj.rows(), proj.cols()) - proj + kron_all(active);
}

inline Mat dense_gate(std::size_t n, const Gate &g) {
    std::vector<std::size_t> ones;
    if (g.control) {
        ones.push_back(*g.control);
    }
    switch (g.kind) {
    case GateKind::CZ: {
        ones.push_back(g.targets[0]);
        return conditioned(n, {{g.targets[1], letter_matrix('Z')}}, ones);
    }
    case GateKind::CNOT: {
        ones.push_back(g.targets[0]);
        return conditioned(n, {{g.targets[1], letter_matrix('X')}}, ones);
    }
    case GateKind::PauliString: {
        std::vector<std::pair<std::size_t, Mat>> ops;
        for (std::size_t q = 0; q < n; ++q) {
            ops.emplace_back(q, letter_matrix(g.pauli[q]));
        }
        return conditioned(n, ops, ones);
    }
    default: return conditioned(n, {{g.targets[0], single_matrix(g)}}, ones);
    }
}

inline Mat dense_circuit(const Circuit &c) {
    const auto dim = Eigen::Index{1} << c.n_qubits;
    Mat u = Mat::Identity(dim, dim);
    for (const auto &g : c.gates) {
        u = (dense_gate(c.n_qubits, g) * u).eval();
    }
    return u;
}

inline Mat dense_pauli(const PauliString &p) {
    std::vector<Mat> f;
    for (std::size_t q = 0; q < p.size(); ++q) {
        f.push_back(letter_matrix(p[q]));
    }
    return kron_all(f);
}

inline Vec to_eigen(const Statevector &s) {
    Vec v(static_cast<Eigen::Index>(s.dim()));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        v(static_cast<Eigen::Index>(i)) = s[i];
    }
    return v;
}

inline Statevector from_eigen(const Vec &v) {
    std::vector<Complex> a(v.data(), v.data() + v.size());
    std::size_t n = 0;
    while ((std::size_t{1} << n) < a.size()) {
        ++n;
    }
    return Statevector(n, std::move(a));
}

inline double uniform(Rng &rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng &rng, std::size_t count) {
    return std::uniform_int_distribution<std::size_t>(0, count - 1)(rng);
}

inline Statevector random_state(std::size_t n, Rng &rng) {
    std::normal_distribution<double> g;
    std::vector<Complex> a(std::size_t{1} << n);
    double norm = 0.0;
    for (auto &x : a) {
        x = {g(rng), g(rng)};
        norm += std::norm(x);
    }
    for (auto &x : a) {
        x /= std::sqrt(norm);
    }
    return Statevector(n, std::move(a));
}

inline PauliString random_string(std::size_t n, Rng &rng) {
    static constexpr char kLetters[] = "IXYZ";
    std::string s;
    for (std::size_t q = 0; q < n; ++q) {
        s += kLetters[pick(rng, 4)];
    }
    return PauliString(s);
}

/// Random gate of any kind, optionally controlled, valid on n qubits.
inline Gate random_gate(std::size_t n, Rng &rng, bool allow_control = true) {
    const std::size_t kind = pick(rng, n >= 2 ? 10 : 7);
    const std::size_t a = pick(rng, n);
    std::size_t b = pick(rng, n);
    while (n >= 2 && b == a) {
        b = pick(rng, n);
    }
    Gate g;
    switch (kind) {
    case 0: g = Gate::single(GateKind::H, a); break;
    case 1: g = Gate::single(GateKind::X, a); break;
    case 2: g = Gate::single(GateKind::Y, a); break;
    case 3: g = Gate::single(GateKind::Z, a); break;
    case 4: g = Gate::single(GateKind::S, a); break;
    case 5: g = Gate::single(GateKind::Sdg, a); break;
    case 6: g = Gate::ry(a, uniform(rng, -7, 7)); break;
    case 7: g = Gate::cz(a, b); break;
    case 8: g = Gate::cnot(a, b); break;
    default: g = Gate::pauli_string(random_string(n, rng)); break;
    }
    if (allow_control && n >= 3 && pick(rng, 3) == 0) {
        std::vector<std::size_t> free;
        for (std::size_t q = 0; q < n; ++q) {
            const bool used = std::find(g.targets.begin(), g.targets.end(), q) != g.targets.end() ||
                              (g.kind == GateKind::PauliString && g.pauli[q] != 'I');
            if (!used) {
                free.push_back(q);
            }
        }
        if (!free.empty()) {
            g.control = free[pick(rng, free.size())];
        }
    }
    return g;
}

inline Circuit random_circuit(std::size_t n, std::size_t gates, Rng &rng) {
    Circuit c(n);
    for (std::size_t k = 0; k < gates; ++k) {
        c.add(random_gate(n, rng));
    }
    return c;
}

/// Random real symmetric matrix, diagonally shifted so it is well conditioned.
inline RealMatrix random_symmetric(std::size_t n, Rng &rng) {
    const auto dim = Eigen::Index{1} << n;
    RealMatrix a(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            a(i, j) = a(j, i) = uniform(rng, -1, 1);
        }
    }
    a += RealMatrix::Identity(dim, dim) * (static_cast<double>(dim) + 1.0);
    return a;
}

/// Real b-preparation circuit built from H, Ry, CNOT and CZ.
inline Circuit random_real_prep(std::size_t n, Rng &rng) {
    Circuit c(n);
    for (std::size_t k = 0; k < 3 * n; ++k) {
        const std::size_t a = pick(rng, n);
        std::size_t b = (a + 1 + pick(rng, n - 1)) % n;
        switch (pick(rng, 4)) {
        case 0: c.add(Gate::single(GateKind::H, a)); break;
        case 1: c.add(Gate::ry(a, uniform(rng, 0, 2 * std::numbers::pi))); break;
        case 2: c.add(Gate::cnot(a, b)); break;
        default: c.add(Gate::cz(a, b)); break;
        }
    }
    return c;
}

/// Random real problem on n qubits with a random real b-preparation.
inline LinearProblem random_problem(std::size_t n, Rng &rng) {
    LinearProblem p;
    p.n_qubits = n;
    p.dense_matrix = random_symmetric(n, rng);
    p.decomposition = decompose(p.dense_matrix.cast<Complex>());
    p.b_prep = random_real_prep(n, rng);
    const Statevector b = apply_circuit(Statevector(n), p.b_prep);
    p.b_raw = real_amplitudes(b);
    p.label = "random";
    return p;
}

inline ParamVector random_angles(const AnsatzSpec &spec, Rng &rng) {
    ParamVector p(spec.param_count());
    for (auto &v : p) {
        v = uniform(rng, 0, 2 * std::numbers::pi);
    }
    return p;
}

/// A = I on n qubits with |b> = |0...0>.
inline LinearProblem identity_problem(std::size_t n) {
    LinearProblem p;
    p.n_qubits = n;
    p.decomposition = {n, {{1.0, PauliString::identity(n)}}};
    p.dense_matrix = RealMatrix::Identity(1 << n, 1 << n);
    p.b_prep = Circuit(n);
    p.b_raw = RealVector::Unit(1 << n, 0);
    return p;
}

/// Complex Hermitian A with a b-preparation that uses S gates.
inline LinearProblem random_complex_problem(std::size_t n, Rng &rng) {
    LinearProblem p = random_problem(n, rng);
    const auto dim = Eigen::Index{1} << n;
    Mat a = p.dense_matrix.cast<Complex>();
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            const double im = uniform(rng, -0.5, 0.5);
            a(i, j) += Complex(0, im);
            a(j, i) -= Complex(0, im);
        }
    }
    p.decomposition = decompose(a);
    p.b_prep.add(Gate::single(GateKind::S, pick(rng, n)));
    p.b_prep.add(Gate::single(GateKind::H, pick(rng, n)));
    return p;
}

struct DenseCosts {
    double local;
    double global;
    double norm;
};

/// C_L = <x|A^dag U (I - sum_j |0_j><0_j| / n) U^dag A|x> / <x|A^dag A|x> and
/// C_G = 1 - |<b|A|x>|^2 / <x|A^dag A|x>, all with explicit matrices.
inline DenseCosts dense_costs(const LinearProblem &p, const Statevector &x) {
    const std::size_t n = p.n_qubits;
    const Mat a = reconstruct(p.decomposition);
    const Mat u = dense_circuit(p.b_prep);
    const auto dim = a.rows();
    Mat proj_sum = Mat::Zero(dim, dim);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::pair<std::size_t, Mat>> ops = {{j, projector(false)}};
        proj_sum += conditioned(n, ops, {});
    }
    const Mat h_local = a.adjoint() * u *
                        (Mat::Identity(dim, dim) - proj_sum / static_cast<double>(n)) *
                        u.adjoint() * a;
    const Vec xv = to_eigen(x);
    const double norm = (xv.adjoint() * a.adjoint() * a * xv)(0).real();
    const Vec b = u.col(0);
    const double overlap = std::norm((b.adjoint() * a * xv)(0));
    return {(xv.adjoint() * h_local * xv)(0).real() / norm, 1.0 - overlap / norm, norm};
}

} // namespace vqls::testing
