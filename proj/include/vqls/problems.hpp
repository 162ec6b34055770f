#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "vqls/errors.hpp"
#include "vqls/pauli.hpp"
#include "vqls/statevector.hpp"

namespace vqls {

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/**
 * A solvable instance A x = b. The Pauli decomposition is what the quantum
 * side consumes; `dense_matrix` and `b_raw` are kept for the classical
 * oracle and for rescaling the normalized quantum solution.
 */
struct LinearProblem {
    std::size_t n_qubits = 0;
    PauliDecomposition decomposition;
    RealMatrix dense_matrix;
    Circuit b_prep;
    RealVector b_raw;
    std::string label;

    /// True when A, b and U are all real, so every u-coefficient is real.
    [[nodiscard]] bool is_real() const {
        if (!decomposition.is_real()) {
            return false;
        }
        for (const auto &t : decomposition.terms) {
            if (t.string.y_count() % 2 != 0) {
                return false;
            }
        }
        for (const auto &g : b_prep.gates) {
            if (g.kind == GateKind::S || g.kind == GateKind::Sdg || g.kind == GateKind::Y) {
                return false;
            }
            if (g.kind == GateKind::PauliString && g.pauli.y_count() % 2 != 0) {
                return false;
            }
        }
        return true;
    }
};

struct BoundarySpec {
    double t_bottom = 0.0; // T1
    double t_top = 1.0;    // T2

    void validate() const {
        if (t_bottom == 0.0 && t_top == 0.0) {
            throw ArgumentError("boundary temperatures are both zero, so b vanishes");
        }
    }
};

/// Treatment of the two lateral (x-direction) edges of the 2D plate.
enum class LateralBoundary { Dirichlet, Periodic };

namespace detail {

inline RealMatrix dirichlet_tridiag(Eigen::Index n) {
    RealMatrix t = RealMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t(i, i) = 2.0;
        if (i + 1 < n) {
            t(i, i + 1) = -1.0;
            t(i + 1, i) = -1.0;
        }
    }
    return t;
}

inline RealMatrix periodic_circulant(Eigen::Index n) {
    RealMatrix c = dirichlet_tridiag(n);
    if (n > 2) {
        c(0, n - 1) = -1.0;
        c(n - 1, 0) = -1.0;
    } else {
        // Two-point ring: both neighbours are the same node.
        c(0, 1) = c(1, 0) = -2.0;
    }
    return c;
}

/**
 * Prepares (t_first |0...0> + t_last |1...1>) / r on qubits
 * [offset, offset + width). Positive single-point cases use the plain
 * X-column / empty forms.
 */
inline void append_two_point_prep(Circuit &c, std::size_t offset, std::size_t width,
                                  double t_first, double t_last) {
    if (t_first == 0.0 && t_last > 0.0) {
        for (std::size_t q = 0; q < width; ++q) {
            c.add(Gate::single(GateKind::X, offset + q));
        }
        return;
    }
    if (t_last == 0.0 && t_first > 0.0) {
        return;
    }
    c.add(Gate::ry(offset, 2.0 * std::atan2(t_last, t_first)));
    for (std::size_t q = 1; q < width; ++q) {
        c.add(Gate::cnot(offset, offset + q));
    }
}

inline PauliDecomposition decompose_real(const RealMatrix &a) {
    return decompose(a.cast<Complex>());
}

} // namespace detail

/// c0 I + 0.2 X_0 Z_1 + 0.2 X_0 with |b> = H^{(x)n}|0>.
[[nodiscard]] inline LinearProblem build_test_instance(double c0, std::size_t n) {
    if (n < 2 || n > kMaxDenseQubits) {
        throw SizeError("test instance needs 2 <= n <= " + std::to_string(kMaxDenseQubits) +
                        ", got " + std::to_string(n));
    }
    const double ac = std::abs(c0);
    if (ac < 1e-12 || std::abs(ac - 0.4) < 1e-12) {
        throw ArgumentError("c0 = " + std::to_string(c0) +
                            " makes the test matrix singular (forbidden: 0, +-0.4)");
    }
    std::string xz(n, 'I');
    xz[0] = 'X';
    xz[1] = 'Z';
    std::string x(n, 'I');
    x[0] = 'X';

    LinearProblem p;
    p.n_qubits = n;
    p.decomposition = {n,
                       {{c0, PauliString::identity(n)},
                        {0.2, PauliString(xz)},
                        {0.2, PauliString(x)}}};
    p.dense_matrix = reconstruct(p.decomposition).real();
    p.b_prep = Circuit(n);
    for (std::size_t q = 0; q < n; ++q) {
        p.b_prep.add(Gate::single(GateKind::H, q));
    }
    p.b_raw = RealVector::Ones(Eigen::Index{1} << n);
    p.label = "test:c0=" + std::to_string(c0) + ",n=" + std::to_string(n);
    return p;
}

/**
 * 1D steady heat conduction on N = 2^n interior points with Dirichlet ends:
 * A = tridiag(-1, 2, -1), b = T1 e_0 + T2 e_{N-1}.
 */
[[nodiscard]] inline LinearProblem laplacian_1d(std::size_t n, const BoundarySpec &boundary = {}) {
    if (n < 2 || n > kMaxDenseQubits) {
        throw SizeError("heat1d needs 2 <= n <= " + std::to_string(kMaxDenseQubits) + ", got " +
                        std::to_string(n));
    }
    boundary.validate();
    const Eigen::Index dim = Eigen::Index{1} << n;

    LinearProblem p;
    p.n_qubits = n;
    p.dense_matrix = detail::dirichlet_tridiag(dim);
    p.decomposition = detail::decompose_real(p.dense_matrix);
    p.b_raw = RealVector::Zero(dim);
    p.b_raw(0) += boundary.t_bottom;
    p.b_raw(dim - 1) += boundary.t_top;
    p.b_prep = Circuit(n);
    detail::append_two_point_prep(p.b_prep, 0, n, boundary.t_bottom, boundary.t_top);
    p.label = "heat1d:n=" + std::to_string(n);
    return p;
}

/**
 * 2D steady heat conduction on an N x N interior grid, N = 2^n_per_dim,
 * unknown (i, j) at index (j-1) N + (i-1) with j the y index. The y
 * direction carries the bottom/top Dirichlet temperatures, so the y register
 * (high-order qubits) is prepared like the 1D problem and the x register is
 * put in uniform superposition.
 *
 * Lateral edges default to Dirichlet at zero temperature. Periodic lateral
 * edges replace the x tridiagonal block by the circulant one.
 */
[[nodiscard]] inline LinearProblem laplacian_2d(std::size_t n_per_dim,
                                                const BoundarySpec &boundary = {},
                                                LateralBoundary lateral = LateralBoundary::Dirichlet) {
    if (n_per_dim < 1 || n_per_dim > kMaxDenseQubits / 2) {
        throw SizeError("heat2d needs 1 <= npd <= " + std::to_string(kMaxDenseQubits / 2) +
                        ", got " + std::to_string(n_per_dim));
    }
    boundary.validate();
    const Eigen::Index side = Eigen::Index{1} << n_per_dim;
    const Eigen::Index dim = side * side;
    const std::size_t n = 2 * n_per_dim;

    const RealMatrix ty = detail::dirichlet_tridiag(side);
    const RealMatrix tx = lateral == LateralBoundary::Dirichlet ? detail::dirichlet_tridiag(side)
                                                                : detail::periodic_circulant(side);
    const RealMatrix eye = RealMatrix::Identity(side, side);

    LinearProblem p;
    p.n_qubits = n;
    p.dense_matrix = Eigen::kroneckerProduct(ty, eye) + Eigen::kroneckerProduct(eye, tx);
    p.decomposition = detail::decompose_real(p.dense_matrix);
    p.b_raw = RealVector::Zero(dim);
    p.b_raw.head(side).array() += boundary.t_bottom;
    p.b_raw.tail(side).array() += boundary.t_top;
    p.b_prep = Circuit(n);
    detail::append_two_point_prep(p.b_prep, 0, n_per_dim, boundary.t_bottom, boundary.t_top);
    for (std::size_t q = n_per_dim; q < n; ++q) {
        p.b_prep.add(Gate::single(GateKind::H, q));
    }
    p.label = "heat2d:npd=" + std::to_string(n_per_dim) +
              (lateral == LateralBoundary::Periodic ? ",lateral=periodic" : "");
    return p;
}

/// Direct solve by LU with partial pivoting.
[[nodiscard]] inline RealVector classical_solve(const LinearProblem &problem) {
    const auto &a = problem.dense_matrix;
    Eigen::PartialPivLU<RealMatrix> lu(a);
    const double scale = a.cwiseAbs().maxCoeff();
    const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(min_pivot > 1e-13 * scale)) {
        throw SingularityError("matrix of " + problem.label + " is singular to machine precision");
    }
    return lu.solve(problem.b_raw);
}

/// sigma_max / sigma_min. Symmetric matrices go through the eigensolver.
[[nodiscard]] inline double condition_number(const RealMatrix &a) {
    double smax = 0.0;
    double smin = 0.0;
    if (a.rows() == a.cols() && (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12) {
        Eigen::SelfAdjointEigenSolver<RealMatrix> eig(a, Eigen::EigenvaluesOnly);
        const RealVector mags = eig.eigenvalues().cwiseAbs();
        smax = mags.maxCoeff();
        smin = mags.minCoeff();
    } else {
        Eigen::JacobiSVD<RealMatrix> svd(a);
        const auto &s = svd.singularValues();
        smax = s(0);
        smin = s(s.size() - 1);
    }
    if (smin < 1e-12) {
        throw SingularityError("smallest singular value " + std::to_string(smin) + " < 1e-12");
    }
    return smax / smin;
}

[[nodiscard]] inline double condition_number(const LinearProblem &problem) {
    detail::check_dense_cap(problem.n_qubits);
    return condition_number(problem.dense_matrix);
}

/// Real amplitudes of a statevector, assuming the global phase is +-1.
[[nodiscard]] inline RealVector real_amplitudes(const Statevector &s) {
    RealVector v(static_cast<Eigen::Index>(s.dim()));
    for (std::size_t i = 0; i < s.dim(); ++i) {
        v(static_cast<Eigen::Index>(i)) = s[i].real();
    }
    return v;
}

/**
 * Physical solution from the normalized VQLS state: alpha * x_hat with the
 * least-squares scale alpha = (A x_hat)^T b / |A x_hat|^2.
 */
[[nodiscard]] inline RealVector rescale_solution(const Statevector &x_hat,
                                                 const LinearProblem &problem) {
    const RealVector x = real_amplitudes(x_hat);
    if (x.size() != problem.dense_matrix.cols()) {
        throw SizeError("state dimension does not match the problem");
    }
    const RealVector ax = problem.dense_matrix * x;
    const double norm2 = ax.squaredNorm();
    if (std::sqrt(norm2) < 1e-12) {
        throw DegenerateStateError("A x_hat vanishes; cannot rescale");
    }
    return (ax.dot(problem.b_raw) / norm2) * x;
}

/// |<x_hat|r>|^2 / (|x_hat|^2 |r|^2), insensitive to global sign and phase.
[[nodiscard]] inline double fidelity(const Statevector &x_hat, const RealVector &reference) {
    const double rnorm = reference.norm();
    if (rnorm == 0.0) {
        throw ArgumentError("fidelity against a zero reference vector");
    }
    if (static_cast<Eigen::Index>(x_hat.dim()) != reference.size()) {
        throw SizeError("state dimension does not match the reference");
    }
    Complex overlap = 0.0;
    for (std::size_t i = 0; i < x_hat.dim(); ++i) {
        overlap += std::conj(x_hat[i]) * reference(static_cast<Eigen::Index>(i));
    }
    return std::norm(overlap) / (x_hat.norm_squared() * rnorm * rnorm);
}

/**
 * Builds a problem from a dense real matrix and right-hand side. The b
 * preparation is synthesized only for structured right-hand sides: a
 * positive multiple of one basis vector, a positive constant vector, or a
 * vector supported on the first and last entries.
 */
[[nodiscard]] inline LinearProblem problem_from_dense(const RealMatrix &a, const RealVector &b,
                                                      std::string label) {
    if (a.rows() != a.cols() || a.rows() != b.size()) {
        throw ShapeError("matrix and right-hand side shapes disagree");
    }
    const std::size_t n = detail::log2_dim(a.rows());
    if (n < 1 || n > kMaxDenseQubits) {
        throw SizeError("custom problems need 1 <= n <= " + std::to_string(kMaxDenseQubits));
    }
    LinearProblem p;
    p.n_qubits = n;
    p.dense_matrix = a;
    p.decomposition = detail::decompose_real(a);
    p.b_raw = b;
    p.b_prep = Circuit(n);
    p.label = std::move(label);

    const Eigen::Index dim = b.size();
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (std::abs(b(i)) > 0.0) {
            support.push_back(i);
        }
    }
    const bool constant = (b.array() == b(0)).all() && b(0) > 0.0;
    if (support.empty()) {
        throw ArgumentError("right-hand side is zero");
    }
    if (constant) {
        for (std::size_t q = 0; q < n; ++q) {
            p.b_prep.add(Gate::single(GateKind::H, q));
        }
    } else if (support.size() == 1 && b(support[0]) > 0.0) {
        for (std::size_t q = 0; q < n; ++q) {
            if ((static_cast<BasisIndex>(support[0]) & qubit_bit(q, n)) != 0) {
                p.b_prep.add(Gate::single(GateKind::X, q));
            }
        }
    } else if (std::all_of(support.begin(), support.end(),
                           [dim](Eigen::Index i) { return i == 0 || i == dim - 1; })) {
        detail::append_two_point_prep(p.b_prep, 0, n, b(0), b(dim - 1));
    } else {
        throw ArgumentError("no preparation circuit for this right-hand side; only basis, "
                            "uniform and first/last-entry vectors are supported (use the "
                            "structured test/heat1d/heat2d presets)");
    }
    return p;
}

} // namespace vqls
