/*
 Copyright 2026 The privynth Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef PRIVYNTH_LTI_HPP
#define PRIVYNTH_LTI_HPP

#include "privynth/common.hpp"

#include <Eigen/Eigenvalues>

#include <optional>
#include <utility>

namespace privynth {

/**
 * @brief Discrete-time linear time-invariant system
 *
 *   x(k+1) = A x(k) + B u(k)
 *   y(k)   = C x(k) + D u(k)
 *
 * with x in R^n, u in R^m, y in R^p. Construction validates dimensions and
 * finiteness; the object is immutable afterwards.
 */
class LtiSystem {
public:
    LtiSystem(Matrix A, Matrix B, Matrix C, Matrix D, std::optional<double> dt = std::nullopt)
        : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)), dt_(dt) {
        const Index n = A_.rows();
        if (n < 1 || A_.cols() != n) {
            throw InvalidInput(detail::concat("A must be square and nonempty, got ", detail::shape(A_)));
        }
        if (B_.rows() != n || B_.cols() < 1) {
            throw InvalidInput(detail::concat("B must be ", n, "xm with m >= 1, got ", detail::shape(B_)));
        }
        if (C_.cols() != n || C_.rows() < 1) {
            throw InvalidInput(detail::concat("C must be px", n, " with p >= 1, got ", detail::shape(C_)));
        }
        if (D_.rows() != C_.rows() || D_.cols() != B_.cols()) {
            throw InvalidInput(detail::concat("D must be ", C_.rows(), "x", B_.cols(), ", got ",
                                              detail::shape(D_)));
        }
        using Named = std::pair<const char*, const Matrix*>;
        for (const auto& [name, mat] : {Named{"A", &A_}, Named{"B", &B_}, Named{"C", &C_}, Named{"D", &D_}}) {
            if (!all_finite(*mat)) {
                throw InvalidInput(detail::concat(name, " has non-finite entries"));
            }
        }
        if (dt_ && !(*dt_ > 0.0 && std::isfinite(*dt_))) {
            throw InvalidInput("dt must be positive and finite");
        }
    }

    /// Autonomous system (B = 0, D = 0 with a single dummy input channel).
    static LtiSystem autonomous(Matrix A, Matrix C, std::optional<double> dt = std::nullopt) {
        const Index n = A.rows();
        const Index p = C.rows();
        return LtiSystem(std::move(A), Matrix::Zero(n, 1), std::move(C), Matrix::Zero(p, 1), dt);
    }

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const Matrix& D() const { return D_; }
    std::optional<double> dt() const { return dt_; }

    Index n() const { return A_.rows(); }
    Index m() const { return B_.cols(); }
    Index p() const { return C_.rows(); }

private:
    Matrix A_, B_, C_, D_;
    std::optional<double> dt_;
};

/**
 * @brief Stacked K-step operators of an LTI system.
 *
 * O  (pK x n):  block k is C A^k, k = 0..K-1 (observability matrix)
 * T  (pK x mK): block lower-triangular Toeplitz with D on the diagonal and
 *               C A^(i-j-1) B in block (i, j), i > j
 * Wo (n x n):   O^T O (finite-horizon observability gramian)
 *
 * The data equation Y = O x0 + T U links the stacked outputs Y to the
 * initial state x0 and the stacked inputs U.
 */
struct StackedData {
    Index horizon = 0;
    Index n = 0;
    Index m = 0;
    Index p = 0;
    Matrix O;
    Matrix T;
    Matrix Wo;

    Index rows() const { return p * horizon; }
};

inline StackedData build_stacked(const LtiSystem& sys, Index horizon) {
    if (horizon < 1) {
        throw InvalidInput("horizon must be positive");
    }
    const Index n = sys.n();
    const Index m = sys.m();
    const Index p = sys.p();

    StackedData out;
    out.horizon = horizon;
    out.n = n;
    out.m = m;
    out.p = p;
    out.O.resize(p * horizon, n);
    out.T = Matrix::Zero(p * horizon, m * horizon);

    // markov[k] = C A^(k-1) B for k >= 1, markov[0] = D
    std::vector<Matrix> markov(static_cast<std::size_t>(horizon));
    markov[0] = sys.D();
    Matrix CAk = sys.C();
    for (Index k = 0; k < horizon; ++k) {
        out.O.middleRows(k * p, p) = CAk;
        if (k + 1 < horizon) {
            markov[static_cast<std::size_t>(k + 1)] = CAk * sys.B();
        }
        CAk = CAk * sys.A();
    }
    for (Index i = 0; i < horizon; ++i) {
        for (Index j = 0; j <= i; ++j) {
            out.T.block(i * p, j * m, p, m) = markov[static_cast<std::size_t>(i - j)];
        }
    }
    out.Wo = symmetrize(out.O.transpose() * out.O);
    return out;
}

/// Stacked output Y (length pK) of a K-step run from x0 under stacked input U.
inline Vector simulate(const LtiSystem& sys, const Vector& x0, const Vector& U, Index horizon) {
    if (horizon < 1) {
        throw InvalidInput("horizon must be positive");
    }
    if (x0.size() != sys.n()) {
        throw InvalidInput(detail::concat("x0 must have length ", sys.n(), ", got ", x0.size()));
    }
    if (U.size() != sys.m() * horizon) {
        throw InvalidInput(detail::concat("U must have length m*K = ", sys.m() * horizon, ", got ", U.size()));
    }
    const Index p = sys.p();
    const Index m = sys.m();
    Vector Y(p * horizon);
    Vector x = x0;
    for (Index k = 0; k < horizon; ++k) {
        const auto u = U.segment(k * m, m);
        Y.segment(k * p, p) = sys.C() * x + sys.D() * u;
        x = sys.A() * x + sys.B() * u;
    }
    return Y;
}

struct RankReport {
    Index rank = 0;
    Index n = 0;
    bool full_column_rank = false;
    Vector singular_values;
};

inline RankReport check_observability(const LtiSystem& sys, Index horizon) {
    const StackedData st = build_stacked(sys, horizon);
    RankReport r;
    r.n = sys.n();
    r.rank = numerical_rank(st.O);
    r.full_column_rank = (r.rank == r.n);
    r.singular_values = Eigen::JacobiSVD<Matrix>(st.O).singularValues();
    return r;
}

/// Smallest horizon K in [1, max_horizon] for which O_K has full column rank.
inline std::optional<Index> minimal_observable_horizon(const LtiSystem& sys, Index max_horizon) {
    for (Index k = 1; k <= max_horizon; ++k) {
        if (check_observability(sys, k).full_column_rank) {
            return k;
        }
    }
    return std::nullopt;
}

inline double spectral_radius(const Matrix& A) {
    Eigen::EigenSolver<Matrix> es(A, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/**
 * @brief Infinite-horizon observability gramian.
 *
 * Solves A^T W A - W + C^T C = 0 through the Kronecker form
 * (I - A^T kron A^T) vec(W) = vec(C^T C). Intended for desk-scale n (<= 50).
 * Throws Infeasible when A is not Schur stable.
 */
inline Matrix steady_state_gramian(const LtiSystem& sys) {
    const Matrix& A = sys.A();
    const Index n = sys.n();
    const double rho = spectral_radius(A);
    if (!(rho < 1.0)) {
        throw Infeasible(detail::concat("A is not Schur stable: eigenvalue modulus ", rho, " >= 1"));
    }
    const Matrix At = A.transpose();
    Matrix kron(n * n, n * n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            kron.block(i * n, j * n, n, n) = At(i, j) * At;
        }
    }
    const Matrix lhs = Matrix::Identity(n * n, n * n) - kron;
    const Matrix Q = sys.C().transpose() * sys.C();
    const Vector rhs = Eigen::Map<const Vector>(Q.data(), n * n);
    const Vector w = lhs.partialPivLu().solve(rhs);
    return symmetrize(Eigen::Map<const Matrix>(w.data(), n, n));
}

} // namespace privynth

#endif // PRIVYNTH_LTI_HPP
