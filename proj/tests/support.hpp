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
#ifndef PRIVYNTH_TEST_SUPPORT_HPP
#define PRIVYNTH_TEST_SUPPORT_HPP

// Random instances and independent reference computations for the tests.
// Oracles here use only Eigen decompositions (LU, general eigensolver) and
// direct formulas, never the library routines under test.

#include "privynth/lti.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace privynth::test {

using Rng = std::mt19937_64;

inline Matrix gaussian(Index rows, Index cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = normal(rng);
        }
    }
    return m;
}

inline Index uniform_int(Index lo, Index hi, Rng& rng) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

inline double uniform(double lo, double hi, Rng& rng) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_orthogonal(Index n, Rng& rng) {
    const Eigen::HouseholderQR<Matrix> qr(gaussian(n, n, rng));
    return qr.householderQ() * Matrix::Identity(n, n);
}

/// SPD with eigenvalues log-uniform in [scale, scale * cond].
inline Matrix random_spd(Index n, double cond, Rng& rng, double scale = 1.0) {
    const Matrix Q = random_orthogonal(n, rng);
    Vector ev(n);
    for (Index i = 0; i < n; ++i) {
        ev(i) = scale * std::pow(cond, uniform(0.0, 1.0, rng));
    }
    if (n > 1) {
        ev(0) = scale;
        ev(n - 1) = scale * cond;
    }
    const Matrix S = Q * ev.asDiagonal() * Q.transpose();
    return 0.5 * (S + S.transpose());
}

inline double oracle_spectral_radius(const Matrix& A) {
    return Eigen::EigenSolver<Matrix>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

/// Random A rescaled to spectral radius rho.
inline Matrix random_dynamics(Index n, double rho, Rng& rng) {
    Matrix A = gaussian(n, n, rng);
    const double r = oracle_spectral_radius(A);
    return A * (rho / std::max(r, 1e-12));
}

/// O_K = [C; CA; ...; CA^(K-1)] by direct powers.
inline Matrix oracle_observability(const Matrix& A, const Matrix& C, Index K) {
    const Index p = C.rows();
    Matrix O(p * K, A.cols());
    Matrix Ak = Matrix::Identity(A.rows(), A.cols());
    for (Index k = 0; k < K; ++k) {
        O.middleRows(k * p, p) = C * Ak;
        Ak = Ak * A;
    }
    return O;
}

inline Index oracle_rank(const Matrix& m) {
    Eigen::FullPivLU<Matrix> lu(m);
    lu.setThreshold(1e-10);
    return lu.rank();
}

/// Random system with full-column-rank O_K (redrawn until it is).
inline LtiSystem random_observable_system(Index n, Index p, Index m, Index K, Rng& rng, double rho = 0.9) {
    for (;;) {
        const Matrix A = random_dynamics(n, rho, rng);
        const Matrix C = gaussian(p, n, rng);
        const Matrix O = oracle_observability(A, C, K);
        const Eigen::JacobiSVD<Matrix> svd(O);
        const Vector sv = svd.singularValues();
        if (sv(sv.size() - 1) > 1e-3 * sv(0)) {
            return LtiSystem(A, gaussian(n, m, rng), C, gaussian(p, m, rng));
        }
    }
}

inline Matrix oracle_inverse(const Matrix& m) {
    return m.fullPivLu().inverse();
}

/// (O^T Sigma^-1 O)^-1 in extended precision, so that the oracle itself does
/// not lose accuracy on ill-conditioned Sigma.
inline Matrix oracle_confusion(const Matrix& O, const Matrix& Sigma) {
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const MatL Ol = O.cast<long double>();
    const MatL info = Ol.transpose() * Sigma.cast<long double>().fullPivLu().inverse() * Ol;
    return info.fullPivLu().inverse().cast<double>();
}

inline double rel_err(const Matrix& a, const Matrix& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

/// Sorted real eigenvalues of a (possibly nonsymmetric) matrix with real spectrum.
inline Vector real_eigenvalues(const Matrix& m) {
    Vector ev = Eigen::EigenSolver<Matrix>(m, false).eigenvalues().real();
    std::sort(ev.data(), ev.data() + ev.size());
    return ev;
}

inline Vector sym_eigenvalues(const Matrix& m) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly).eigenvalues();
}

/// log2 of the adversary variance for a 2x2 Sigma with trace eps, in the
/// eigen-parametrization Sigma = l1 u u^T + (eps - l1) v v^T with
/// u = (cos th, sin th), v = (-sin th, cos th). No cancellation near det 0.
inline double scalar_objective(const Matrix& O, double eps, double l1, double th) {
    const double o1 = O(0, 0);
    const double o2 = O(1, 0);
    const double ou = o1 * std::cos(th) + o2 * std::sin(th);
    const double ov = -o1 * std::sin(th) + o2 * std::cos(th);
    return -std::log2(ou * ou / l1 + ov * ov / (eps - l1));
}

/// Grid search plus shrinking local refinement over (l1, th).
inline double brute_force_2x2(const Matrix& O, double eps) {
    const double pi = 3.14159265358979323846;
    const double lo = 1e-10 * eps;
    const double hi = eps - lo;
    double best = -std::numeric_limits<double>::infinity();
    double bl = 0.5 * eps;
    double bt = 0.0;
    const int grid = 400;
    for (int i = 1; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double l1 = eps * i / grid;
            const double th = pi * j / grid;
            const double v = scalar_objective(O, eps, l1, th);
            if (v > best) {
                best = v;
                bl = l1;
                bt = th;
            }
        }
    }
    double wl = eps / grid;
    double wt = pi / grid;
    for (int round = 0; round < 80; ++round) {
        for (int i = -10; i <= 10; ++i) {
            for (int j = -10; j <= 10; ++j) {
                const double l1 = std::clamp(bl + wl * i / 10.0, lo, hi);
                const double th = bt + wt * j / 10.0;
                const double v = scalar_objective(O, eps, l1, th);
                if (v > best) {
                    best = v;
                    bl = l1;
                    bt = th;
                }
            }
        }
        wl *= 0.5;
        wt *= 0.5;
    }
    return best;
}

} // namespace privynth::test

#endif // PRIVYNTH_TEST_SUPPORT_HPP
