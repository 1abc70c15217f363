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
#ifndef PRIVYNTH_COMMON_HPP
#define PRIVYNTH_COMMON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace privynth {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong dimensions, non-finite data, matrices that
/// should be SPD but are not, out-of-range options.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Well-formed input for which no design exists: unobservable pairs,
/// unstable dynamics where stability is required.
class Infeasible : public Error {
public:
    using Error::Error;
};

namespace detail {

template <typename... Args>
std::string concat(const Args&... args) {
    std::ostringstream oss;
    oss.precision(17);
    (oss << ... << args);
    return oss.str();
}

inline std::string shape(const Matrix& m) {
    return concat(m.rows(), "x", m.cols());
}

} // namespace detail

inline Matrix symmetrize(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

inline bool all_finite(const Matrix& m) {
    return m.allFinite();
}

/// Relative Frobenius distance ||a - b|| / ||b||, falling back to the absolute
/// distance when b vanishes.
inline double rel_frobenius(const Matrix& a, const Matrix& b) {
    const double denom = b.norm();
    const double diff = (a - b).norm();
    return denom > 0.0 ? diff / denom : diff;
}

/// Numerical rank: singular value s counts iff s > max(rows, cols) * s_max * 2^-52.
inline Index numerical_rank(const Matrix& m) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) {
        return 0;
    }
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) * s(0) *
                       std::numeric_limits<double>::epsilon();
    return (s.array() > tol).count();
}

/// Throws InvalidInput unless `m` is square, finite and symmetric to a
/// relative 1e-10.
inline void require_symmetric(const Matrix& m, std::string_view name) {
    if (m.rows() != m.cols()) {
        throw InvalidInput(detail::concat(name, " must be square, got ", detail::shape(m)));
    }
    if (!all_finite(m)) {
        throw InvalidInput(detail::concat(name, " has non-finite entries"));
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InvalidInput(detail::concat(name, " must be symmetric"));
    }
}

/// Cholesky factor of an SPD matrix; InvalidInput when the factorization fails.
inline Eigen::LLT<Matrix> spd_factor(const Matrix& m, std::string_view name) {
    require_symmetric(m, name);
    Eigen::LLT<Matrix> llt(symmetrize(m));
    if (llt.info() != Eigen::Success) {
        throw InvalidInput(detail::concat(name, " is not symmetric positive definite"));
    }
    return llt;
}

/// Eigen-decomposition of a symmetric matrix after explicit symmetrization.
inline Eigen::SelfAdjointEigenSolver<Matrix> sym_eig(const Matrix& m) {
    return Eigen::SelfAdjointEigenSolver<Matrix>(symmetrize(m));
}

/// Spectral condition number of an SPD matrix (infinity if singular).
inline double spd_condition(const Matrix& m) {
    const Vector ev = sym_eig(m).eigenvalues();
    if (ev(0) <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return ev(ev.size() - 1) / ev(0);
}

/// Inverse of an SPD matrix through its Cholesky factor, re-symmetrized.
inline Matrix spd_inverse(const Matrix& m, std::string_view name) {
    const auto llt = spd_factor(m, name);
    return symmetrize(llt.solve(Matrix::Identity(m.rows(), m.cols())));
}

/// Unique SPD square root and inverse square root.
inline Matrix spd_sqrt(const Matrix& m, std::string_view name) {
    spd_factor(m, name);
    const auto es = sym_eig(m);
    return symmetrize(es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
                      es.eigenvectors().transpose());
}

inline Matrix spd_inv_sqrt(const Matrix& m, std::string_view name) {
    spd_factor(m, name);
    const auto es = sym_eig(m);
    return symmetrize(es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose());
}

/// Block-diagonal matrix from a list of square blocks.
inline Matrix block_diagonal(const std::vector<Matrix>& blocks) {
    Index total = 0;
    for (const auto& b : blocks) {
        total += b.rows();
    }
    Matrix out = Matrix::Zero(total, total);
    Index offset = 0;
    for (const auto& b : blocks) {
        out.block(offset, offset, b.rows(), b.cols()) = b;
        offset += b.rows();
    }
    return out;
}

} // namespace privynth

#endif // PRIVYNTH_COMMON_HPP
