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
#ifndef PRIVYNTH_MECHANISM_HPP
#define PRIVYNTH_MECHANISM_HPP

#include "privynth/estimation.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace privynth {

/**
 * @brief The pair (M, N) parametrizing every X = Sigma^-1 that yields a
 * prescribed adversary covariance Sigma_v.
 *
 * M = O Wo^-1 O^T              (pK x pK, orthogonal projector onto range O)
 * N = Sigma_v^-1/2 Wo^-1 O^T   (n x pK)
 *
 * Every symmetric solution of (O^T X O)^-1 = Sigma_v has the form
 * X = N^T N + R - M R M for some symmetric R.
 */
struct PairMN {
    Matrix M;
    Matrix N;
    Index n = 0;
    std::vector<std::string> warnings;

    Index dim() const { return M.rows(); }
    Matrix NtN() const { return symmetrize(N.transpose() * N); }
};

/// Output-noise covariance synthesized for a prescribed confusion set.
struct MechanismDesign {
    Matrix Sigma;              ///< output-noise covariance, pK x pK
    Matrix X;                  ///< Sigma^-1
    double beta_opt = 0.0;     ///< lambda_min(Sigma_v^-1 Wo^-1)
    double eps_opt = 0.0;      ///< pK * lambda_max(Sigma_v Wo), the surrogate trace bound
    double c_free = 0.0;       ///< eigenvalue of X on the orthogonal complement of range O
    double trace_Sigma = 0.0;
    double lambda_min_X = 0.0;
    Matrix achieved_confusion; ///< (O^T Sigma^-1 O)^-1
    double residual = 0.0;     ///< ||achieved - Sigma_v||_F / ||Sigma_v||_F
    Vector range_eigenvalues;  ///< nonzero eigenvalues of N^T N, ascending
    std::vector<std::string> warnings;
};

namespace detail {

constexpr double kSigmaVConditionWarning = 1e10;

inline void check_sigma_v(const StackedData& st, const Matrix& Sigma_v, std::vector<std::string>& warnings) {
    if (Sigma_v.rows() != st.n || Sigma_v.cols() != st.n) {
        throw InvalidInput(concat("Sigma_v must be ", st.n, "x", st.n, ", got ", shape(Sigma_v)));
    }
    spd_factor(Sigma_v, "Sigma_v");
    if (spd_condition(Sigma_v) > kSigmaVConditionWarning) {
        warnings.emplace_back("Sigma_v condition number exceeds 1e10");
    }
}

inline Matrix gramian_inverse(const StackedData& st) {
    require_observable(st);
    const Eigen::LLT<Matrix> llt(st.Wo);
    if (llt.info() != Eigen::Success) {
        throw Infeasible("observability gramian is not positive definite");
    }
    return symmetrize(llt.solve(Matrix::Identity(st.n, st.n)));
}

} // namespace detail

inline PairMN build_pair(const StackedData& st, const Matrix& Sigma_v) {
    PairMN pair;
    pair.n = st.n;
    detail::check_sigma_v(st, Sigma_v, pair.warnings);
    const Matrix Wo_inv = detail::gramian_inverse(st);
    const Matrix Wo_inv_Ot = Wo_inv * st.O.transpose();
    pair.M = symmetrize(st.O * Wo_inv_Ot);
    pair.N = spd_inv_sqrt(Sigma_v, "Sigma_v") * Wo_inv_Ot;
    return pair;
}

/// Member N^T N + R - M R M of the solution set for a symmetric offset R.
inline Matrix solution_set_member(const PairMN& pair, const Matrix& R) {
    if (R.rows() != pair.dim() || R.cols() != pair.dim()) {
        throw InvalidInput(detail::concat("R must be ", pair.dim(), "x", pair.dim(), ", got ", detail::shape(R)));
    }
    require_symmetric(R, "R");
    return symmetrize(pair.NtN() + R - pair.M * R * pair.M);
}

/// Splits R^pK into range(O) and its orthogonal complement using the
/// eigenvectors of M (eigenvalues 0 and 1). Returns {complement, range}.
inline std::pair<Matrix, Matrix> split_range(const PairMN& pair) {
    const auto es = sym_eig(pair.M);
    const Index pk = pair.dim();
    const Index n = pair.n;
    // ascending: the pK - n zero eigenvalues come first
    return {es.eigenvectors().leftCols(pk - n), es.eigenvectors().rightCols(n)};
}

/**
 * @brief Performance-optimal covariance for a prescribed confusion set.
 *
 * The basis S = [S_range | S_ker] jointly diagonalizes M and N^T N: S_ker
 * spans the kernel of M, and S_range diagonalizes N^T N restricted to
 * range(O) with eigenvalues lambda_1..lambda_n. Then
 *
 *   X     = S_range diag(lambda) S_range^T + c_free S_ker S_ker^T
 *   Sigma = S_range diag(1/lambda) S_range^T + (1/c_free) S_ker S_ker^T
 *         = O Sigma_v O^T + (1/c_free) S_ker S_ker^T
 *
 * which keeps the off-diagonal block zero and attains lambda_min(X) = beta_opt
 * for c_free = beta_opt (the default). Larger c_free lowers tr Sigma without
 * affecting the confusion set.
 */
inline MechanismDesign design_optimal(const StackedData& st, const Matrix& Sigma_v,
                                      std::optional<double> c_free = std::nullopt) {
    const PairMN pair = build_pair(st, Sigma_v);
    MechanismDesign d;
    d.warnings = pair.warnings;

    const Index pk = pair.dim();
    const Index n = pair.n;

    // With O = Q R (thin QR), N^T N restricted to range(O) is R^-T Sigma_v^-1 R^-1,
    // so the range part of Sigma is O Sigma_v O^T and no gramian is inverted.
    const Eigen::HouseholderQR<Matrix> qr(st.O);
    const Matrix Q_full = qr.householderQ();
    const Matrix Q = Q_full.leftCols(n);
    const Matrix R = qr.matrixQR().topRows(n).template triangularView<Eigen::Upper>();
    const Matrix range_cov = symmetrize(R * Sigma_v * R.transpose());
    const auto es = sym_eig(range_cov);
    if (es.eigenvalues()(0) <= 0.0) {
        throw Infeasible("N^T N restricted to range(O) is not positive definite");
    }
    // eigenvalues of X on range(O), ascending
    d.range_eigenvalues = es.eigenvalues().reverse().cwiseInverse();
    d.beta_opt = d.range_eigenvalues(0);
    d.eps_opt = static_cast<double>(pk) * es.eigenvalues()(n - 1);

    d.c_free = c_free.value_or(d.beta_opt);
    if (!(d.c_free > 0.0) || !std::isfinite(d.c_free)) {
        throw InvalidInput("c_free must be positive and finite");
    }
    if (d.c_free < d.beta_opt * (1.0 - 1e-12)) {
        throw InvalidInput(detail::concat("c_free = ", d.c_free, " is below beta_opt = ", d.beta_opt,
                                          "; it would lower lambda_min(X) below the optimum"));
    }

    const Matrix S_range = Q * es.eigenvectors().rowwise().reverse();
    const Matrix S_ker = Q_full.rightCols(pk - n);
    d.X = S_range * d.range_eigenvalues.asDiagonal() * S_range.transpose();
    d.Sigma = st.O * Sigma_v * st.O.transpose();
    if (pk > n) {
        d.X += d.c_free * S_ker * S_ker.transpose();
        d.Sigma += (1.0 / d.c_free) * S_ker * S_ker.transpose();
    }
    d.X = symmetrize(d.X);
    d.Sigma = symmetrize(d.Sigma);

    d.trace_Sigma = d.Sigma.trace();
    d.lambda_min_X = pk > n ? std::min(d.range_eigenvalues(0), d.c_free) : d.range_eigenvalues(0);
    d.achieved_confusion = adversary_covariance(st, d.Sigma);
    d.residual = rel_frobenius(d.achieved_confusion, Sigma_v);
    return d;
}

/// Random symmetric matrix with standard normal entries times `scale`.
template <typename Rng>
Matrix random_symmetric(Index dim, double scale, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix R(dim, dim);
    for (Index j = 0; j < dim; ++j) {
        for (Index i = 0; i < dim; ++i) {
            R(i, j) = normal(rng);
        }
    }
    return scale * symmetrize(R);
}

struct BetaOptimalityReport {
    int trials = 0;
    double beta_opt = 0.0;
    double max_lambda_min = -std::numeric_limits<double>::infinity();
    bool holds = false;
};

/**
 * Probes the upper bound lambda_min(N^T N + R - M R M) <= beta_opt with
 * `trials` random symmetric offsets R whose scale is log-uniform in
 * [1e-3, 1e3] times the spectral scale of N^T N.
 */
inline BetaOptimalityReport verify_beta_optimality(const PairMN& pair, double beta_opt, int trials,
                                                   std::uint64_t seed = 0) {
    if (trials < 1) {
        throw InvalidInput("trials must be at least 1");
    }
    BetaOptimalityReport rep;
    rep.trials = trials;
    rep.beta_opt = beta_opt;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
    const Matrix base = pair.NtN();
    const double spectral = std::max(base.norm(), std::numeric_limits<double>::min());
    for (int t = 0; t < trials; ++t) {
        const double scale = spectral * std::pow(10.0, log_scale(rng));
        const Matrix X = solution_set_member(pair, random_symmetric(pair.dim(), scale, rng));
        rep.max_lambda_min = std::max(rep.max_lambda_min, sym_eig(X).eigenvalues()(0));
    }
    rep.holds = rep.max_lambda_min <= beta_opt + 1e-8;
    return rep;
}

/// rank [M - I; N] == pK: the (M, N) pair has no unobservable mode at the
/// marginally unstable eigenvalue 1 of M.
inline bool detectability_check(const PairMN& pair) {
    const Index pk = pair.dim();
    Matrix stacked(pk + pair.N.rows(), pk);
    stacked << pair.M - Matrix::Identity(pk, pk), pair.N;
    return numerical_rank(stacked) == pk;
}

} // namespace privynth

#endif // PRIVYNTH_MECHANISM_HPP
