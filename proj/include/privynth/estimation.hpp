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
#ifndef PRIVYNTH_ESTIMATION_HPP
#define PRIVYNTH_ESTIMATION_HPP

#include "privynth/lti.hpp"

namespace privynth {

// Adversary side: what an eavesdropper who knows (A, B, C, D), the inputs and
// the noise covariance can infer about x0 from a release.

struct StateEstimate {
    Vector x0_hat;
    Matrix cov;
    std::vector<std::string> warnings;
};

/// Released data: perturbed stacked outputs, the stacked inputs and the
/// covariance of the additive output noise.
struct PerturbedRelease {
    Vector Y_tilde;
    Vector U;
    Matrix Sigma;
};

namespace detail {

inline void require_observable(const StackedData& st) {
    if (numerical_rank(st.O) != st.n) {
        throw Infeasible(concat("observability matrix O_K (", shape(st.O),
                                ") does not have full column rank; initial state is not identifiable"));
    }
}

inline void check_lengths(const StackedData& st, const Vector& Y, const Vector& U) {
    if (Y.size() != st.rows()) {
        throw InvalidInput(concat("stacked output must have length pK = ", st.rows(), ", got ", Y.size()));
    }
    if (U.size() != st.m * st.horizon) {
        throw InvalidInput(concat("stacked input must have length mK = ", st.m * st.horizon, ", got ", U.size()));
    }
}

constexpr double kConditionWarning = 1e12;

} // namespace detail

/// Noiseless reconstruction x0 = Wo^-1 O^T (Y - T U).
inline Vector reconstruct_exact(const StackedData& st, const Vector& Y, const Vector& U) {
    detail::check_lengths(st, Y, U);
    detail::require_observable(st);
    const Eigen::LLT<Matrix> wo(st.Wo);
    if (wo.info() != Eigen::Success) {
        throw Infeasible("observability gramian is not positive definite");
    }
    return wo.solve(st.O.transpose() * (Y - st.T * U));
}

/**
 * @brief Generalized least squares (BLUE) estimate of x0.
 *
 * x0_hat = (O^T S^-1 O)^-1 O^T S^-1 (Y~ - T U), cov = (O^T S^-1 O)^-1, both
 * through Cholesky solves on S and on the information matrix O^T S^-1 O.
 * Ill-conditioned factors (cond > 1e12) produce a warning, not a failure.
 */
inline StateEstimate estimate_gls(const PerturbedRelease& rel, const StackedData& st) {
    detail::check_lengths(st, rel.Y_tilde, rel.U);
    if (rel.Sigma.rows() != st.rows() || rel.Sigma.cols() != st.rows()) {
        throw InvalidInput(detail::concat("noise covariance must be ", st.rows(), "x", st.rows(), ", got ",
                                          detail::shape(rel.Sigma)));
    }
    detail::require_observable(st);
    const auto sigma = spd_factor(rel.Sigma, "noise covariance Sigma");

    StateEstimate est;
    if (spd_condition(rel.Sigma) > detail::kConditionWarning) {
        est.warnings.emplace_back("noise covariance condition number exceeds 1e12");
    }
    const Matrix SiO = sigma.solve(st.O);
    const Matrix info = symmetrize(st.O.transpose() * SiO);
    const Eigen::LLT<Matrix> info_llt(info);
    if (info_llt.info() != Eigen::Success) {
        throw Infeasible("information matrix O^T Sigma^-1 O is not positive definite");
    }
    if (spd_condition(info) > detail::kConditionWarning) {
        est.warnings.emplace_back("information matrix condition number exceeds 1e12");
    }
    const Vector residual = rel.Y_tilde - st.T * rel.U;
    est.x0_hat = info_llt.solve(SiO.transpose() * residual);
    est.cov = symmetrize(info_llt.solve(Matrix::Identity(st.n, st.n)));
    return est;
}

/// Adversary covariance (O^T S^-1 O)^-1 for a noise covariance S.
inline Matrix adversary_covariance(const StackedData& st, const Matrix& Sigma) {
    const PerturbedRelease rel{Vector::Zero(st.rows()), Vector::Zero(st.m * st.horizon), Sigma};
    return estimate_gls(rel, st).cov;
}

/**
 * Covariance faced by the optimal adversary when the initial state itself is
 * perturbed by v ~ N(0, Sigma_v): the OLS estimator is unbiased with
 * covariance exactly Sigma_v. This is the reference the output mechanism has
 * to reproduce.
 */
inline Matrix analyze_initial_perturbation(const Matrix& Sigma_v, const StackedData& st) {
    if (Sigma_v.rows() != st.n) {
        throw InvalidInput(detail::concat("Sigma_v must be ", st.n, "x", st.n, ", got ", detail::shape(Sigma_v)));
    }
    spd_factor(Sigma_v, "Sigma_v");
    return Sigma_v;
}

} // namespace privynth

#endif // PRIVYNTH_ESTIMATION_HPP
