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
#ifndef PRIVYNTH_BASELINES_HPP
#define PRIVYNTH_BASELINES_HPP

#include "privynth/estimation.hpp"

#include <numbers>

namespace privynth {

// Comparison mechanisms: entropy-optimal noise under a trace budget, and the
// isotropic sigma*I noise of differential-privacy calibrations.

/// log2 det of an SPD matrix.
inline double log2_det(const Matrix& spd) {
    const Eigen::LLT<Matrix> llt(symmetrize(spd));
    if (llt.info() != Eigen::Success) {
        throw InvalidInput("log2_det: matrix is not positive definite");
    }
    const Matrix& L = llt.matrixLLT();
    double s = 0.0;
    for (Index i = 0; i < L.rows(); ++i) {
        s += std::log2(L(i, i));
    }
    return 2.0 * s;
}

/// Differential entropy of N(mu, cov) in the base-2 form
/// 1/2 log2 det(cov) + (n/2)(1 + log2(2 pi)).
inline double differential_entropy_bits(const Matrix& cov) {
    const double n = static_cast<double>(cov.rows());
    return 0.5 * log2_det(cov) + 0.5 * n * (1.0 + std::log2(2.0 * std::numbers::pi));
}

namespace detail {

/// Thin QR of the whitened observability matrix W = L^-1 O, Sigma = L L^T.
/// O^T Sigma^-1 O = W^T W = R^T R, so neither the objective nor the gradient
/// needs to factor the (possibly ill-conditioned) information matrix.
struct WhitenedQR {
    Eigen::LLT<Matrix> sigma;
    Matrix Q;
    Matrix R;
};

inline WhitenedQR whitened_qr(const StackedData& st, const Matrix& Sigma) {
    WhitenedQR w{spd_factor(Sigma, "Sigma"), {}, {}};
    const Matrix W = w.sigma.matrixL().solve(st.O);
    const Eigen::HouseholderQR<Matrix> qr(W);
    w.Q = qr.householderQ() * Matrix::Identity(W.rows(), W.cols());
    w.R = qr.matrixQR().topRows(W.cols()).template triangularView<Eigen::Upper>();
    return w;
}

} // namespace detail

/// g(Sigma) = -ln det(O^T Sigma^-1 O), the natural-log log-det of the
/// adversary covariance.
inline double entropy_objective(const StackedData& st, const Matrix& Sigma) {
    const auto w = detail::whitened_qr(st, Sigma);
    return -2.0 * w.R.diagonal().cwiseAbs().array().log().sum();
}

/// dg/dSigma = Sigma^-1 O (O^T Sigma^-1 O)^-1 O^T Sigma^-1, evaluated as
/// L^-T Q Q^T L^-1.
inline Matrix entropy_gradient(const StackedData& st, const Matrix& Sigma) {
    const auto w = detail::whitened_qr(st, Sigma);
    const Matrix Z = w.sigma.matrixU().solve(w.Q);
    return symmetrize(Z * Z.transpose());
}

struct EntropyDesign {
    Matrix Sigma_de;
    Matrix confusion;
    double objective = 0.0;     ///< log2 det of the adversary covariance
    double entropy_bits = 0.0;  ///< differential entropy of the adversary estimate
    double eps_p = 0.0;
    double trace = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct EntropyOptions {
    int max_iter = 5000;
    double tol = 1e-6;
    double floor_ratio = 1e-6;  ///< eigenvalue floor as a fraction of eps_p / pK
};

namespace detail {

/// Euclidean projection of eigenvalues onto {l_i >= floor, sum l_i <= budget}.
inline Vector project_capped_spectrum(const Vector& eig, double floor, double budget) {
    Vector out = eig.cwiseMax(floor);
    if (out.sum() <= budget) {
        return out;
    }
    // find tau with sum max(eig - tau, floor) = budget
    double lo = 0.0;
    double hi = eig.maxCoeff() - floor;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((eig.array() - mid).max(floor).sum() > budget) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    out = (eig.array() - hi).max(floor);
    // remove the residual bisection slack from the free entries
    const double slack = budget - out.sum();
    const Index free_count = (out.array() > floor).count();
    if (free_count > 0) {
        for (Index i = 0; i < out.size(); ++i) {
            if (out(i) > floor) {
                out(i) += slack / static_cast<double>(free_count);
            }
        }
    }
    return out;
}

inline Matrix project_trace_ball(const Matrix& S, double floor, double budget) {
    const auto es = sym_eig(S);
    const Vector lam = project_capped_spectrum(es.eigenvalues(), floor, budget);
    return symmetrize(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose());
}

/**
 * Stationarity residual for max g s.t. tr Sigma <= budget, Sigma >= floor I.
 * On the eigenspace of Sigma above the floor the gradient must equal mu*I
 * (mu = its mean eigenvalue there); across the split it must vanish; on the
 * floored eigenspace it must not exceed mu. Normalized by ||grad||_F.
 */
inline double entropy_kkt_residual(const Matrix& Sigma, const Matrix& grad, double floor) {
    const auto es = sym_eig(Sigma);
    const Matrix V = es.eigenvectors();
    const Matrix G = V.transpose() * grad * V;
    std::vector<Index> free_idx, floor_idx;
    // eigenvalues recomputed from a projected matrix carry absolute error ~ eps * ||Sigma||
    const double at_floor = floor * (1.0 + 1e-3) + 64.0 * std::numeric_limits<double>::epsilon() * Sigma.norm();
    for (Index i = 0; i < Sigma.rows(); ++i) {
        (es.eigenvalues()(i) > at_floor ? free_idx : floor_idx).push_back(i);
    }
    const double gnorm = grad.norm();
    if (gnorm == 0.0 || free_idx.empty()) {
        return 0.0;
    }
    double mu = 0.0;
    for (Index i : free_idx) {
        mu += G(i, i);
    }
    mu /= static_cast<double>(free_idx.size());
    double sq = 0.0;
    for (Index i : free_idx) {
        for (Index j : free_idx) {
            const double d = G(i, j) - (i == j ? mu : 0.0);
            sq += d * d;
        }
        for (Index j : floor_idx) {
            sq += 2.0 * G(i, j) * G(i, j);
        }
    }
    if (!floor_idx.empty()) {
        Matrix Gf(floor_idx.size(), floor_idx.size());
        for (std::size_t a = 0; a < floor_idx.size(); ++a) {
            for (std::size_t b = 0; b < floor_idx.size(); ++b) {
                Gf(a, b) = G(floor_idx[a], floor_idx[b]);
            }
        }
        const Vector ev = sym_eig(Gf).eigenvalues();
        for (Index i = 0; i < ev.size(); ++i) {
            const double excess = std::max(0.0, ev(i) - mu);
            sq += excess * excess;
        }
    }
    return std::sqrt(sq) / gnorm;
}

} // namespace detail

/**
 * @brief Noise covariance maximizing the adversary's log-det uncertainty
 * under the trace budget tr Sigma_de <= eps_p.
 *
 * Projected gradient ascent on g(Sigma) = -ln det(O^T Sigma^-1 O) from the
 * isotropic start (eps_p / pK) I. Each step is projected onto
 * {tr <= eps_p, eigenvalues >= floor_ratio eps_p / pK}; the step length follows an
 * Armijo rule along the projection arc, starting at ||Sigma_0|| / ||grad_0|| and
 * doubling after each accepted step.
 */
inline EntropyDesign design_entropy(const StackedData& st, double eps_p, const EntropyOptions& opts = {}) {
    if (!(eps_p > 0.0) || !std::isfinite(eps_p)) {
        throw InvalidInput("eps_p must be positive and finite");
    }
    if (opts.max_iter <= 0) {
        throw InvalidInput("max_iter must be positive");
    }
    if (!(opts.tol > 0.0)) {
        throw InvalidInput("tol must be positive");
    }
    detail::require_observable(st);
    const Index pk = st.rows();
    if (!(opts.floor_ratio > 0.0 && opts.floor_ratio < 1.0)) {
        throw InvalidInput("floor_ratio must lie in (0, 1)");
    }
    const double floor = opts.floor_ratio * eps_p / static_cast<double>(pk);
    constexpr double kArmijo = 1e-4;

    EntropyDesign d;
    d.eps_p = eps_p;
    Matrix Sigma = Matrix::Identity(pk, pk) * (eps_p / static_cast<double>(pk));
    double value = entropy_objective(st, Sigma);
    Matrix grad = entropy_gradient(st, Sigma);
    // first trial moves Sigma by about its own size
    double step = Sigma.norm() / std::max(grad.norm(), std::numeric_limits<double>::min());
    d.kkt_residual = detail::entropy_kkt_residual(Sigma, grad, floor);

    int it = 0;
    for (; it < opts.max_iter && d.kkt_residual > opts.tol; ++it) {
        bool accepted = false;
        Matrix trial;
        double trial_value = value;
        for (int bt = 0; bt < 80; ++bt) {
            trial = detail::project_trace_ball(Sigma + step * grad, floor, eps_p);
            const Eigen::LLT<Matrix> chk(trial);
            if (chk.info() == Eigen::Success) {
                trial_value = entropy_objective(st, trial);
                const double ascent = (grad.array() * (trial - Sigma).array()).sum();
                if (std::isfinite(trial_value) && trial_value >= value + kArmijo * ascent) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        Sigma = trial;
        value = trial_value;
        grad = entropy_gradient(st, Sigma);
        d.kkt_residual = detail::entropy_kkt_residual(Sigma, grad, floor);
        step *= 2.0;
    }

    d.Sigma_de = Sigma;
    d.iterations = it;
    d.trace = Sigma.trace();
    d.confusion = adversary_covariance(st, Sigma);
    d.objective = log2_det(d.confusion);
    d.entropy_bits = differential_entropy_bits(d.confusion);
    d.converged = d.kkt_residual <= opts.tol;
    return d;
}

struct IsotropicDesign {
    double sigma = 0.0;
    Matrix Sigma;
    Matrix confusion;
};

/// Sigma = sigma I; the adversary then faces sigma Wo^-1, whose shape is
/// fixed by the dynamics alone.
inline IsotropicDesign design_dp_isotropic(const StackedData& st, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw InvalidInput("sigma must be positive and finite");
    }
    IsotropicDesign d;
    d.sigma = sigma;
    d.Sigma = Matrix::Identity(st.rows(), st.rows()) * sigma;
    d.confusion = adversary_covariance(st, d.Sigma);
    return d;
}

struct NamedCovariance {
    std::string name;
    Matrix Sigma;
};

struct MechanismSummary {
    std::string name;
    double trace = 0.0;
    Matrix confusion;
    double log2det_confusion = 0.0;
    double entropy_bits = 0.0;
    double lambda_min_X = 0.0;       ///< lambda_min(Sigma^-1)
    double surrogate_eps = 0.0;      ///< pK / lambda_min(Sigma^-1)
    Vector principal_semi_axes;      ///< sqrt(gamma * eig(confusion)), descending
    Vector coordinate_semi_axes;     ///< sqrt(gamma * diag(confusion)), shadow half-widths
};

enum class Ordering { Equal, Larger, Smaller, Indefinite };

inline const char* to_string(Ordering o) {
    switch (o) {
    case Ordering::Equal: return "equal";
    case Ordering::Larger: return "larger";
    case Ordering::Smaller: return "smaller";
    case Ordering::Indefinite: return "indefinite";
    }
    return "unknown";
}

/// Loewner comparison of confusion(first) - confusion(second).
struct PairwiseContainment {
    std::string first;
    std::string second;
    Vector difference_eigenvalues;
    Ordering ordering = Ordering::Equal;
};

struct ComparisonReport {
    double gamma = 1.0;
    std::vector<MechanismSummary> mechanisms;
    std::vector<PairwiseContainment> pairs;
};

inline Ordering classify_difference(const Vector& ev, double scale) {
    const double tol = 1e-9 * std::max(scale, 1e-300);
    const bool pos = (ev.array() > tol).any();
    const bool neg = (ev.array() < -tol).any();
    if (pos && neg) {
        return Ordering::Indefinite;
    }
    if (pos) {
        return Ordering::Larger;
    }
    if (neg) {
        return Ordering::Smaller;
    }
    return Ordering::Equal;
}

inline ComparisonReport compare_mechanisms(const std::vector<NamedCovariance>& designs, const StackedData& st,
                                           double gamma) {
    if (!(gamma > 0.0)) {
        throw InvalidInput("gamma must be positive");
    }
    ComparisonReport rep;
    rep.gamma = gamma;
    for (const auto& d : designs) {
        if (d.Sigma.rows() != st.rows() || d.Sigma.cols() != st.rows()) {
            throw InvalidInput(detail::concat("design '", d.name, "' has covariance ", detail::shape(d.Sigma),
                                              ", expected ", st.rows(), "x", st.rows()));
        }
        MechanismSummary s;
        s.name = d.name;
        s.trace = d.Sigma.trace();
        s.confusion = adversary_covariance(st, d.Sigma);
        s.log2det_confusion = log2_det(s.confusion);
        s.entropy_bits = differential_entropy_bits(s.confusion);
        s.lambda_min_X = 1.0 / sym_eig(d.Sigma).eigenvalues().maxCoeff();
        s.surrogate_eps = static_cast<double>(st.rows()) / s.lambda_min_X;
        s.principal_semi_axes = (gamma * sym_eig(s.confusion).eigenvalues().reverse()).cwiseMax(0.0).cwiseSqrt();
        s.coordinate_semi_axes = (gamma * s.confusion.diagonal()).cwiseSqrt();
        rep.mechanisms.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < rep.mechanisms.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.mechanisms.size(); ++j) {
            const auto& a = rep.mechanisms[i];
            const auto& b = rep.mechanisms[j];
            PairwiseContainment pc;
            pc.first = a.name;
            pc.second = b.name;
            pc.difference_eigenvalues = sym_eig(a.confusion - b.confusion).eigenvalues();
            pc.ordering = classify_difference(pc.difference_eigenvalues,
                                              std::max(a.confusion.norm(), b.confusion.norm()));
            rep.pairs.push_back(std::move(pc));
        }
    }
    return rep;
}

} // namespace privynth

#endif // PRIVYNTH_BASELINES_HPP
