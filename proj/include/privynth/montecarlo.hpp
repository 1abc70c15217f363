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
#ifndef PRIVYNTH_MONTECARLO_HPP
#define PRIVYNTH_MONTECARLO_HPP

#include "privynth/estimation.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <random>
#include <thread>

namespace privynth {

/// P(chi2_dof <= x).
inline double chi2_cdf(int dof, double x) {
    if (dof < 1) {
        throw InvalidInput("chi-square degrees of freedom must be positive");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

/// gamma with P(chi2_dof <= gamma) = 1 - alpha, by bisection on the CDF.
inline double chi2_quantile(int dof, double alpha) {
    if (dof < 1) {
        throw InvalidInput("chi-square degrees of freedom must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidInput("alpha must lie in (0, 1)");
    }
    const double level = 1.0 - alpha;
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi2_cdf(dof, hi) < level) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi2_cdf(dof, mid) < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Independent engine for stream `index` under master `seed`. The draw for a
/// given (seed, index) does not depend on how trials are scheduled.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

/// Worker count: `requested` if positive, else PRIVYNTH_THREADS, else the
/// hardware concurrency.
inline unsigned worker_count(int requested = 0) {
    if (requested > 0) {
        return static_cast<unsigned>(requested);
    }
    if (const char* env = std::getenv("PRIVYNTH_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

/// Lower factor F with F F^T = Sigma: Cholesky, or an eigen factor with
/// negative round-off eigenvalues floored at zero when Sigma is PSD to
/// within 1e-12 relative.
inline Matrix sampling_factor(const Matrix& Sigma) {
    require_symmetric(Sigma, "Sigma");
    const Matrix S = symmetrize(Sigma);
    const Eigen::LLT<Matrix> llt(S);
    if (llt.info() == Eigen::Success) {
        return llt.matrixL();
    }
    const auto es = sym_eig(S);
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    if (es.eigenvalues()(0) < -1e-12 * scale) {
        throw InvalidInput("Sigma is not positive semidefinite; Cholesky factorization failed");
    }
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

template <typename Fn>
void parallel_for(Index count, unsigned workers, Fn&& fn) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<Index>(count, 1))));
    if (workers == 1) {
        fn(Index{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    const Index chunk = (count + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const Index begin = std::min<Index>(count, w * chunk);
        const Index end = std::min<Index>(count, begin + chunk);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) {
        t.join();
    }
}

inline void fill_normals(std::mt19937_64& rng, Vector& z) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < z.size(); ++i) {
        z(i) = normal(rng);
    }
}

} // namespace detail

/// `count` i.i.d. rows drawn from N(0, Sigma); row r uses stream (seed, r).
inline Matrix sample_mechanism_noise(const Matrix& Sigma, Index count, std::uint64_t seed, int threads = 0) {
    if (count < 1) {
        throw InvalidInput("count must be at least 1");
    }
    const Matrix F = detail::sampling_factor(Sigma);
    const Index dim = Sigma.rows();
    Matrix out(count, dim);
    detail::parallel_for(count, worker_count(threads), [&](Index begin, Index end) {
        Vector z(dim);
        for (Index r = begin; r < end; ++r) {
            auto rng = make_stream(seed, static_cast<std::uint64_t>(r));
            detail::fill_normals(rng, z);
            out.row(r) = (F * z).transpose();
        }
    });
    return out;
}

/// Sample covariance (normalized by N - 1) of the columns of `samples`
/// (one sample per column).
inline Matrix sample_covariance(const Matrix& samples) {
    const Vector mean = samples.rowwise().mean();
    const Matrix centered = samples.colwise() - mean;
    return symmetrize(centered * centered.transpose() / static_cast<double>(samples.cols() - 1));
}

struct CoverageReport {
    Index samples = 0;
    Matrix empirical_cov;
    Matrix target_cov;          ///< (O^T Sigma^-1 O)^-1
    double rel_frobenius_error = 0.0;
    double coverage_rate = 0.0;
    double gamma = 0.0;
    double alpha = 0.0;         ///< nominal miss rate 1 - P(chi2_n <= gamma)
    Vector mean_bias;           ///< mean of x0_hat - x0
    double bias_norm = 0.0;
};

struct TrialOptions {
    Index trials = 100000;
    std::uint64_t seed = 0;
    double gamma = 1.0;
    int threads = 0;
};

/**
 * @brief Monte Carlo run of the GLS adversary against a noise covariance.
 *
 * Trial t releases Y + N_t with N_t drawn from stream (seed, t), forms the
 * GLS estimate, and records x0_hat - x0. Coverage counts trials with
 * (x0_hat - x0)^T target^-1 (x0_hat - x0) <= gamma. Aggregation runs in
 * trial order, so results do not depend on the worker count.
 */
inline CoverageReport run_adversary_trials(const LtiSystem& sys, Index horizon, const Vector& x0, const Vector& U,
                                           const Matrix& Sigma, const TrialOptions& opts) {
    if (opts.trials < 1000) {
        throw InvalidInput("trials must be at least 1000");
    }
    if (!(opts.gamma > 0.0)) {
        throw InvalidInput("gamma must be positive");
    }
    const StackedData st = build_stacked(sys, horizon);
    const Vector Y = simulate(sys, x0, U, horizon);

    // gain G = (O^T S^-1 O)^-1 O^T S^-1, shared by every trial
    const PerturbedRelease noiseless{Y, U, Sigma};
    const StateEstimate reference = estimate_gls(noiseless, st);
    const auto sigma_llt = spd_factor(Sigma, "Sigma");
    const Matrix SiO = sigma_llt.solve(st.O);
    const Matrix gain = reference.cov * SiO.transpose();
    const Matrix F = detail::sampling_factor(Sigma);
    const Vector offset = Y - st.T * U;

    const Index n = sys.n();
    const Index pk = st.rows();
    Matrix errors(n, opts.trials);
    detail::parallel_for(opts.trials, worker_count(opts.threads), [&](Index begin, Index end) {
        Vector z(pk);
        for (Index t = begin; t < end; ++t) {
            auto rng = make_stream(opts.seed, static_cast<std::uint64_t>(t));
            detail::fill_normals(rng, z);
            const Vector released = offset + F * z;
            errors.col(t) = gain * released - x0;
        }
    });

    CoverageReport rep;
    rep.samples = opts.trials;
    rep.gamma = opts.gamma;
    rep.alpha = 1.0 - chi2_cdf(static_cast<int>(n), opts.gamma);
    rep.target_cov = reference.cov;
    rep.empirical_cov = sample_covariance(errors);
    rep.rel_frobenius_error = rel_frobenius(rep.empirical_cov, rep.target_cov);
    rep.mean_bias = errors.rowwise().mean();
    rep.bias_norm = rep.mean_bias.norm();

    const Eigen::LLT<Matrix> target_llt(rep.target_cov);
    const Matrix whitened = target_llt.matrixL().solve(errors);
    const Index inside = (whitened.colwise().squaredNorm().array() <= opts.gamma).count();
    rep.coverage_rate = static_cast<double>(inside) / static_cast<double>(opts.trials);
    return rep;
}

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

namespace detail {

inline Matrix sub_block(const Matrix& cov, Index i, Index j) {
    if (cov.rows() != cov.cols()) {
        throw InvalidInput("covariance must be square");
    }
    if (i < 0 || j < 0 || i >= cov.rows() || j >= cov.rows() || i == j) {
        throw InvalidInput(concat("axes must be distinct indices in [0, ", cov.rows(), "), got (", i, ", ", j, ")"));
    }
    Matrix S(2, 2);
    S << cov(i, i), cov(i, j), cov(j, i), cov(j, j);
    return symmetrize(S);
}

} // namespace detail

/**
 * Boundary of the shadow of {x : x^T cov^-1 x <= gamma} on the (i, j)
 * coordinate plane. The shadow is the ellipse of the 2x2 sub-block S of cov
 * at the same level: points sqrt(gamma) L (cos t, sin t) with L L^T = S,
 * t = 2 pi k / points.
 */
inline std::vector<Point2> project_ellipsoid(const Matrix& cov, Index i, Index j, double gamma, int points) {
    if (!(gamma > 0.0)) {
        throw InvalidInput("gamma must be positive");
    }
    if (points < 1) {
        throw InvalidInput("points must be positive");
    }
    const Matrix S = detail::sub_block(cov, i, j);
    const Matrix L = spd_factor(S, "projected covariance").matrixL();
    const double r = std::sqrt(gamma);
    std::vector<Point2> out;
    out.reserve(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double t = 2.0 * std::numbers::pi * k / points;
        const Eigen::Vector2d v = r * L * Eigen::Vector2d(std::cos(t), std::sin(t));
        out.push_back({v(0), v(1)});
    }
    return out;
}

/// Semi-axes (major, minor) of the projected ellipse at level gamma.
inline std::pair<double, double> projected_semi_axes(const Matrix& cov, Index i, Index j, double gamma) {
    const Vector ev = sym_eig(detail::sub_block(cov, i, j)).eigenvalues();
    return {std::sqrt(gamma * ev(1)), std::sqrt(gamma * ev(0))};
}

} // namespace privynth

#endif // PRIVYNTH_MONTECARLO_HPP
