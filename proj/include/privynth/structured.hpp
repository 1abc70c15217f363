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
#ifndef PRIVYNTH_STRUCTURED_HPP
#define PRIVYNTH_STRUCTURED_HPP

#include "privynth/mechanism.hpp"

#include <functional>

namespace privynth {

/**
 * @brief Block-diagonal noise covariance bdiag(Sigma_1..Sigma_K), one p x p
 * block per time step, so the noise can be drawn step by step.
 *
 * e_blk is the achieved ||O^T Sigma_blk^-1 O - Sigma_v^-1||_F^2; it is
 * reported as computed, whether or not it met the tolerance.
 */
struct BlockDiagonalDesign {
    std::vector<Matrix> blocks;
    double e_blk = 0.0;
    double trace = 0.0;
    int iterations = 0;
    bool converged = false;
    bool trace_reduced = false;   ///< the trace-minimization stage improved on the first feasible iterate
    std::vector<double> history;  ///< mismatch after each accepted descent step (first stage)

    Matrix Sigma() const { return block_diagonal(blocks); }
};

struct BlockDiagonalOptions {
    int max_iter = 200000;
    double tol = 1e-10;
    bool minimize_trace = true;
    int trace_stages = 4;
};

namespace detail {

/// Per-block lower-triangular factors X_k = L_k L_k^T, packed with the
/// diagonal stored as its logarithm.
class BlockFactors {
public:
    BlockFactors(Index blocks, Index p) : blocks_(blocks), p_(p) {}

    Index size() const { return blocks_ * p_ * (p_ + 1) / 2; }

    Vector pack(const std::vector<Matrix>& L) const {
        Vector theta(size());
        Index idx = 0;
        for (const auto& Lk : L) {
            for (Index j = 0; j < p_; ++j) {
                theta(idx++) = std::log(Lk(j, j));
                for (Index i = j + 1; i < p_; ++i) {
                    theta(idx++) = Lk(i, j);
                }
            }
        }
        return theta;
    }

    std::vector<Matrix> unpack(const Vector& theta) const {
        std::vector<Matrix> L(static_cast<std::size_t>(blocks_), Matrix::Zero(p_, p_));
        Index idx = 0;
        for (auto& Lk : L) {
            for (Index j = 0; j < p_; ++j) {
                Lk(j, j) = std::exp(theta(idx++));
                for (Index i = j + 1; i < p_; ++i) {
                    Lk(i, j) = theta(idx++);
                }
            }
        }
        return L;
    }

    /// Chain rule from dF/dX_k (symmetric) to the packed parameters.
    Vector pull_back(const std::vector<Matrix>& L, const std::vector<Matrix>& dX) const {
        Vector g(size());
        Index idx = 0;
        for (std::size_t k = 0; k < L.size(); ++k) {
            const Matrix dL = 2.0 * dX[k] * L[k];
            for (Index j = 0; j < p_; ++j) {
                g(idx++) = dL(j, j) * L[k](j, j);
                for (Index i = j + 1; i < p_; ++i) {
                    g(idx++) = dL(i, j);
                }
            }
        }
        return g;
    }

private:
    Index blocks_;
    Index p_;
};

struct Evaluation {
    double value = 0.0;
    Vector grad;
};

using Objective = std::function<Evaluation(const Vector&)>;

struct DescentResult {
    Vector theta;
    double value = 0.0;
    int iterations = 0;
};

/**
 * Gradient descent with Armijo backtracking. The trial step is the
 * Barzilai-Borwein length when it is positive; every accepted step
 * satisfies the sufficient-decrease condition, so recorded values never
 * increase.
 */
inline DescentResult armijo_descent(const Objective& fn, Vector theta, int max_iter, double target,
                                    std::vector<double>* history = nullptr, double stall_tol = 0.0) {
    constexpr double kArmijo = 1e-4;
    constexpr int kStallWindow = 50;
    int stalled = 0;
    Evaluation cur = fn(theta);
    double step = 1.0;
    Vector prev_theta, prev_grad;
    int it = 0;
    for (; it < max_iter && cur.value > target; ++it) {
        const double gnorm2 = cur.grad.squaredNorm();
        if (!(gnorm2 > 0.0) || !std::isfinite(gnorm2)) {
            break;
        }
        if (prev_theta.size() == theta.size()) {
            const Vector s = theta - prev_theta;
            const Vector y = cur.grad - prev_grad;
            const double sy = s.dot(y);
            if (sy > 0.0) {
                step = s.squaredNorm() / sy;
            } else {
                step *= 2.0;
            }
        }
        bool accepted = false;
        Evaluation next;
        Vector trial;
        for (int bt = 0; bt < 60; ++bt) {
            trial = theta - step * cur.grad;
            next = fn(trial);
            if (std::isfinite(next.value) && next.value <= cur.value - kArmijo * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
        prev_theta = theta;
        prev_grad = cur.grad;
        theta = trial;
        stalled = (cur.value - next.value <= stall_tol * std::abs(cur.value)) ? stalled + 1 : 0;
        cur = next;
        if (history) {
            history->push_back(cur.value);
        }
        if (stalled >= kStallWindow) {
            ++it;
            break;
        }
    }
    return {theta, cur.value, it};
}

inline std::vector<Matrix> gram_blocks(const std::vector<Matrix>& L) {
    std::vector<Matrix> X;
    X.reserve(L.size());
    for (const auto& Lk : L) {
        X.push_back(Lk * Lk.transpose());
    }
    return X;
}

inline std::vector<Matrix> inverse_blocks(const std::vector<Matrix>& X) {
    std::vector<Matrix> out;
    out.reserve(X.size());
    for (const auto& Xk : X) {
        out.push_back(symmetrize(Xk.llt().solve(Matrix::Identity(Xk.rows(), Xk.cols()))));
    }
    return out;
}

/// f = ||sum_k O_k^T X_k O_k - target||_F^2 and, if requested, df/dX_k.
inline double block_mismatch(const StackedData& st, const Matrix& target, const std::vector<Matrix>& X,
                             std::vector<Matrix>* dX) {
    const Index p = st.p;
    Matrix E = -target;
    for (std::size_t k = 0; k < X.size(); ++k) {
        const auto Ok = st.O.middleRows(static_cast<Index>(k) * p, p);
        E.noalias() += Ok.transpose() * X[k] * Ok;
    }
    if (dX) {
        dX->clear();
        for (std::size_t k = 0; k < X.size(); ++k) {
            const auto Ok = st.O.middleRows(static_cast<Index>(k) * p, p);
            dX->push_back(2.0 * Ok * E * Ok.transpose());
        }
    }
    return E.squaredNorm();
}

/// The mismatch as a function of the packed factor parameters.
inline Objective mismatch_objective(const StackedData& st, const Matrix& target) {
    const BlockFactors factors(st.horizon, st.p);
    return [st, target, factors](const Vector& theta) {
        const auto L = factors.unpack(theta);
        std::vector<Matrix> dX;
        Evaluation ev;
        ev.value = block_mismatch(st, target, gram_blocks(L), &dX);
        ev.grad = factors.pull_back(L, dX);
        return ev;
    };
}

} // namespace detail

/**
 * @brief Block-diagonal approximation of the confusion-set design.
 *
 * Stage 1 minimizes f = ||O^T bdiag(X_k) O - Sigma_v^-1||_F^2 over
 * X_k = L_k L_k^T, starting from the diagonal blocks of the unstructured
 * optimum. If stage 1 reaches f <= tol and `minimize_trace` is set, stage 2
 * lowers tr Sigma_blk by penalty continuation on tr + rho f, polishing each
 * stage back to f <= tol; a stage result is kept only if it is feasible and
 * has lower trace.
 */
inline BlockDiagonalDesign design_block_diagonal(const StackedData& st, const Matrix& Sigma_v,
                                                 const BlockDiagonalOptions& opts = {}) {
    if (opts.max_iter <= 0) {
        throw InvalidInput("max_iter must be positive");
    }
    if (!(opts.tol > 0.0)) {
        throw InvalidInput("tol must be positive");
    }
    const MechanismDesign unstructured = design_optimal(st, Sigma_v);
    const Index K = st.horizon;
    const Index p = st.p;
    const Matrix target = spd_inverse(Sigma_v, "Sigma_v");
    const detail::BlockFactors factors(K, p);

    std::vector<Matrix> L0;
    for (Index k = 0; k < K; ++k) {
        const Matrix Xk = symmetrize(unstructured.X.block(k * p, k * p, p, p));
        L0.emplace_back(Xk.llt().matrixL());
    }

    const auto mismatch = [&](const std::vector<Matrix>& X, std::vector<Matrix>* dX) {
        return detail::block_mismatch(st, target, X, dX);
    };
    const detail::Objective f = detail::mismatch_objective(st, target);

    BlockDiagonalDesign out;
    auto stage1 = detail::armijo_descent(f, factors.pack(L0), opts.max_iter, opts.tol, &out.history);
    out.iterations = stage1.iterations;

    Vector best = stage1.theta;
    double best_f = stage1.value;
    const auto trace_of = [&](const Vector& theta) {
        double tr = 0.0;
        for (const auto& S : detail::inverse_blocks(detail::gram_blocks(factors.unpack(theta)))) {
            tr += S.trace();
        }
        return tr;
    };
    double best_trace = trace_of(best);

    if (opts.minimize_trace && best_f <= opts.tol) {
        // rho scaled so the penalty initially dominates trace variations
        double rho = 10.0 * best_trace / std::max(target.squaredNorm(), 1e-300);
        Vector theta = best;
        for (int stage = 0; stage < opts.trace_stages; ++stage, rho *= 100.0) {
            const detail::Objective penalized = [&](const Vector& th) {
                const auto L = factors.unpack(th);
                const auto X = detail::gram_blocks(L);
                const auto S = detail::inverse_blocks(X);
                std::vector<Matrix> dX;
                detail::Evaluation ev;
                ev.value = rho * mismatch(X, &dX);
                for (std::size_t k = 0; k < X.size(); ++k) {
                    ev.value += S[k].trace();
                    dX[k] = rho * dX[k] - S[k] * S[k];
                }
                ev.grad = factors.pull_back(L, dX);
                return ev;
            };
            auto pen = detail::armijo_descent(penalized, theta, opts.max_iter,
                                              -std::numeric_limits<double>::infinity(), nullptr, 1e-13);
            auto polish = detail::armijo_descent(f, pen.theta, opts.max_iter, opts.tol);
            out.iterations += pen.iterations + polish.iterations;
            theta = pen.theta;
            if (polish.value <= opts.tol) {
                const double tr = trace_of(polish.theta);
                if (tr < best_trace) {
                    best_trace = tr;
                    best = polish.theta;
                    best_f = polish.value;
                    out.trace_reduced = true;
                }
            }
        }
    }

    out.blocks = detail::inverse_blocks(detail::gram_blocks(factors.unpack(best)));
    out.e_blk = best_f;
    out.trace = best_trace;
    out.converged = best_f <= opts.tol;
    return out;
}

/// One draw of the block noise: K independent N(0, Sigma_k) segments.
inline Vector sample_block_noise(const BlockDiagonalDesign& design, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Index total = 0;
    for (const auto& b : design.blocks) {
        total += b.rows();
    }
    Vector out(total);
    Index offset = 0;
    for (std::size_t k = 0; k < design.blocks.size(); ++k) {
        const auto llt = spd_factor(design.blocks[k], detail::concat("block ", k));
        const Index p = design.blocks[k].rows();
        Vector z(p);
        for (Index i = 0; i < p; ++i) {
            z(i) = normal(rng);
        }
        out.segment(offset, p) = llt.matrixL() * z;
        offset += p;
    }
    return out;
}

} // namespace privynth

#endif // PRIVYNTH_STRUCTURED_HPP
