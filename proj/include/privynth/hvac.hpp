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
#ifndef PRIVYNTH_HVAC_HPP
#define PRIVYNTH_HVAC_HPP

#include "privynth/baselines.hpp"
#include "privynth/mechanism.hpp"
#include "privynth/montecarlo.hpp"

#include <map>

namespace privynth {

/**
 * @brief Multi-zone thermal RC network.
 *
 *   diag(mc) dT/dt = L T (+ ambient leak),  L_ij = 1/R_ij (adjacent),
 *                                           L_ii = -sum_j 1/R_ij
 *
 * Resistances are in K/W, capacitances in J/K, dt in seconds. Zones are
 * 0-based. With no ambient leak the network is closed: sum (mc)_i T_i is
 * conserved.
 */
struct ZoneModel {
    Index n_zones = 0;
    Vector capacitance;                        ///< (mc)_i
    Matrix resistance;                         ///< R_ij, +inf where not adjacent
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
    double dt = 360.0;
    std::vector<Index> measured_zones;
    Vector ambient_resistance;                 ///< optional per-zone leak to ambient (empty or +inf: none)

    static ZoneModel from_edges(const Vector& capacitance, const std::vector<std::pair<Index, Index>>& edges,
                                const std::vector<double>& resistances, double dt,
                                std::vector<Index> measured_zones) {
        if (edges.size() != resistances.size()) {
            throw InvalidInput("one resistance per edge is required");
        }
        ZoneModel m;
        m.n_zones = capacitance.size();
        m.capacitance = capacitance;
        m.resistance = Matrix::Constant(m.n_zones, m.n_zones, std::numeric_limits<double>::infinity());
        m.adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m.n_zones, m.n_zones, false);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const auto [i, j] = edges[e];
            if (i < 0 || j < 0 || i >= m.n_zones || j >= m.n_zones || i == j) {
                throw InvalidInput(detail::concat("invalid edge (", i, ", ", j, ")"));
            }
            m.resistance(i, j) = m.resistance(j, i) = resistances[e];
            m.adjacency(i, j) = m.adjacency(j, i) = true;
        }
        m.dt = dt;
        m.measured_zones = std::move(measured_zones);
        return m;
    }

    void validate() const {
        if (n_zones < 1 || capacitance.size() != n_zones) {
            throw InvalidInput("capacitance vector must have one entry per zone");
        }
        if (resistance.rows() != n_zones || resistance.cols() != n_zones || adjacency.rows() != n_zones ||
            adjacency.cols() != n_zones) {
            throw InvalidInput("resistance and adjacency must be n_zones x n_zones");
        }
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw InvalidInput("dt must be positive");
        }
        for (Index i = 0; i < n_zones; ++i) {
            if (!(capacitance(i) > 0.0) || !std::isfinite(capacitance(i))) {
                throw InvalidInput(detail::concat("thermal capacitance of zone ", i, " must be positive"));
            }
            if (adjacency(i, i)) {
                throw InvalidInput(detail::concat("zone ", i, " cannot be adjacent to itself"));
            }
            for (Index j = 0; j < n_zones; ++j) {
                if (adjacency(i, j) != adjacency(j, i)) {
                    throw InvalidInput("adjacency must be symmetric");
                }
                if (adjacency(i, j)) {
                    if (!(resistance(i, j) > 0.0) || !std::isfinite(resistance(i, j))) {
                        throw InvalidInput(detail::concat("resistance R(", i, ",", j, ") must be positive"));
                    }
                    if (resistance(i, j) != resistance(j, i)) {
                        throw InvalidInput("resistance must be symmetric");
                    }
                }
            }
        }
        if (measured_zones.empty()) {
            throw InvalidInput("at least one measured zone is required");
        }
        for (Index z : measured_zones) {
            if (z < 0 || z >= n_zones) {
                throw InvalidInput(detail::concat("measured zone ", z, " out of range"));
            }
        }
        if (ambient_resistance.size() != 0) {
            if (ambient_resistance.size() != n_zones) {
                throw InvalidInput("ambient_resistance must have one entry per zone");
            }
            if ((ambient_resistance.array() <= 0.0).any()) {
                throw InvalidInput("ambient resistances must be positive");
            }
        }
    }

    bool has_ambient() const {
        return ambient_resistance.size() == n_zones && ambient_resistance.array().isFinite().any();
    }

    /// Conduction Laplacian L (W/K).
    Matrix coupling() const {
        Matrix L = Matrix::Zero(n_zones, n_zones);
        for (Index i = 0; i < n_zones; ++i) {
            for (Index j = 0; j < n_zones; ++j) {
                if (adjacency(i, j)) {
                    L(i, j) = 1.0 / resistance(i, j);
                    L(i, i) -= 1.0 / resistance(i, j);
                }
            }
            if (has_ambient() && std::isfinite(ambient_resistance(i))) {
                L(i, i) -= 1.0 / ambient_resistance(i);
            }
        }
        return L;
    }

    /// dt * max_i (sum_j 1/R_ij) / (mc)_i. At most 1 keeps every Gershgorin
    /// disc of A inside the unit disc; between 1 and 2 the step can still be
    /// unstable (on a 4-cycle the Laplacian reaches twice the degree).
    double euler_number() const {
        const Matrix L = coupling();
        double worst = 0.0;
        for (Index i = 0; i < n_zones; ++i) {
            worst = std::max(worst, dt * (-L(i, i)) / capacitance(i));
        }
        return worst;
    }
};

/**
 * Euler discretization A = I + dt diag(mc)^-1 L, C selecting the measured
 * zones. Without ambient leak the system is autonomous (B = 0, D = 0); with
 * it, the single input is the ambient temperature.
 */
inline LtiSystem build_zone_system(const ZoneModel& model) {
    model.validate();
    const Index n = model.n_zones;
    const Vector inv_cap = model.capacitance.cwiseInverse();
    const Matrix A = Matrix::Identity(n, n) + model.dt * inv_cap.asDiagonal() * model.coupling();
    Matrix C = Matrix::Zero(static_cast<Index>(model.measured_zones.size()), n);
    for (std::size_t r = 0; r < model.measured_zones.size(); ++r) {
        C(static_cast<Index>(r), model.measured_zones[r]) = 1.0;
    }
    Matrix B = Matrix::Zero(n, 1);
    if (model.has_ambient()) {
        for (Index i = 0; i < n; ++i) {
            if (std::isfinite(model.ambient_resistance(i))) {
                B(i, 0) = model.dt * inv_cap(i) / model.ambient_resistance(i);
            }
        }
    }
    return LtiSystem(A, B, C, Matrix::Zero(C.rows(), 1), model.dt);
}

struct Range {
    double low = 0.0;
    double high = 0.0;
};

struct CaseStudyConfig {
    Matrix Sigma_v = Vector((Vector(4) << 16.0, 16.0, 100.0, 100.0).finished()).asDiagonal();
    Index horizon = 10;
    Index max_horizon = 60;
    double gamma = 1.0;       ///< ellipse level for the projected confusion sets
    double alpha = 0.05;      ///< coverage level for the Monte Carlo check
    std::uint64_t seed = 0;
    Range resistance_range{0.4, 0.6};
    Range capacitance_range{950.0, 1050.0};
    double dt = 360.0;
    Index n_zones = 4;
    std::vector<std::pair<Index, Index>> edges{{0, 1}, {2, 3}, {0, 2}, {1, 3}};
    std::vector<Index> measured_zones{0, 3};
    std::pair<Index, Index> plane{0, 3};
    Vector x0 = (Vector(4) << 21.0, 22.5, 19.5, 23.0).finished();
    bool ambient_leak = false;
    double ambient_resistance = 5.0;
    Index trials = 20000;
    int ellipse_points = 200;
    EntropyOptions entropy{};
    /// Eigenvalue of X off range(O). Unset: the largest range eigenvalue,
    /// which keeps lambda_min(X) = beta_opt but spends far less trace than
    /// c_free = beta_opt.
    std::optional<double> c_free;
    int threads = 0;

    void validate() const {
        for (const auto& [name, r] : {std::pair{"resistance_range", resistance_range},
                                      std::pair{"capacitance_range", capacitance_range}}) {
            if (!(r.low <= r.high) || !(r.low > 0.0)) {
                throw InvalidInput(detail::concat(name, " must satisfy 0 < low <= high"));
            }
        }
        if (horizon < 1) {
            throw InvalidInput("horizon must be positive");
        }
        if (max_horizon < horizon) {
            throw InvalidInput("max_horizon must be at least horizon");
        }
        if (x0.size() != n_zones) {
            throw InvalidInput(detail::concat("x0 must have ", n_zones, " entries"));
        }
        if (Sigma_v.rows() != n_zones || Sigma_v.cols() != n_zones) {
            throw InvalidInput(detail::concat("Sigma_v must be ", n_zones, "x", n_zones));
        }
        if (!(gamma > 0.0)) {
            throw InvalidInput("gamma must be positive");
        }
    }
};

/// Zone model with R_ij and (mc)_i drawn uniformly from the configured ranges.
inline ZoneModel sample_zone_model(const CaseStudyConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> r_dist(cfg.resistance_range.low, cfg.resistance_range.high);
    std::uniform_real_distribution<double> c_dist(cfg.capacitance_range.low, cfg.capacitance_range.high);
    std::vector<double> resistances;
    for (std::size_t e = 0; e < cfg.edges.size(); ++e) {
        resistances.push_back(r_dist(rng));
    }
    Vector cap(cfg.n_zones);
    for (Index i = 0; i < cfg.n_zones; ++i) {
        cap(i) = c_dist(rng);
    }
    ZoneModel model = ZoneModel::from_edges(cap, cfg.edges, resistances, cfg.dt, cfg.measured_zones);
    if (cfg.ambient_leak) {
        model.ambient_resistance = Vector::Constant(cfg.n_zones, cfg.ambient_resistance);
    }
    return model;
}

struct TrajectoryRow {
    double time = 0.0;
    std::vector<double> values;
};

struct CaseStudyResult {
    ZoneModel model;
    LtiSystem system;
    Index requested_horizon = 0;
    Index horizon = 0;
    bool horizon_raised = false;
    double euler_number = 0.0;
    double spectral_radius = 0.0;
    StackedData stacked;
    MechanismDesign proposed;
    EntropyDesign entropy;
    ComparisonReport comparison;
    std::map<std::string, CoverageReport> coverage;
    std::map<std::string, std::vector<Point2>> ellipses;
    std::map<std::string, std::pair<double, double>> semi_axes;
    std::vector<std::string> trajectory_columns;
    std::vector<TrajectoryRow> trajectory;
    Vector confusion_difference_eigenvalues;  ///< eig(proposed - entropy confusion)
};

/**
 * @brief End-to-end scenario: sample a zone model, design the prescribed
 * confusion mechanism, match an entropy-optimal baseline to its trace, run
 * the adversary against both, and project both confusion sets onto the
 * configured plane.
 *
 * The horizon is raised to the smallest observable one (up to max_horizon)
 * when the requested horizon leaves x0 unidentifiable.
 */
inline CaseStudyResult run_case_study(const CaseStudyConfig& cfg) {
    cfg.validate();
    ZoneModel model = sample_zone_model(cfg);
    LtiSystem sys = build_zone_system(model);

    Index K = cfg.horizon;
    bool raised = false;
    if (!check_observability(sys, K).full_column_rank) {
        const auto k_min = minimal_observable_horizon(sys, cfg.max_horizon);
        if (!k_min) {
            throw Infeasible(detail::concat("zone system is unobservable for every horizon up to ", cfg.max_horizon));
        }
        K = std::max(K, *k_min);
        raised = true;
    }

    CaseStudyResult res{model, sys};
    res.requested_horizon = cfg.horizon;
    res.horizon = K;
    res.horizon_raised = raised;
    res.euler_number = model.euler_number();
    res.spectral_radius = spectral_radius(sys.A());
    res.stacked = build_stacked(sys, K);
    res.proposed = design_optimal(res.stacked, cfg.Sigma_v);
    const double c_free = cfg.c_free.value_or(res.proposed.range_eigenvalues.maxCoeff());
    res.proposed = design_optimal(res.stacked, cfg.Sigma_v, c_free);
    res.entropy = design_entropy(res.stacked, res.proposed.trace_Sigma, cfg.entropy);

    const std::vector<NamedCovariance> named{{"proposed", res.proposed.Sigma}, {"entropy", res.entropy.Sigma_de}};
    res.comparison = compare_mechanisms(named, res.stacked, cfg.gamma);
    res.confusion_difference_eigenvalues =
        sym_eig(res.proposed.achieved_confusion - res.entropy.confusion).eigenvalues();

    const Vector U = Vector::Zero(sys.m() * K);
    TrialOptions trial_opts;
    trial_opts.trials = cfg.trials;
    trial_opts.seed = cfg.seed;
    trial_opts.gamma = chi2_quantile(static_cast<int>(sys.n()), cfg.alpha);
    trial_opts.threads = cfg.threads;
    const auto [pi, pj] = cfg.plane;
    for (std::size_t d = 0; d < named.size(); ++d) {
        const auto& [name, Sigma] = named[d];
        res.coverage[name] = run_adversary_trials(sys, K, cfg.x0, U, Sigma, trial_opts);
        const Matrix conf = adversary_covariance(res.stacked, Sigma);
        res.ellipses[name] = project_ellipsoid(conf, pi, pj, cfg.gamma, cfg.ellipse_points);
        res.semi_axes[name] = projected_semi_axes(conf, pi, pj, cfg.gamma);
    }

    // measured outputs and one released (perturbed) copy per mechanism
    const Vector Y = simulate(sys, cfg.x0, U, K);
    const Index p = sys.p();
    std::vector<Vector> released;
    for (std::size_t d = 0; d < named.size(); ++d) {
        // stream index offset keeps these draws apart from the trial streams
        const Matrix noise = sample_mechanism_noise(named[d].Sigma, 1, cfg.seed + 0x9E3779B97F4A7C15ULL * (d + 1), 1);
        released.push_back(Y + noise.row(0).transpose());
    }
    res.trajectory_columns.push_back("t");
    for (Index z : cfg.measured_zones) {
        res.trajectory_columns.push_back(detail::concat("true_T", z + 1));
    }
    for (const auto& nc : named) {
        for (Index z : cfg.measured_zones) {
            res.trajectory_columns.push_back(detail::concat(nc.name, "_T", z + 1));
        }
    }
    for (Index k = 0; k < K; ++k) {
        TrajectoryRow row;
        row.time = static_cast<double>(k) * cfg.dt;
        for (Index r = 0; r < p; ++r) {
            row.values.push_back(Y(k * p + r));
        }
        for (const auto& rel : released) {
            for (Index r = 0; r < p; ++r) {
                row.values.push_back(rel(k * p + r));
            }
        }
        res.trajectory.push_back(std::move(row));
    }
    return res;
}

} // namespace privynth

#endif // PRIVYNTH_HVAC_HPP
