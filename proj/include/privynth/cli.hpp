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
#ifndef PRIVYNTH_CLI_HPP
#define PRIVYNTH_CLI_HPP

#include "privynth/io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <iostream>

namespace privynth::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Design, DesignBlockDiag, DesignEntropy, DesignDp, Simulate, CaseStudy, Compare, Validate };

inline const char* to_string(Command c) {
    switch (c) {
    case Command::Design: return "design";
    case Command::DesignBlockDiag: return "design-blockdiag";
    case Command::DesignEntropy: return "design-entropy";
    case Command::DesignDp: return "design-dp";
    case Command::Simulate: return "simulate";
    case Command::CaseStudy: return "casestudy";
    case Command::Compare: return "compare";
    case Command::Validate: return "validate";
    }
    return "unknown";
}

enum ExitCode : int { kOk = 0, kInternal = 1, kInvalidInput = 2, kInfeasible = 3 };

struct RunConfig {
    Command command = Command::Design;
    std::string system_path;
    std::string sigma_v_path;
    std::string config_path;
    std::string x0_path;
    std::string input_path;   ///< validate
    std::filesystem::path out_dir = ".";
    std::optional<Index> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<Index> trials;
    std::optional<double> alpha;
    std::optional<double> gamma;
    std::optional<double> eps_p;
    std::optional<double> sigma;
    std::optional<double> c_free;
    std::optional<double> tol;
    std::optional<int> max_iter;
};

namespace detail {

using privynth::detail::concat;

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline Json metadata() {
    return Json{{"generated_at", utc_timestamp()}, {"tool", "privynth"}, {"version", kVersion}};
}

inline void require(bool present, const RunConfig& cfg, std::string_view flag) {
    if (!present) {
        throw InvalidInput(concat(to_string(cfg.command), " requires ", flag));
    }
}

inline Index horizon_of(const RunConfig& cfg) {
    require(cfg.horizon.has_value(), cfg, "--horizon");
    if (*cfg.horizon < 1) {
        throw InvalidInput("horizon must be positive");
    }
    return *cfg.horizon;
}

inline void check_positive(const std::optional<double>& v, std::string_view name) {
    if (v && !(*v > 0.0 && std::isfinite(*v))) {
        throw InvalidInput(concat(name, " must be positive and finite"));
    }
}

inline void validate(const RunConfig& cfg) {
    if (cfg.horizon && *cfg.horizon < 1) {
        throw InvalidInput("horizon must be positive");
    }
    if (cfg.trials && *cfg.trials < 1000) {
        throw InvalidInput("trials must be at least 1000");
    }
    if (cfg.alpha && !(*cfg.alpha > 0.0 && *cfg.alpha < 1.0)) {
        throw InvalidInput("alpha must lie in (0, 1)");
    }
    if (cfg.max_iter && *cfg.max_iter <= 0) {
        throw InvalidInput("max_iter must be positive");
    }
    check_positive(cfg.gamma, "gamma");
    check_positive(cfg.eps_p, "eps_p");
    check_positive(cfg.sigma, "sigma");
    check_positive(cfg.c_free, "c_free");
    check_positive(cfg.tol, "tol");
}

struct Inputs {
    LtiSystem system;
    Matrix Sigma_v;
    StackedData stacked;
};

inline Inputs load_design_inputs(const RunConfig& cfg, bool need_sigma_v = true) {
    require(!cfg.system_path.empty(), cfg, "--system");
    if (need_sigma_v) {
        require(!cfg.sigma_v_path.empty(), cfg, "--sigma-v");
    }
    const Index K = horizon_of(cfg);
    LtiSystem sys = system_from_json(read_json_file(cfg.system_path));
    Matrix Sigma_v = need_sigma_v ? sigma_v_from_json(read_json_file(cfg.sigma_v_path)) : Matrix();
    StackedData st = build_stacked(sys, K);
    privynth::detail::require_observable(st);
    return {std::move(sys), std::move(Sigma_v), std::move(st)};
}

inline Json parameters(const RunConfig& cfg) {
    Json p = Json::object();
    const auto put = [&p](const char* key, const auto& opt) {
        if (opt) {
            p[key] = *opt;
        }
    };
    put("horizon", cfg.horizon);
    put("seed", cfg.seed);
    put("trials", cfg.trials);
    put("alpha", cfg.alpha);
    put("gamma", cfg.gamma);
    put("eps_p", cfg.eps_p);
    put("sigma", cfg.sigma);
    put("c_free", cfg.c_free);
    put("tol", cfg.tol);
    put("max_iter", cfg.max_iter);
    for (const auto& [key, path] : {std::pair{"system", &cfg.system_path}, std::pair{"sigma_v", &cfg.sigma_v_path},
                                    std::pair{"config", &cfg.config_path}, std::pair{"x0", &cfg.x0_path},
                                    std::pair{"input", &cfg.input_path}}) {
        if (!path->empty()) {
            p[key] = *path;
        }
    }
    return p;
}

/// Files produced by one command, written only after the command succeeds.
struct Artifacts {
    Json result = Json::object();
    std::vector<std::pair<std::string, std::string>> files;  ///< (name, contents)
};

inline Artifacts run_design(const RunConfig& cfg) {
    const auto in = load_design_inputs(cfg);
    const MechanismDesign d = design_optimal(in.stacked, in.Sigma_v, cfg.c_free);
    const PairMN pair = build_pair(in.stacked, in.Sigma_v);
    const auto beta = verify_beta_optimality(pair, d.beta_opt, 200, cfg.seed.value_or(0));
    Artifacts a;
    a.result["stacked"] = stacked_to_json(in.stacked);
    a.result["design"] = design_to_json(d);
    a.result["detectable"] = detectability_check(pair);
    a.result["beta_check"] = Json{{"trials", beta.trials}, {"max_lambda_min", beta.max_lambda_min},
                                  {"holds", beta.holds}};
    return a;
}

inline Artifacts run_blockdiag(const RunConfig& cfg) {
    const auto in = load_design_inputs(cfg);
    BlockDiagonalOptions opts;
    opts.tol = cfg.tol.value_or(opts.tol);
    opts.max_iter = cfg.max_iter.value_or(opts.max_iter);
    const auto d = design_block_diagonal(in.stacked, in.Sigma_v, opts);
    Artifacts a;
    a.result["stacked"] = stacked_to_json(in.stacked);
    a.result["design"] = block_design_to_json(d);
    a.result["achieved_confusion"] = matrix_to_json(adversary_covariance(in.stacked, d.Sigma()));
    CsvWriter csv({"iteration", "mismatch"});
    for (std::size_t i = 0; i < d.history.size(); ++i) {
        csv.row(static_cast<Index>(i + 1), d.history[i]);
    }
    a.files.emplace_back("history.csv", csv.str());
    return a;
}

inline Artifacts run_entropy(const RunConfig& cfg) {
    const auto in = load_design_inputs(cfg, false);
    require(cfg.eps_p.has_value(), cfg, "--eps-p");
    EntropyOptions opts;
    opts.tol = cfg.tol.value_or(opts.tol);
    opts.max_iter = cfg.max_iter.value_or(opts.max_iter);
    Artifacts a;
    a.result["stacked"] = stacked_to_json(in.stacked);
    a.result["design"] = entropy_design_to_json(design_entropy(in.stacked, *cfg.eps_p, opts));
    return a;
}

inline Artifacts run_dp(const RunConfig& cfg) {
    const auto in = load_design_inputs(cfg, false);
    require(cfg.sigma.has_value(), cfg, "--sigma");
    Artifacts a;
    a.result["stacked"] = stacked_to_json(in.stacked);
    a.result["design"] = isotropic_design_to_json(design_dp_isotropic(in.stacked, *cfg.sigma));
    return a;
}

inline CsvWriter comparison_csv(const ComparisonReport& rep) {
    std::vector<std::string> header{"name", "trace", "log2det_confusion", "entropy_bits"};
    const Index n = rep.mechanisms.empty() ? 0 : rep.mechanisms.front().confusion.rows();
    for (Index i = 0; i < n; ++i) {
        header.push_back(concat("semi_axis_", i + 1));
    }
    CsvWriter csv(header);
    for (const auto& s : rep.mechanisms) {
        std::vector<double> values{s.trace, s.log2det_confusion, s.entropy_bits};
        for (Index i = 0; i < n; ++i) {
            values.push_back(s.coordinate_semi_axes(i));
        }
        csv.row_values(values, s.name);
    }
    return csv;
}

inline Artifacts run_compare(const RunConfig& cfg) {
    const auto in = load_design_inputs(cfg);
    const MechanismDesign proposed = design_optimal(in.stacked, in.Sigma_v, cfg.c_free);
    const double eps = cfg.eps_p.value_or(proposed.trace_Sigma);
    EntropyOptions eopts;
    eopts.tol = cfg.tol.value_or(eopts.tol);
    eopts.max_iter = cfg.max_iter.value_or(eopts.max_iter);
    const EntropyDesign entropy = design_entropy(in.stacked, eps, eopts);
    const double sigma = cfg.sigma.value_or(eps / static_cast<double>(in.stacked.rows()));
    const IsotropicDesign iso = design_dp_isotropic(in.stacked, sigma);
    const ComparisonReport rep = compare_mechanisms(
        {{"proposed", proposed.Sigma}, {"entropy", entropy.Sigma_de}, {"isotropic", iso.Sigma}}, in.stacked,
        cfg.gamma.value_or(1.0));
    Artifacts a;
    a.result["stacked"] = stacked_to_json(in.stacked);
    a.result["proposed"] = design_to_json(proposed);
    a.result["entropy"] = entropy_design_to_json(entropy);
    a.result["isotropic"] = isotropic_design_to_json(iso);
    a.result["comparison"] = comparison_to_json(rep);
    a.files.emplace_back("comparison.csv", comparison_csv(rep).str());
    return a;
}

inline Artifacts run_simulate(const RunConfig& cfg) {
    const auto in = load_design_inputs(cfg);
    const Index K = in.stacked.horizon;
    const Index n = in.system.n();
    const Index p = in.system.p();
    const Vector x0 = cfg.x0_path.empty() ? Vector::Zero(n) : vector_from_json(read_json_file(cfg.x0_path), "x0");
    if (x0.size() != n) {
        throw InvalidInput(concat("x0 must have ", n, " entries, got ", x0.size()));
    }
    const MechanismDesign d = design_optimal(in.stacked, in.Sigma_v, cfg.c_free);
    TrialOptions opts;
    opts.trials = cfg.trials.value_or(opts.trials);
    opts.seed = cfg.seed.value_or(0);
    const double alpha = cfg.alpha.value_or(0.05);
    opts.gamma = cfg.gamma.value_or(chi2_quantile(static_cast<int>(n), alpha));
    const Vector U = Vector::Zero(in.system.m() * K);
    const CoverageReport cov = run_adversary_trials(in.system, K, x0, U, d.Sigma, opts);

    const Vector Y = simulate(in.system, x0, U, K);
    // one released copy, on a stream apart from the trial streams
    const Matrix noise = sample_mechanism_noise(d.Sigma, 1, opts.seed ^ 0x9E3779B97F4A7C15ULL, 1);
    const Vector released = Y + noise.row(0).transpose();
    std::vector<std::string> header{"k"};
    for (Index r = 0; r < p; ++r) {
        header.push_back(concat("y", r + 1));
    }
    for (Index r = 0; r < p; ++r) {
        header.push_back(concat("released_y", r + 1));
    }
    CsvWriter csv(header);
    for (Index k = 0; k < K; ++k) {
        std::vector<double> values;
        for (Index r = 0; r < p; ++r) {
            values.push_back(Y(k * p + r));
        }
        for (Index r = 0; r < p; ++r) {
            values.push_back(released(k * p + r));
        }
        csv.row_values(values, std::to_string(k));
    }
    Artifacts a;
    a.result["stacked"] = stacked_to_json(in.stacked);
    a.result["design"] = design_to_json(d);
    a.result["x0"] = vector_to_json(x0);
    a.result["coverage"] = coverage_to_json(cov);
    a.files.emplace_back("trajectories.csv", csv.str());
    return a;
}

inline Artifacts run_casestudy(const RunConfig& cfg) {
    CaseStudyConfig cs;
    if (!cfg.config_path.empty()) {
        cs = case_study_config_from_json(read_json_file(cfg.config_path));
    }
    if (!cfg.sigma_v_path.empty()) {
        cs.Sigma_v = sigma_v_from_json(read_json_file(cfg.sigma_v_path));
    }
    if (cfg.seed) {
        cs.seed = *cfg.seed;
    }
    if (cfg.horizon) {
        cs.horizon = horizon_of(cfg);
        cs.max_horizon = std::max(cs.max_horizon, cs.horizon);
    }
    cs.trials = cfg.trials.value_or(cs.trials);
    cs.alpha = cfg.alpha.value_or(cs.alpha);
    cs.gamma = cfg.gamma.value_or(cs.gamma);
    if (cfg.c_free) {
        cs.c_free = cfg.c_free;
    }
    cs.entropy.tol = cfg.tol.value_or(cs.entropy.tol);
    cs.entropy.max_iter = cfg.max_iter.value_or(cs.entropy.max_iter);

    const CaseStudyResult r = run_case_study(cs);
    Artifacts a;
    a.result["model"] = zone_model_to_json(r.model);
    a.result["system"] = system_to_json(r.system);
    a.result["seed"] = cs.seed;
    a.result["requested_horizon"] = r.requested_horizon;
    a.result["horizon"] = r.horizon;
    a.result["horizon_raised"] = r.horizon_raised;
    a.result["euler_number"] = r.euler_number;
    a.result["spectral_radius"] = r.spectral_radius;
    if (r.spectral_radius > 1.0 + 1e-12) {
        a.result["warnings"] = Json::array({concat("discretized A is unstable: spectral radius ", r.spectral_radius,
                                                   " > 1 (dt too large for explicit Euler)")});
    } else {
        a.result["warnings"] = Json::array();
    }
    a.result["Sigma_v"] = matrix_to_json(cs.Sigma_v);
    a.result["stacked"] = stacked_to_json(r.stacked);
    a.result["proposed"] = design_to_json(r.proposed);
    a.result["entropy"] = entropy_design_to_json(r.entropy);
    a.result["comparison"] = comparison_to_json(r.comparison);
    a.result["confusion_difference_eigenvalues"] = vector_to_json(r.confusion_difference_eigenvalues);
    Json coverage = Json::object();
    for (const auto& [name, c] : r.coverage) {
        coverage[name] = coverage_to_json(c);
    }
    a.result["coverage"] = coverage;
    Json axes = Json::object();
    for (const auto& [name, ax] : r.semi_axes) {
        axes[name] = Json::array({ax.first, ax.second});
    }
    a.result["plane"] = Json::array({cs.plane.first, cs.plane.second});
    a.result["projected_semi_axes"] = axes;

    CsvWriter traj(r.trajectory_columns);
    for (const auto& row : r.trajectory) {
        std::vector<double> values{row.time};
        values.insert(values.end(), row.values.begin(), row.values.end());
        traj.row_values(values);
    }
    CsvWriter ell({"mechanism", "x", "y"});
    for (const auto& [name, pts] : r.ellipses) {
        for (const auto& pt : pts) {
            ell.row(name, pt.x, pt.y);
        }
    }
    a.files.emplace_back("trajectories.csv", traj.str());
    a.files.emplace_back("ellipses.csv", ell.str());
    a.files.emplace_back("comparison.csv", comparison_csv(r.comparison).str());
    return a;
}

inline Artifacts run_validate(const RunConfig& cfg) {
    require(!cfg.input_path.empty(), cfg, "an input file");
    const auto rep = validate_roundtrip(cfg.input_path);
    if (!rep.identical) {
        throw InvalidInput(concat("round trip of '", cfg.input_path, "' changed at least one matrix"));
    }
    Artifacts a;
    a.result["identical"] = rep.identical;
    a.result["matrices"] = strings_to_json(rep.matrices);
    return a;
}

inline Artifacts dispatch(const RunConfig& cfg) {
    switch (cfg.command) {
    case Command::Design: return run_design(cfg);
    case Command::DesignBlockDiag: return run_blockdiag(cfg);
    case Command::DesignEntropy: return run_entropy(cfg);
    case Command::DesignDp: return run_dp(cfg);
    case Command::Simulate: return run_simulate(cfg);
    case Command::CaseStudy: return run_casestudy(cfg);
    case Command::Compare: return run_compare(cfg);
    case Command::Validate: return run_validate(cfg);
    }
    throw Error("unknown command");
}

inline Json error_json(std::string_view command, std::string_view kind, std::string_view message, int code) {
    return Json{{"command", command},
                {"status", "error"},
                {"error", Json{{"kind", kind}, {"message", message}, {"exit_code", code}}},
                {"metadata", metadata()}};
}

inline void prepare_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw InputError(concat("output directory '", dir.string(), "' is not writable"));
    }
}

} // namespace detail

/**
 * @brief Runs one command and writes its artifacts into cfg.out_dir.
 *
 * report.json is written on success and on failure (status "error"). On
 * failure the same error document goes to `err`. Exit codes: 0 success,
 * 2 invalid or unreadable input, 3 infeasible design, 1 internal error.
 */
inline int run(const RunConfig& cfg, std::ostream& err = std::cerr) {
    const char* cmd = to_string(cfg.command);
    Json report;
    int code = kOk;
    detail::Artifacts art;
    try {
        detail::validate(cfg);
        detail::prepare_out_dir(cfg.out_dir);
        art = detail::dispatch(cfg);
        report = Json{{"command", cmd},
                      {"status", "ok"},
                      {"parameters", detail::parameters(cfg)},
                      {"result", std::move(art.result)},
                      {"metadata", detail::metadata()}};
    } catch (const Infeasible& e) {
        code = kInfeasible;
        report = detail::error_json(cmd, "infeasible", e.what(), code);
    } catch (const InvalidInput& e) {
        code = kInvalidInput;
        report = detail::error_json(cmd, "invalid_input", e.what(), code);
    } catch (const std::exception& e) {
        code = kInternal;
        report = detail::error_json(cmd, "internal", e.what(), code);
    }

    if (code != kOk) {
        err << report.dump() << '\n';
    }
    try {
        if (code == kOk) {
            for (const auto& [name, text] : art.files) {
                write_text_file(cfg.out_dir / name, text);
            }
        }
        if (std::filesystem::is_directory(cfg.out_dir)) {
            write_text_file(cfg.out_dir / "report.json", dump_json(report));
        }
    } catch (const std::exception& e) {
        if (code == kOk) {
            code = kInvalidInput;
            err << detail::error_json(cmd, "invalid_input", e.what(), code).dump() << '\n';
        }
    }
    return code;
}

namespace detail {

inline void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--out,-o", cfg.out_dir, "Output directory (default: current directory)");
    sub->add_option("--seed", cfg.seed, "Random seed (default 0)");
}

inline void add_design_inputs(CLI::App* sub, RunConfig& cfg, bool sigma_v) {
    sub->add_option("--system", cfg.system_path, "System JSON {A, B, C, D, dt}");
    if (sigma_v) {
        sub->add_option("--sigma-v", cfg.sigma_v_path, "Prescribed confusion set Sigma_v (JSON matrix)");
    }
    sub->add_option("--horizon,-K", cfg.horizon, "Horizon K (steps)");
}

} // namespace detail

/// Builds the argument parser; the chosen subcommand is recorded in cfg.
inline std::unique_ptr<CLI::App> make_app(RunConfig& cfg) {
    auto app = std::make_unique<CLI::App>("Gaussian output-noise mechanisms with prescribed confusion sets",
                                          "privynth");
    app->require_subcommand(1);
    app->set_version_flag("--version", kVersion);
    app->footer("Exit status: 0 ok, 2 invalid or unreadable input, 3 infeasible design.\n"
                "PRIVYNTH_THREADS caps the number of Monte Carlo worker threads.");

    const auto sub = [&](Command c, const char* help) {
        CLI::App* s = app->add_subcommand(to_string(c), help);
        s->callback([&cfg, c] { cfg.command = c; });
        detail::add_common(s, cfg);
        return s;
    };

    auto* design = sub(Command::Design, "Covariance attaining Sigma_v with optimal lambda_min(Sigma^-1)");
    detail::add_design_inputs(design, cfg, true);
    design->add_option("--c-free", cfg.c_free, "Eigenvalue of Sigma^-1 off range(O) (default beta_opt)");

    auto* blk = sub(Command::DesignBlockDiag, "Block-diagonal (per-step uncorrelated) approximation");
    detail::add_design_inputs(blk, cfg, true);
    blk->add_option("--tol", cfg.tol, "Mismatch tolerance on ||O^T X O - Sigma_v^-1||_F^2 (default 1e-10)");
    blk->add_option("--max-iter", cfg.max_iter, "Iteration budget per descent stage (default 200000)");

    auto* ent = sub(Command::DesignEntropy, "Entropy-optimal covariance under tr Sigma <= eps_p");
    detail::add_design_inputs(ent, cfg, false);
    ent->add_option("--eps-p", cfg.eps_p, "Trace budget");
    ent->add_option("--tol", cfg.tol, "KKT residual tolerance (default 1e-6)");
    ent->add_option("--max-iter", cfg.max_iter, "Iteration budget (default 5000)");

    auto* dp = sub(Command::DesignDp, "Isotropic covariance sigma I");
    detail::add_design_inputs(dp, cfg, false);
    dp->add_option("--sigma", cfg.sigma, "Noise variance sigma");

    auto* sim = sub(Command::Simulate, "Monte Carlo adversary against the designed mechanism");
    detail::add_design_inputs(sim, cfg, true);
    sim->add_option("--x0", cfg.x0_path, "Initial state JSON array (default zeros)");
    sim->add_option("--trials", cfg.trials, "Adversary trials, at least 1000 (default 100000)");
    sim->add_option("--alpha", cfg.alpha, "Miss rate for the chi-square level (default 0.05)");
    sim->add_option("--gamma", cfg.gamma, "Ellipsoid level; overrides --alpha");
    sim->add_option("--c-free", cfg.c_free, "Eigenvalue of Sigma^-1 off range(O) (default beta_opt)");

    auto* cs = sub(Command::CaseStudy, "Four-zone HVAC scenario");
    cs->add_option("--config", cfg.config_path, "Case-study JSON (optional overrides)");
    cs->add_option("--sigma-v", cfg.sigma_v_path, "Prescribed confusion set (overrides the config)");
    cs->add_option("--horizon,-K", cfg.horizon, "Horizon K (default 10)");
    cs->add_option("--trials", cfg.trials, "Adversary trials per mechanism (default 20000)");
    cs->add_option("--alpha", cfg.alpha, "Miss rate for the coverage check (default 0.05)");
    cs->add_option("--gamma", cfg.gamma, "Level of the projected ellipses (default 1)");
    cs->add_option("--c-free", cfg.c_free, "Eigenvalue of Sigma^-1 off range(O) (default: largest range eigenvalue)");
    cs->add_option("--tol", cfg.tol, "Entropy KKT tolerance (default 1e-6)");
    cs->add_option("--max-iter", cfg.max_iter, "Entropy iteration budget (default 5000)");

    auto* cmp = sub(Command::Compare, "Proposed vs entropy vs isotropic at a common budget");
    detail::add_design_inputs(cmp, cfg, true);
    cmp->add_option("--eps-p", cfg.eps_p, "Trace budget for the entropy design (default: proposed trace)");
    cmp->add_option("--sigma", cfg.sigma, "Isotropic variance (default eps_p / pK)");
    cmp->add_option("--gamma", cfg.gamma, "Ellipsoid level (default 1)");
    cmp->add_option("--c-free", cfg.c_free, "Eigenvalue of Sigma^-1 off range(O) (default beta_opt)");
    cmp->add_option("--tol", cfg.tol, "Entropy KKT tolerance (default 1e-6)");
    cmp->add_option("--max-iter", cfg.max_iter, "Entropy iteration budget (default 5000)");

    auto* val = sub(Command::Validate, "Parse, serialize and re-parse a matrix JSON file");
    val->add_option("input", cfg.input_path, "JSON file")->required();
    return app;
}

/// Entry point for the executable: parse, run, map errors to exit codes.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    RunConfig cfg;
    auto app = make_app(cfg);
    try {
        app->parse(argc, argv);
    } catch (const CLI::Success& e) {
        // --help / --version
        return app->exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        const auto* chosen = app->get_subcommands().empty() ? nullptr : app->get_subcommands().front();
        err << detail::error_json(chosen ? chosen->get_name() : "", "invalid_input", e.what(), kInvalidInput).dump()
            << '\n';
        return kInvalidInput;
    }
    return run(cfg, err);
}

} // namespace privynth::cli

#endif // PRIVYNTH_CLI_HPP
