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
// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include "privynth/cli.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace privynth;
using namespace privynth::test;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

void fail_if(Outcome& o, bool bad, const std::string& why) {
    if (bad) {
        o.pass = false;
        o.detail += (o.detail.empty() ? "" : "; ") + why;
    }
}

Outcome criterion1() {
    Outcome o;
    Rng rng(1001);
    Timer t;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const Index n = uniform_int(2, 6, rng);
        const Index p = uniform_int(1, 3, rng);
        const Index K = uniform_int(n, 8, rng);
        const LtiSystem sys = random_observable_system(n, p, 1, K, rng);
        const Matrix Sv = random_spd(n, uniform(1.0, 100.0, rng), rng);
        const StackedData st = build_stacked(sys, K);
        const MechanismDesign d = design_optimal(st, Sv);
        worst = std::max(worst, rel_err(oracle_confusion(oracle_observability(sys.A(), sys.C(), K), d.Sigma), Sv));
    }
    const double secs = t.seconds();
    fail_if(o, worst > 1e-8, "residual " + fmt(worst));
    fail_if(o, secs > 10.0, "runtime " + fmt(secs) + " s");
    o.detail = "max residual " + fmt(worst) + ", " + fmt(secs) + " s" + (o.pass ? "" : " (" + o.detail + ")");
    return o;
}

Outcome criterion2() {
    Outcome o;
    Rng rng(1002);
    double worst_beta = 0.0, worst_excess = -1e300, worst_trace = -1e300;
    for (int i = 0; i < 20; ++i) {
        const Index n = uniform_int(2, 5, rng);
        const Index p = uniform_int(1, 3, rng);
        const Index K = uniform_int(n, 8, rng);
        const LtiSystem sys = random_observable_system(n, p, 1, K, rng);
        const Matrix Sv = random_spd(n, uniform(1.0, 100.0, rng), rng);
        const StackedData st = build_stacked(sys, K);
        const MechanismDesign d = design_optimal(st, Sv);
        const Matrix Wo = oracle_observability(sys.A(), sys.C(), K).transpose() *
                          oracle_observability(sys.A(), sys.C(), K);
        const double beta_oracle = real_eigenvalues(oracle_inverse(Sv) * oracle_inverse(Wo))(0);
        const double lmin = sym_eigenvalues(oracle_inverse(d.Sigma))(0);
        worst_beta = std::max(worst_beta, std::abs(lmin - beta_oracle));
        const double eps_oracle = static_cast<double>(p * K) * real_eigenvalues(Sv * Wo)(n - 1);
        fail_if(o, std::abs(d.eps_opt - eps_oracle) > 1e-8 * eps_oracle, "eps_opt mismatch");
        worst_trace = std::max(worst_trace, d.Sigma.trace() - (eps_oracle + 1e-6));
        const PairMN pair = build_pair(st, Sv);
        for (int r = 0; r < 10; ++r) {
            Matrix R = gaussian(p * K, p * K, rng) * std::pow(10.0, uniform(-2.0, 2.0, rng));
            R = (0.5 * (R + R.transpose())).eval();
            const double lm = sym_eigenvalues(solution_set_member(pair, R))(0);
            worst_excess = std::max(worst_excess, lm - beta_oracle);
        }
    }
    fail_if(o, worst_beta > 1e-8, "beta gap " + fmt(worst_beta));
    fail_if(o, worst_excess > 1e-8, "member exceeds beta by " + fmt(worst_excess));
    fail_if(o, worst_trace > 0.0, "trace exceeds eps_opt + 1e-6 by " + fmt(worst_trace));
    o.detail = "beta gap " + fmt(worst_beta) + ", max member excess " + fmt(worst_excess) +
               " over 200 members, max tr - eps_opt " + fmt(worst_trace + 1e-6) +
               (o.pass ? "" : " (" + o.detail + ")");
    return o;
}

Outcome criterion3() {
    Outcome o;
    Rng rng(1003);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Index p = uniform_int(1, 3, rng);
        const Index K = uniform_int(1, 2, rng);
        const Index n = p * K;
        const LtiSystem sys = random_observable_system(n, p, 1, K, rng);
        const StackedData st = build_stacked(sys, K);
        const PairMN pair = build_pair(st, random_spd(n, 20.0, rng));
        const Matrix NtN = pair.N.transpose() * pair.N;
        for (int r = 0; r < 2; ++r) {
            Matrix R = gaussian(n, n, rng) * 10.0;
            R = (0.5 * (R + R.transpose())).eval();
            worst = std::max(worst, (solution_set_member(pair, R) - NtN).cwiseAbs().maxCoeff());
        }
    }
    fail_if(o, worst > 1e-10, "elementwise gap " + fmt(worst));
    o.detail = "max elementwise gap " + fmt(worst) + " over 20 systems";
    return o;
}

struct McSetup {
    LtiSystem sys;
    Index K;
    Matrix Sv;
    MechanismDesign d;
};

McSetup mc_setup() {
    Rng rng(1004);
    const LtiSystem sys = random_observable_system(3, 2, 1, 5, rng);
    const Matrix Sv = random_spd(3, 20.0, rng);
    return {sys, 5, Sv, design_optimal(build_stacked(sys, 5), Sv)};
}

Outcome criterion4() {
    Outcome o;
    const McSetup s = mc_setup();
    Timer t;
    TrialOptions opts;
    opts.trials = 100000;
    opts.seed = 4;
    const Vector x0 = (Vector(3) << 1.0, -2.0, 0.5).finished();
    const auto rep = run_adversary_trials(s.sys, s.K, x0, Vector::Zero(s.K), s.d.Sigma, opts);
    const double secs = t.seconds();
    const double rel = rel_err(rep.empirical_cov, s.Sv);
    const double bias_bound = 4.0 * std::sqrt(s.Sv.trace() / 1e5);
    fail_if(o, rel > 0.05, "covariance error");
    fail_if(o, rep.bias_norm > bias_bound, "bias");
    fail_if(o, secs > 60.0, "runtime");
    o.detail = "rel Frobenius " + fmt(rel) + ", bias " + fmt(rep.bias_norm) + " (bound " + fmt(bias_bound) +
               "), " + fmt(secs) + " s";
    return o;
}

Outcome criterion5() {
    Outcome o;
    const McSetup s = mc_setup();
    TrialOptions opts;
    opts.trials = 100000;
    opts.seed = 5;
    opts.gamma = chi2_quantile(3, 0.05);
    const auto rep = run_adversary_trials(s.sys, s.K, Vector::Zero(3), Vector::Zero(s.K), s.d.Sigma, opts);
    const double q = chi2_quantile(2, 0.05);
    fail_if(o, rep.coverage_rate < 0.945 || rep.coverage_rate > 0.955, "coverage");
    fail_if(o, std::abs(q - 5.99146) > 1e-4 || std::abs(q + 2.0 * std::log(0.05)) > 1e-4, "chi2 quantile");
    o.detail = "coverage " + fmt(rep.coverage_rate) + ", chi2_quantile(2, 0.05) = " + std::to_string(q);
    return o;
}

Outcome criterion6() {
    Outcome o;
    Rng rng(1006);
    double iso = 0.0;
    for (int i = 0; i < 10; ++i) {
        const LtiSystem sys = random_observable_system(3, 2, 1, 4, rng);
        const StackedData st = build_stacked(sys, 4);
        const Matrix O = oracle_observability(sys.A(), sys.C(), 4);
        for (double sigma : {0.5, 1.0, 10.0}) {
            const Matrix adv = adversary_covariance(st, design_dp_isotropic(st, sigma).Sigma);
            iso = std::max(iso, rel_err(adv, sigma * oracle_inverse(O.transpose() * O)));
        }
    }
    double lyap = 0.0, conv = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Index n = uniform_int(2, 6, rng);
        const double rho = i < 10 ? 0.5 : uniform(0.1, 0.95, rng);
        const LtiSystem sys = LtiSystem::autonomous(random_dynamics(n, rho, rng), gaussian(2, n, rng));
        const Matrix W = steady_state_gramian(sys);
        const Matrix res = sys.A().transpose() * W * sys.A() - W + sys.C().transpose() * sys.C();
        lyap = std::max(lyap, res.norm() / std::max(1.0, W.norm()));
        if (i < 10) {
            const Matrix O = oracle_observability(sys.A(), sys.C(), 50);
            conv = std::max(conv, (O.transpose() * O - W).norm());
        }
    }
    fail_if(o, iso > 1e-10, "isotropic");
    fail_if(o, lyap > 1e-10, "lyapunov");
    fail_if(o, conv > 1e-6, "convergence");
    o.detail = "isotropic " + fmt(iso) + ", Lyapunov residual " + fmt(lyap) + ", ||Wo(50) - Wo_inf|| " + fmt(conv);
    return o;
}

Outcome criterion7(const CaseStudyResult& hvac) {
    Outcome o;
    double obj_gap = 0.0, trace_gap = 0.0;
    for (const auto& [a, eps] : {std::pair{2.0, 10.0}, std::pair{0.5, 3.0}, std::pair{-1.3, 0.7}}) {
        const StackedData st =
            build_stacked(LtiSystem::autonomous(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, 1.0)), 2);
        const EntropyDesign d = design_entropy(st, eps);
        obj_gap = std::max(obj_gap, std::abs(d.objective - brute_force_2x2(st.O, eps)));
        trace_gap = std::max(trace_gap, std::abs(d.Sigma_de.trace() - eps) / eps);
    }
    // analytic gradient of ln det (O^T S^-1 O)^-1 vs central differences
    Rng rng(1007);
    const LtiSystem sys = random_observable_system(2, 1, 1, 3, rng);
    const StackedData st = build_stacked(sys, 3);
    const Matrix S = random_spd(3, 10.0, rng);
    const Matrix G = entropy_gradient(st, S);
    double grad_err = 0.0;
    const double h = 1e-6;
    for (Index i = 0; i < 3; ++i) {
        for (Index j = i; j < 3; ++j) {
            Matrix E = Matrix::Zero(3, 3);
            E(i, j) = E(j, i) = 1.0;
            const auto g = [&](const Matrix& M) {
                return std::log(oracle_confusion(st.O, M).determinant());
            };
            const double fd = (g(S + h * E) - g(S - h * E)) / (2 * h);
            const double an = (G.cwiseProduct(E)).sum();
            grad_err = std::max(grad_err, std::abs(fd - an) / std::max(1.0, std::abs(an)));
        }
    }
    const Vector& ev = hvac.confusion_difference_eigenvalues;
    const bool indefinite = ev.minCoeff() < 0.0 && ev.maxCoeff() > 0.0;
    fail_if(o, obj_gap > 1e-4, "objective gap");
    fail_if(o, trace_gap > 1e-6, "trace constraint");
    fail_if(o, grad_err > 1e-5, "gradient");
    fail_if(o, !indefinite, "HVAC confusion difference not indefinite");
    o.detail = "objective gap " + fmt(obj_gap) + ", trace gap " + fmt(trace_gap) + ", gradient " + fmt(grad_err) +
               ", HVAC difference eigenvalues in [" + fmt(ev.minCoeff()) + ", " + fmt(ev.maxCoeff()) + "]";
    return o;
}

Outcome criterion8() {
    Outcome o;
    Rng rng(1008);
    double worst = 0.0;
    bool monotone = true;
    for (int trial = 0; trial < 5; ++trial) {
        const Index n = uniform_int(2, 3, rng);
        const Index p = uniform_int(1, 2, rng);
        const Index K = uniform_int(n, 5, rng);
        const LtiSystem sys = random_observable_system(n, p, 1, K, rng, 0.8);
        const StackedData st = build_stacked(sys, K);
        Matrix S = Matrix::Zero(p * K, p * K);
        for (Index k = 0; k < K; ++k) {
            S.block(k * p, k * p, p, p) = random_spd(p, 5.0, rng);
        }
        const auto d = design_block_diagonal(st, oracle_confusion(st.O, S));
        worst = std::max(worst, d.e_blk);
        for (std::size_t i = 1; i < d.history.size(); ++i) {
            monotone = monotone && d.history[i] <= d.history[i - 1];
        }
    }
    fail_if(o, worst > 1e-8, "e_blk");
    fail_if(o, !monotone, "history not monotone");
    o.detail = "max e_blk " + fmt(worst) + ", objective history " + (monotone ? "monotone" : "NOT monotone");
    return o;
}

Outcome criterion9(const CaseStudyResult& hvac, double hvac_seconds) {
    Outcome o;
    const auto [major, minor] = hvac.semi_axes.at("proposed");
    CaseStudyConfig cfg;
    cfg.trials = 1000;
    cfg.entropy.max_iter = 200;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const CaseStudyResult r = run_case_study(cfg);
        worst = std::max(worst, rel_err(oracle_confusion(r.stacked.O, r.proposed.Sigma), cfg.Sigma_v));
    }
    fail_if(o, std::abs(major - 10.0) > 1e-6 || std::abs(minor - 4.0) > 1e-6, "semi-axes");
    fail_if(o, worst > 1e-8, "residual");
    fail_if(o, hvac_seconds > 30.0, "runtime");
    o.detail = "semi-axes (" + std::to_string(minor) + ", " + std::to_string(major) + "), max residual " +
               fmt(worst) + " over 20 seeds, full case study " + fmt(hvac_seconds) + " s";
    return o;
}

std::string report_without_metadata(const fs::path& dir) {
    Json j = read_json_file(dir / "report.json");
    j.erase("metadata");
    return j.dump();
}

Outcome criterion10() {
    Outcome o;
    const fs::path base = fs::temp_directory_path() / "privynth_acceptance";
    std::vector<std::string> reports;
    for (const char* threads : {"1", "3", "1"}) {
        ::setenv("PRIVYNTH_THREADS", threads, 1);
        cli::RunConfig cfg;
        cfg.command = cli::Command::CaseStudy;
        cfg.seed = 42;
        cfg.trials = 5000;
        cfg.out_dir = base / ("run" + std::to_string(reports.size()));
        std::ostringstream err;
        if (cli::run(cfg, err) != cli::kOk) {
            fail_if(o, true, "casestudy failed: " + err.str());
            return o;
        }
        reports.push_back(report_without_metadata(cfg.out_dir));
    }
    ::unsetenv("PRIVYNTH_THREADS");
    std::error_code ec;
    fs::remove_all(base, ec);
    const bool same = reports[0] == reports[1] && reports[1] == reports[2];
    fail_if(o, !same, "reports differ");
    o.detail = std::string("casestudy report.json ") + (same ? "byte-identical" : "DIFFERS") +
               " across 3 runs (1, 3, 1 threads)";
    return o;
}

} // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << o.detail << std::endl;
    };

    Timer hvac_timer;
    const CaseStudyResult hvac = run_case_study(CaseStudyConfig{});
    const double hvac_seconds = hvac_timer.seconds();

    report(1, criterion1);
    report(2, criterion2);
    report(3, criterion3);
    report(4, criterion4);
    report(5, criterion5);
    report(6, criterion6);
    report(7, [&] { return criterion7(hvac); });
    report(8, criterion8);
    report(9, [&] { return criterion9(hvac, hvac_seconds); });
    report(10, criterion10);
    std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
    return failures == 0 ? 0 : 1;
}
