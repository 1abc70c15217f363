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
// Design a noise covariance for a small system, then check it by simulation.
#include "privynth/baselines.hpp"
#include "privynth/mechanism.hpp"
#include "privynth/montecarlo.hpp"

#include <iostream>

int main() {
    using namespace privynth;
    Matrix A(2, 2);
    A << 0.9, 0.2,
         0.0, 0.8;
    Matrix C(1, 2);
    C << 1.0, 0.0;
    const LtiSystem sys = LtiSystem::autonomous(A, C);
    const Index K = 6;
    const StackedData st = build_stacked(sys, K);

    Matrix Sigma_v(2, 2);
    Sigma_v << 4.0, 1.0,
               1.0, 9.0;
    const MechanismDesign d = design_optimal(st, Sigma_v);
    std::cout << "beta_opt     " << d.beta_opt << "\n"
              << "eps_opt      " << d.eps_opt << "\n"
              << "trace Sigma  " << d.trace_Sigma << "\n"
              << "residual     " << d.residual << "\n";

    // Monte Carlo: the adversary's error covariance should match Sigma_v.
    TrialOptions opts;
    opts.trials = 20000;
    opts.seed = 1;
    opts.gamma = chi2_quantile(2, 0.05);
    const Vector x0 = (Vector(2) << 1.0, -1.0).finished();
    const CoverageReport rep = run_adversary_trials(sys, K, x0, Vector::Zero(K), d.Sigma, opts);
    std::cout << "empirical cov\n" << rep.empirical_cov << "\n"
              << "coverage     " << rep.coverage_rate << " (nominal " << 1.0 - 0.05 << ")\n";

    // An isotropic mechanism with the same trace fixes the shape to Wo^-1.
    const IsotropicDesign iso = design_dp_isotropic(st, d.trace_Sigma / static_cast<double>(st.rows()));
    std::cout << "isotropic confusion\n" << iso.confusion << "\n";
    return 0;
}
