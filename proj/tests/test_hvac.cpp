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
#include "privynth/hvac.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace privynth;
using namespace privynth::test;

TEST(ZoneModel, TwoZoneHandExample) {
    // dt / (mc R) = 360 / (1000 * 0.5) = 0.72
    const ZoneModel m = ZoneModel::from_edges(Vector::Constant(2, 1000.0), {{0, 1}}, {0.5}, 360.0, {0});
    const LtiSystem sys = build_zone_system(m);
    Matrix expected(2, 2);
    expected << 0.28, 0.72, 0.72, 0.28;
    EXPECT_LE((sys.A() - expected).norm(), 1e-15);
    EXPECT_EQ(sys.C(), (Matrix(1, 2) << 1.0, 0.0).finished());
    EXPECT_NEAR(m.euler_number(), 0.72, 1e-15);
}

TEST(ZoneModel, IsolatedZonesAreConstant) {
    const ZoneModel m = ZoneModel::from_edges(Vector::Constant(3, 800.0), {}, {}, 360.0, {0, 1, 2});
    EXPECT_EQ(build_zone_system(m).A(), Matrix::Identity(3, 3));
}

TEST(ZoneModel, EnergyIsConserved) {
    CaseStudyConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const ZoneModel m = sample_zone_model(cfg);
        const LtiSystem sys = build_zone_system(m);
        // c^T A = c^T because the conduction Laplacian has zero column sums
        const Vector c = m.capacitance;
        EXPECT_LE((sys.A().transpose() * c - c).norm(), 1e-12 * c.norm());
        Rng rng(seed);
        Vector x = gaussian(4, 1, rng);
        const double energy = c.dot(x);
        for (int k = 0; k < 20; ++k) {
            x = sys.A() * x;
        }
        EXPECT_NEAR(c.dot(x), energy, 1e-12 * 20 * c.norm() * std::max(1.0, x.norm()));
    }
}

TEST(ZoneModel, SmallStepIsStable) {
    CaseStudyConfig cfg;
    cfg.dt = 150.0;  // max degree 2 / 0.4 / 950 * 150 < 1
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const ZoneModel m = sample_zone_model(cfg);
        EXPECT_LE(m.euler_number(), 1.0);
        EXPECT_LE(oracle_spectral_radius(build_zone_system(m).A()), 1.0 + 1e-12);
    }
}

TEST(ZoneModel, AmbientLeakAddsInput) {
    ZoneModel m = ZoneModel::from_edges(Vector::Constant(2, 1000.0), {{0, 1}}, {0.5}, 360.0, {0});
    m.ambient_resistance = Vector::Constant(2, 4.0);
    const LtiSystem sys = build_zone_system(m);
    EXPECT_NEAR(sys.B()(0, 0), 360.0 / 1000.0 / 4.0, 1e-15);
    // a uniform temperature equal to ambient is a fixed point
    const Vector x = Vector::Constant(2, 15.0);
    EXPECT_LE((sys.A() * x + sys.B() * Vector::Constant(1, 15.0) - x).norm(), 1e-12);
}

TEST(ZoneModel, RejectsInvalidParameters) {
    EXPECT_THROW(ZoneModel::from_edges(Vector::Constant(2, 1.0), {{0, 0}}, {1.0}, 1.0, {0}), InvalidInput);
    EXPECT_THROW(ZoneModel::from_edges(Vector::Constant(2, 1.0), {{0, 1}}, {}, 1.0, {0}), InvalidInput);
    EXPECT_THROW(build_zone_system(ZoneModel::from_edges(Vector::Constant(2, 1.0), {{0, 1}}, {-1.0}, 1.0, {0})),
                 InvalidInput);
    EXPECT_THROW(build_zone_system(ZoneModel::from_edges(Vector::Constant(2, -1.0), {{0, 1}}, {1.0}, 1.0, {0})),
                 InvalidInput);
    EXPECT_THROW(build_zone_system(ZoneModel::from_edges(Vector::Constant(2, 1.0), {{0, 1}}, {1.0}, 1.0, {5})),
                 InvalidInput);
    CaseStudyConfig cfg;
    cfg.resistance_range = {0.6, 0.4};
    EXPECT_THROW(run_case_study(cfg), InvalidInput);
    cfg = {};
    cfg.Sigma_v = Matrix::Identity(3, 3);
    EXPECT_THROW(run_case_study(cfg), InvalidInput);
}

TEST(CaseStudy, DesignIsExactAcrossSeeds) {
    CaseStudyConfig cfg;
    cfg.trials = 1000;
    cfg.entropy.max_iter = 200;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const CaseStudyResult res = run_case_study(cfg);
        const Matrix conf = oracle_confusion(res.stacked.O, res.proposed.Sigma);
        EXPECT_LE(rel_err(conf, cfg.Sigma_v), 1e-8) << "seed " << seed;
        EXPECT_NEAR(res.entropy.Sigma_de.trace(), res.proposed.Sigma.trace(), 1e-6 * res.proposed.Sigma.trace());
        EXPECT_EQ(res.horizon, 10);
        EXPECT_FALSE(res.horizon_raised);
    }
}

TEST(CaseStudy, ProjectedSemiAxes) {
    CaseStudyConfig cfg;
    cfg.trials = 20000;
    const CaseStudyResult res = run_case_study(cfg);
    const auto [major, minor] = res.semi_axes.at("proposed");
    EXPECT_NEAR(major, 10.0, 1e-6);
    EXPECT_NEAR(minor, 4.0, 1e-6);
    const auto& cov = res.coverage.at("proposed");
    const double sd = std::sqrt(0.05 * 0.95 / 20000);
    EXPECT_NEAR(cov.coverage_rate, 0.95, 3 * sd);
    EXPECT_EQ(res.trajectory.size(), 10u);
    EXPECT_EQ(res.trajectory_columns.size(), 1u + 3 * 2);
}

TEST(CaseStudy, HorizonIsRaisedWhenUnobservable) {
    CaseStudyConfig cfg;
    cfg.horizon = 1;
    cfg.trials = 1000;
    cfg.entropy.max_iter = 50;
    const CaseStudyResult res = run_case_study(cfg);
    EXPECT_TRUE(res.horizon_raised);
    EXPECT_GT(res.horizon, 1);
    EXPECT_EQ(oracle_rank(oracle_observability(res.system.A(), res.system.C(), res.horizon)), 4);
    EXPECT_LT(oracle_rank(oracle_observability(res.system.A(), res.system.C(), res.horizon - 1)), 4);
}

TEST(CaseStudy, UnobservableLayoutIsInfeasible) {
    CaseStudyConfig cfg;
    cfg.edges = {{0, 1}, {2, 3}};  // zones 2, 3 disconnected from zone 0
    cfg.measured_zones = {0};
    cfg.trials = 1000;
    EXPECT_THROW(run_case_study(cfg), Infeasible);
}
