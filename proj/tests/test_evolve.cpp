#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rydline/analysis.hpp"
#include "rydline/errors.hpp"
#include "rydline/evolve.hpp"
#include "rydline/noisegen.hpp"

using namespace rydline;

TEST(Schedule, ThreeStepEndpoints) {
    const RampSchedule s = three_step_schedule(10, 20, 30);
    EXPECT_DOUBLE_EQ(s.total_duration(), 60.0);
    EXPECT_DOUBLE_EQ(s.omega(0), 0.1);
    EXPECT_DOUBLE_EQ(s.delta(0), -3.0);
    EXPECT_DOUBLE_EQ(s.omega(60), 0.1);
    EXPECT_DOUBLE_EQ(s.delta(60), 1.1);
    EXPECT_DOUBLE_EQ(s.omega(5), 0.55);
    EXPECT_DOUBLE_EQ(s.omega(20), 1.0);
    EXPECT_DOUBLE_EQ(s.delta(20), -3.0 + 0.5 * 4.1);
    EXPECT_DOUBLE_EQ(s.delta_rate(20), 4.1 / 20);
    EXPECT_DOUBLE_EQ(s.omega_rate(45), -0.9 / 30);
}

TEST(Schedule, FinalStepAndValidation) {
    const RampSchedule s = final_step_schedule(90, 2.0);
    EXPECT_DOUBLE_EQ(s.omega(0), 2.0);
    EXPECT_DOUBLE_EQ(s.omega(90), 0.2);
    EXPECT_DOUBLE_EQ(s.delta(45), 2.2);
    EXPECT_THROW(three_step_schedule(0, 1, 1), DomainError);
    EXPECT_THROW(final_step_schedule(-5), DomainError);
    EXPECT_THROW(RampSchedule({{1, 0, 1, 0, 0}, {1, 2, 2, 0, 0}}), DomainError);
}

TEST(Evolve, SingleSiteRabi) {
    const ChainSystem sys(ChainParams{1, 1.0});
    const double w = 1.3;
    const RampSchedule s = constant_schedule(w, 0.0, 5.0);
    EvolutionConfig cfg;
    cfg.dt = 1e-3 / w;
    cfg.record_stride = 100;
    StateVector psi0 = StateVector::Zero(2);
    psi0[0] = 1.0;
    const Trajectory t = evolve(sys, psi0, s, nullptr, cfg);
    const double p1 = std::norm(t.final_state[1]);
    EXPECT_NEAR(p1, std::pow(std::sin(w * 5.0 / 2), 2), 1e-8);
    EXPECT_LT(t.max_norm_drift, 1e-10);
    EXPECT_GT(t.records.size(), 10u);
}

TEST(Evolve, ClassicalPopulationsAreFrozen) {
    const ChainParams p{5, 1.0};
    const ChainSystem sys(p);
    const PhaseSignal noise = scale_signal(generate_signal(synthesize_default_spectrum(), 3), 5.0);
    StateVector psi0 = (basis_state("10101") + basis_state("01000") * std::complex<double>(0, 1)) / std::sqrt(2.0);
    EvolutionConfig cfg;
    cfg.dt = 0.05;
    for (Frame frame : {Frame::LabPhase, Frame::RotatingDetuning}) {
        cfg.frame = frame;
        const Trajectory t = evolve(sys, psi0, constant_schedule(0.0, 0.7, 20.0), &noise, cfg);
        EXPECT_LT((t.final_state.cwiseAbs2() - psi0.cwiseAbs2()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Evolve, CoverageAndStepChecks) {
    const ChainSystem sys(ChainParams{3, 1.0});
    const StateVector psi0 = basis_state("000");
    PhaseSignal shortn;
    shortn.dt = 0.01;
    shortn.samples.assign(100, 0.0);
    EvolutionConfig cfg;
    EXPECT_THROW(evolve(sys, psi0, constant_schedule(1, 0, 5.0), &shortn, cfg), CoverageError);
    cfg.dt = 0.02;
    EXPECT_THROW(evolve(sys, psi0, constant_schedule(1, 0, 0.5), &shortn, cfg), DomainError);
    cfg.dt = 0.01;
    EXPECT_THROW(evolve(sys, 2.0 * psi0, constant_schedule(1, 0, 0.5), nullptr, cfg), DomainError);
    EXPECT_THROW(evolve(sys, basis_state("00000"), constant_schedule(1, 0, 0.5), nullptr, cfg), DomainError);
}

TEST(Evolve, SectorEvolutionMatchesFullSpace) {
    const ChainParams p{5, 1.0};
    const ChainSystem full(p), sym(p, Sector::Symmetric);
    const PhaseSignal noise = generate_signal(synthesize_default_spectrum(), 21);
    const StateVector g = ground_state(p, 1.0, 1.1).state;
    EvolutionConfig cfg;
    cfg.dt = 0.01;
    const RampSchedule s = final_step_schedule(20.0);
    const Trajectory tf = evolve(full, g, s, &noise, cfg);
    const Trajectory ts = evolve(sym, sym.restrict_state(g), s, &noise, cfg);
    EXPECT_LT((sym.embed(ts.final_state) - tf.final_state).norm(), 1e-9);
    EXPECT_NEAR(tf.records.back().h_int, ts.records.back().h_int, 1e-10);
}

TEST(Evolve, FramesAgreeAtSmallSteps) {
    const ChainParams p{5, 1.0};
    const ChainSystem sys(p, Sector::Symmetric);
    const PhaseSignal noise = scale_signal(generate_signal(synthesize_default_spectrum(), 4), 3.0);
    const StateVector g = sys.restrict_state(ground_state(p, 1.0, 1.1).state);
    EvolutionConfig cfg;
    cfg.dt = 2e-3;
    const RampSchedule s = final_step_schedule(10.0);
    const Trajectory lab = evolve(sys, g, s, &noise, cfg);
    cfg.frame = Frame::RotatingDetuning;
    const Trajectory rot = evolve(sys, g, s, &noise, cfg);
    EXPECT_LT(std::abs(lab.records.back().h_int - rot.records.back().h_int), 1e-4);
}

TEST(Evolve, AdiabaticRampReachesTheTarget) {
    const ChainParams p{5, 1.0};
    const ChainSystem sys(p, Sector::Symmetric);
    const StateVector g = sys.restrict_state(ground_state(p, 1.0, 1.1).state);
    EvolutionConfig cfg;
    cfg.dt = 0.05;
    const Trajectory slow = evolve(sys, g, final_step_schedule(90.0), nullptr, cfg);
    const Trajectory fast = evolve(sys, g, final_step_schedule(10.0), nullptr, cfg);
    const double f_slow = instantaneous_ground_fidelity(sys, slow.final_state, 0.1, 1.1);
    const double f_fast = instantaneous_ground_fidelity(sys, fast.final_state, 0.1, 1.1);
    EXPECT_GT(f_slow, 0.99);
    EXPECT_GT(f_slow, f_fast);
}

TEST(Fidelity, Basics) {
    const ChainParams p{5, 1.0};
    const ChainSystem sys(p);
    const Eigensystem eig = diagonalize(sys, 0.6, 1.1);
    EXPECT_NEAR(instantaneous_ground_fidelity(sys, eig.vectors.col(0), 0.6, 1.1), 1.0, 1e-10);
    EXPECT_NEAR(instantaneous_ground_fidelity(sys, eig.vectors.col(3), 0.6, 1.1), 0.0, 1e-10);
    EXPECT_NEAR(ground_fidelity(eig, eig.vectors.col(0)), 1.0, 1e-10);
}

TEST(Fidelity, DegenerateClassicalGroundSpace) {
    // Omega = 0, delta = V_dd / 8 on three sites: |100>, |010>, |001> and |101>
    // all have energy -1/8, and the fidelity projects onto that whole manifold.
    const ChainSystem sys(ChainParams{3, 1.0});
    EXPECT_NEAR(instantaneous_ground_fidelity(sys, basis_state("010"), 0.0, 0.125), 1.0, 1e-12);
    EXPECT_NEAR(instantaneous_ground_fidelity(sys, basis_state("101"), 0.0, 0.125), 1.0, 1e-12);
    const StateVector mix = (basis_state("101") + basis_state("110")) / std::sqrt(2.0);
    EXPECT_NEAR(instantaneous_ground_fidelity(sys, mix, 0.0, 0.125), 0.5, 1e-12);
}

TEST(Adiabaticity, StaticAndLinear) {
    const ChainSystem sys(ChainParams{5, 1.0}, Sector::Symmetric);
    for (const AdiabaticRatio& r : adiabaticity_diagnostic(sys, 0.5, 1.1, 0.0, 0.0, 4))
        if (!r.degenerate) EXPECT_EQ(r.ratio, 0.0);
    const auto full = adiabaticity_diagnostic(sys, 0.5, 1.1, -0.01, 0.0, 4);
    const auto half = adiabaticity_diagnostic(sys, 0.5, 1.1, -0.005, 0.0, 4);
    ASSERT_EQ(full.size(), 6u);
    for (std::size_t i = 0; i < full.size(); ++i) EXPECT_NEAR(half[i].ratio, 0.5 * full[i].ratio, 1e-12);
    EXPECT_THROW(adiabaticity_diagnostic(sys, 0.5, 1.1, 0, 0, 1), DomainError);
}

TEST(Adiabaticity, PeaksNearTheGapMinimum) {
    const ChainParams p{7, 1.0};
    const ChainSystem sys(p, Sector::Symmetric);
    double best_ratio = 0, best_omega = 0, min_gap = 1e9, gap_omega = 0;
    for (int i = 0; i <= 18; ++i) {
        const double w = 0.1 + 0.05 * i;
        const auto r = adiabaticity_diagnostic(sys, w, 1.1, -0.9 / 90, 0.0, 2);
        if (r[0].ratio > best_ratio) best_ratio = r[0].ratio, best_omega = w;
        if (r[0].gap < min_gap) min_gap = r[0].gap, gap_omega = w;
    }
    EXPECT_NEAR(best_omega, gap_omega, 0.1 + 1e-9);
}

TEST(Trajectory, CsvDump) {
    const ChainSystem sys(ChainParams{3, 1.0});
    EvolutionConfig cfg;
    cfg.record_stride = 50;
    cfg.record_fidelity = true;
    const Trajectory t = evolve(sys, basis_state("000"), constant_schedule(1.0, 0.0, 1.0), nullptr, cfg);
    std::ostringstream out;
    write_trajectory_csv(out, t);
    const std::string s = out.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "t,fidelity,energy,H_int,O_Z2,norm");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), static_cast<long>(t.records.size() + 1));
    EXPECT_EQ(t.records.size(), 3u);
}

TEST(Frame, Names) {
    EXPECT_EQ(frame_from_string("lab"), Frame::LabPhase);
    EXPECT_EQ(frame_from_string(to_string(Frame::RotatingDetuning)), Frame::RotatingDetuning);
    EXPECT_THROW(frame_from_string("sideways"), ConfigError);
}
