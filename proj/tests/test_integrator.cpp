#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dtsfi/fixtures.hpp"
#include "dtsfi/handoff.hpp"
#include "dtsfi/integrator.hpp"
#include "test_support.hpp"

using namespace dtsfi;
namespace pub = dtsfi::fixtures::published;

namespace {

IntegrationConfig horizon(double t_end, double step = 0.01) {
    IntegrationConfig cfg;
    cfg.t_end = t_end;
    cfg.step = step;
    return cfg;
}

/// dc1/dt = 1, everything else fixed.
struct ConstantRate {
    using state_type = Phase1State;
    static constexpr ModelKind kind = ModelKind::phase1;
    Phase1State operator()(const Phase1State&) const { return {0, 0, 0, 0, 1.0}; }
};

/// Field that turns non-finite once c1 passes 2.
struct BlowsUp {
    using state_type = Phase1State;
    static constexpr ModelKind kind = ModelKind::phase1;
    Phase1State operator()(const Phase1State& x) const {
        return {0, 0, 0, 0, x.c1 > 2.0 ? std::numeric_limits<double>::infinity() : 1.0};
    }
};

double max_abs_diff(const Phase1State& a, const Phase1State& b) {
    const auto x = StateLayout<Phase1State>::pack(a);
    const auto y = StateLayout<Phase1State>::pack(b);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
    return worst;
}

} // namespace

TEST(Integrate, PureDecayMatchesExponential) {
    const Phase1Params p{0.0, 0.5, 1.0, 1e3};
    const auto traj = integrate(Phase1System{p}, initial_phase1(p, 100.0), horizon(1.0));
    EXPECT_NEAR(traj.states.back().f1, 36.7879, 1e-6 * 36.7879 + 5e-5);
    EXPECT_NEAR(traj.states.back().f1, 100.0 * std::exp(-1.0), 1e-6 * 100.0 * std::exp(-1.0));
}

TEST(Integrate, NoForwardersStaysConstant) {
    const auto& p = pub::information_a_early;
    const auto traj = integrate(Phase1System{p}, initial_phase1(p, 0.0), horizon(26.0));
    for (const auto& s : traj.states) EXPECT_EQ(s, traj.states.front());
}

TEST(Integrate, CoversHorizonWithExactEndpoint) {
    const auto& p = pub::information_a_early;
    const auto traj = integrate(Phase1System{p}, initial_phase1(p, 47.0), horizon(1.005, 0.01));
    EXPECT_EQ(traj.times.front(), 0.0);
    EXPECT_EQ(traj.times.back(), 1.005);
    EXPECT_EQ(traj.size(), 102u);
    for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_GT(traj.times[i], traj.times[i - 1]);
    EXPECT_EQ(traj.model, ModelKind::phase1);
}

TEST(Integrate, DecimationKeepsBothEnds) {
    const auto& p = pub::information_a_early;
    IntegrationConfig cfg = horizon(1.0, 0.01);
    cfg.record_every = 7;
    const auto traj = integrate(Phase1System{p}, initial_phase1(p, 47.0), cfg);
    const auto full = integrate(Phase1System{p}, initial_phase1(p, 47.0), horizon(1.0, 0.01));
    EXPECT_EQ(traj.size(), 100u / 7 + 2);
    EXPECT_EQ(traj.times.back(), 1.0);
    EXPECT_EQ(traj.states.back(), full.states.back());
    EXPECT_EQ(traj.states[1], full.states[7]);
}

TEST(Integrate, RejectsInvalidConfigAndInitialState) {
    const auto& p = pub::information_a_early;
    EXPECT_THROW(integrate(Phase1System{p}, initial_phase1(p, 47.0), horizon(1.0, 0.0)), ValidationError);
    EXPECT_THROW(integrate(Phase1System{p}, initial_phase1(p, 47.0), horizon(-1.0)), ValidationError);
    IntegrationConfig cfg = horizon(1.0);
    cfg.record_every = 0;
    EXPECT_THROW(integrate(Phase1System{p}, initial_phase1(p, 47.0), cfg), ValidationError);
    EXPECT_THROW(integrate(Phase1System{p}, Phase1State{-1, 1, 0, 0, 1}, horizon(1.0)), ValidationError);
}

TEST(Integrate, NonFiniteStateNamesTheFailureTime) {
    try {
        (void)integrate(BlowsUp{}, Phase1State{1, 1, 0, 0, 0}, horizon(5.0, 0.5));
        FAIL() << "expected an integration error";
    } catch (const IntegrationError& e) {
        EXPECT_GT(e.time(), 2.0);
        EXPECT_LE(e.time(), 3.5);
        EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
    }
}

TEST(Integrate, ClampsGrazingUndershootAndRejectsLargeOnes) {
    IntegrationDiagnostics diag;
    std::array<double, 5> v{100.0, -1e-12, 3.0, 0.0, 5.0};
    detail::clamp_or_fail(v, 4, 1.0, diag);
    EXPECT_EQ(v[1], 0.0);
    EXPECT_EQ(diag.clamp_events, 1u);
    EXPECT_DOUBLE_EQ(diag.clamped_mass, 1e-12);
    std::array<double, 5> w{100.0, -1e-3, 3.0, 0.0, 5.0};
    EXPECT_THROW(detail::clamp_or_fail(w, 4, 1.0, diag), IntegrationError);
}

TEST(Integrate, IsBitwiseDeterministic) {
    const StiSystem sys{pub::information_a_early, pub::information_b_sti};
    const auto start = handoff_sti(run_phase1(pub::information_a_early, 47.0, 2.0), 2.0, 15.0);
    const auto a = integrate(sys, start, horizon(24.0));
    const auto b = integrate(sys, start, horizon(24.0));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.times[i], b.times[i]);
        EXPECT_EQ(a.states[i], b.states[i]);
    }
}

TEST(Integrate, FourthOrderOnPhaseOne) {
    const auto& p = pub::information_a_early;
    const Phase1State x0 = initial_phase1(p, 47.0);
    const double h = 0.1;
    const auto ref = integrate(Phase1System{p}, x0, horizon(10.0, h / 16)).states.back();
    const double e1 = max_abs_diff(integrate(Phase1System{p}, x0, horizon(10.0, h)).states.back(), ref);
    const double e2 = max_abs_diff(integrate(Phase1System{p}, x0, horizon(10.0, h / 2)).states.back(), ref);
    EXPECT_GE(e1 / e2, 12.0) << "e(h)=" << e1 << " e(h/2)=" << e2;
}

TEST(Integrate, AgreesWithTinyStepEulerOnCumulativeForwarding) {
    const auto& p = pub::information_a_early;
    const Phase1State x0 = initial_phase1(p, 47.0);
    const double rk4 = integrate(Phase1System{p}, x0, horizon(26.0, 0.01)).states.back().c1;
    const double euler = integrate_oracle(Phase1System{p}, x0, horizon(26.0, 1e-4)).states.back().c1;
    EXPECT_NEAR(rk4, euler, 1e-3 * euler);
}

TEST(IntegrateOracle, EulerErrorHalvesWithStep) {
    const auto& p = pub::information_a_early;
    const Phase1State x0 = initial_phase1(p, 47.0);
    const auto ref = integrate(Phase1System{p}, x0, horizon(10.0, 0.001)).states.back();
    const double e1 = max_abs_diff(integrate_oracle(Phase1System{p}, x0, horizon(10.0, 0.01)).states.back(), ref);
    const double e2 = max_abs_diff(integrate_oracle(Phase1System{p}, x0, horizon(10.0, 0.005)).states.back(), ref);
    EXPECT_NEAR(e1 / e2, 2.0, 0.2);
}

TEST(IntegrateOracle, ConstantDerivativeIsExact) {
    const auto traj = integrate_oracle(ConstantRate{}, Phase1State{1, 0, 0, 0, 0}, horizon(2.0, 0.25));
    for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_DOUBLE_EQ(traj.states[i].c1, traj.times[i]);
    EXPECT_DOUBLE_EQ(integrate(ConstantRate{}, Phase1State{1, 0, 0, 0, 0}, horizon(2.0, 0.25)).states.back().c1, 2.0);
}

TEST(IntegrateOracle, PureDecayMatchesExponentialAtSmallStep) {
    const Phase1Params p{0.0, 0.5, 1.0, 1e3};
    const auto traj = integrate_oracle(Phase1System{p}, initial_phase1(p, 100.0), horizon(1.0, 1e-5));
    EXPECT_NEAR(traj.states.back().f1, 100.0 * std::exp(-1.0), 1e-4 * 36.7879);
}

TEST(Integrate, ConservationDriftStaysSmallOnRandomRuns) {
    testkit::Draws draws(21);
    for (int i = 0; i < 50; ++i) {
        Phase1Params p1 = draws.phase1();
        p1.beta1 = draws.log_uniform(1e-8, 1e-5);
        const auto t1 = integrate(Phase1System{p1}, initial_phase1(p1, draws.log_uniform(1, 100)), horizon(26.0));
        EXPECT_LT(conservation_drift(t1), 1e-6);
        Phase2Params p2 = draws.phase2();
        p2.beta21 = draws.log_uniform(1e-8, 1e-5);
        p2.beta22 = draws.log_uniform(1e-8, 1e-5);
        p2.beta23 = draws.log_uniform(1e-8, 1e-5);
        const auto t2 = integrate(LtiSystem{p2}, LtiPhase2State{p2.s20, 1e3, 1e4, 20, 0, 20}, horizon(26.0));
        EXPECT_LT(conservation_drift(t2), 1e-6);
        const auto t3 = integrate(StiSystem{p1, p2}, StiPhase2State{p1.s10, 50, 10, 100, 15, 0, 60, 15}, horizon(26.0));
        EXPECT_LT(conservation_drift(t3), 1e-6);
    }
}

TEST(Trajectory, InterpolatesAndRejectsOutOfRangeTimes) {
    const auto& p = pub::information_a_early;
    const auto traj = integrate(Phase1System{p}, initial_phase1(p, 47.0), horizon(1.0, 0.1));
    const Phase1State mid = traj.at(0.25);
    EXPECT_DOUBLE_EQ(mid.c1, 0.5 * (traj.states[2].c1 + traj.states[3].c1));
    EXPECT_EQ(traj.at(0.0), traj.states.front());
    EXPECT_EQ(traj.at(1.0), traj.states.back());
    EXPECT_THROW(traj.at(1.1), RangeError);
    EXPECT_THROW(traj.at(-0.1), RangeError);
    const std::vector<double> query{0.0, 0.25, 1.0};
    const auto c = traj.sample(&Phase1State::c1, query);
    EXPECT_EQ(c[0], traj.states.front().c1);
    EXPECT_EQ(c[2], traj.states.back().c1);
    EXPECT_EQ(traj.component(&Phase1State::f1).size(), traj.size());
}
