// test_integrator.cpp — RK4 propagation, snapshots, remainders and tail fits

#include "qet/integrator.hpp"
#include "qet/lindblad.hpp"
#include "qet/tcl2.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace qet {
namespace {

// d rho/dt = -kappa rho; stationary from t = 0.
class DecayGenerator final : public Generator {
public:
    DecayGenerator(int dim, double kappa) : dim_(dim), kappa_(kappa) {}
    int dim() const override { return dim_; }
    ComplexMatrix apply(double, const ComplexMatrix& rho) const override {
        return -kappa_ * rho;
    }
    double stationary_after() const override { return 0.0; }

private:
    int dim_;
    double kappa_;
};

IntegratorConfig short_run(double step, double t_max) {
    IntegratorConfig cfg;
    cfg.step = step;
    cfg.t_max = t_max;
    cfg.stop_trace = 0.0;
    cfg.snapshot_stride = 1;
    return cfg;
}

TEST(Propagate, RabiOscillationMatchesExactSolution) {
    const auto chain = test::two_site_chain(0.0);
    const Tcl2Generator gen(chain, NoiseSpec::two_site(0.0, 1.0, 1.0, 0.0));
    const auto traj = propagate(gen, initial_excitation(0, 2), short_run(0.01, 60.0));
    const double mu = std::sqrt(1.04);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double s = std::sin(0.5 * mu * traj.times[k]);
        const double exact = 4.0 * 0.01 / (mu * mu) * s * s;
        worst = std::max(worst, std::abs(traj.populations[1][k] - exact));
    }
    EXPECT_LT(worst, 1e-9);
    EXPECT_NEAR(traj.end_trace(), 1.0, 1e-12);
}

TEST(Propagate, PureDecayAndCumulativeIntegral) {
    const double kappa = 0.1;
    const DecayGenerator gen(2, kappa);
    auto cfg = short_run(0.01, 30.0);
    cfg.snapshot_stride = 100;
    const auto traj = propagate(gen, initial_excitation(1, 2), cfg);
    ASSERT_EQ(traj.size(), 31u);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        EXPECT_NEAR(traj.populations[1][k], std::exp(-kappa * t), 1e-12);
        EXPECT_NEAR(traj.cumulative[1][k], (1.0 - std::exp(-kappa * t)) / kappa, 1e-6);
    }
}

TEST(Propagate, StationaryRemainderSumsTheGeometricTail) {
    const double kappa = 0.1;
    const DecayGenerator gen(2, kappa);
    const auto traj = propagate(gen, initial_excitation(1, 2), short_run(0.01, 30.0));
    ASSERT_EQ(traj.stationary_remainder.size(), 2u);
    EXPECT_NEAR(traj.stationary_remainder[1], std::exp(-kappa * 30.0) / kappa, 1e-6 * std::exp(-3.0) / kappa);
    EXPECT_DOUBLE_EQ(traj.stationary_remainder[0], 0.0);
    EXPECT_NEAR(traj.cumulative[1].back() + traj.stationary_remainder[1], 1.0 / kappa, 1e-5);
}

TEST(Propagate, NoRemainderWithoutContraction) {
    const auto chain = test::two_site_chain(0.0);
    const LindbladGenerator gen(chain, 0.0);
    const auto traj = propagate(gen, initial_excitation(0, 2), short_run(0.01, 5.0));
    EXPECT_TRUE(traj.stationary_remainder.empty());
}

TEST(Propagate, DenseStationaryPathMatchesStagewiseRk4) {
    const auto chain = test::two_site_chain();
    const Tcl2Generator gen(chain, NoiseSpec::two_site(-0.5, 1.0, 0.1, 0.1));
    auto cfg = short_run(0.005, 40.0);
    cfg.snapshot_stride = 50;
    const auto dense = propagate(gen, initial_excitation(0, 2), cfg);
    cfg.dense_stationary = false;
    const auto plain = propagate(gen, initial_excitation(0, 2), cfg);
    ASSERT_EQ(dense.size(), plain.size());
    for (std::size_t k = 0; k < dense.size(); ++k) {
        EXPECT_LT(test::max_abs(dense.states[k] - plain.states[k]), 1e-12);
    }
    EXPECT_FALSE(dense.stationary_remainder.empty());
    EXPECT_TRUE(plain.stationary_remainder.empty());
}

TEST(Propagate, SelfConvergenceIsFourthOrder) {
    const auto chain = test::two_site_chain();
    const Tcl2Generator gen(chain, NoiseSpec::two_site(0.0, 1.0, 1.0, 0.1));
    auto final_state = [&](double h) {
        auto cfg = short_run(h, 20.0);
        cfg.snapshot_stride = 1000000;
        return propagate(gen, initial_excitation(0, 2), cfg).states.back();
    };
    const auto a = final_state(0.08);
    const auto b = final_state(0.04);
    const auto c = final_state(0.02);
    const double order = std::log2(test::max_abs(a - b) / test::max_abs(b - c));
    EXPECT_GT(order, 3.8);
    EXPECT_LT(order, 4.2);
}

TEST(Propagate, SnapshotGridAndFinalStep) {
    const DecayGenerator gen(2, 0.1);
    auto cfg = short_run(0.1, 1.05);
    cfg.snapshot_stride = 4;
    const auto traj = propagate(gen, initial_excitation(1, 2), cfg);
    // 11 steps: snapshots after steps 4, 8 and the last one.
    ASSERT_EQ(traj.size(), 4u);
    EXPECT_DOUBLE_EQ(traj.times[1], 0.4);
    EXPECT_DOUBLE_EQ(traj.times[2], 0.8);
    EXPECT_NEAR(traj.times[3], 1.1, 1e-15);
    EXPECT_EQ(traj.states.size(), 4u);
}

TEST(Propagate, StopsOnTrace) {
    const DecayGenerator gen(2, 1.0);
    auto cfg = short_run(0.01, 100.0);
    cfg.stop_trace = 1e-3;
    cfg.snapshot_stride = 1000;
    const auto traj = propagate(gen, initial_excitation(1, 2), cfg);
    EXPECT_TRUE(traj.stopped_on_trace);
    EXPECT_LT(traj.end_trace(), 1e-3);
    EXPECT_NEAR(traj.end_time(), std::log(1000.0), 0.011);
    EXPECT_TRUE(traj.stationary_remainder.empty());
}

TEST(Propagate, DiagnosticsOnPhysicalRun) {
    const auto chain = test::three_site_chain();
    const Tcl2Generator gen(chain, test::anti_ferromagnetic(0.3));
    auto cfg = short_run(0.01, 200.0);
    cfg.snapshot_stride = 10;
    const auto traj = propagate(gen, initial_excitation(0, 3), cfg);
    EXPECT_LT(traj.max_hermiticity_error, 1e-12);
    EXPECT_LE(traj.max_trace_increase, 1e-14);
    EXPECT_GT(traj.min_eigenvalue, -1e-6);
}

TEST(Propagate, StoreStatesOffKeepsPopulations) {
    const DecayGenerator gen(2, 0.1);
    auto cfg = short_run(0.1, 1.0);
    cfg.store_states = false;
    const auto traj = propagate(gen, initial_excitation(1, 2), cfg);
    EXPECT_TRUE(traj.states.empty());
    EXPECT_EQ(traj.populations[1].size(), traj.size());
}

TEST(Propagate, NonFiniteStateAborts) {
    const RhsFunction rhs = [](double t, const ComplexMatrix& rho) -> ComplexMatrix {
        return t > 0.5 ? ComplexMatrix(rho * std::nan("")) : ComplexMatrix(rho * 0.0);
    };
    EXPECT_THROW(propagate(rhs, initial_excitation(0, 2), short_run(0.1, 2.0)), NumericalError);
}

TEST(Propagate, RejectsInvalidSettings) {
    const DecayGenerator gen(2, 0.1);
    const auto rho = initial_excitation(0, 2);
    auto cfg = short_run(0.1, 1.0);
    cfg.step = 0.0;
    EXPECT_THROW(propagate(gen, rho, cfg), SpecError);
    cfg = short_run(0.1, -1.0);
    EXPECT_THROW(propagate(gen, rho, cfg), SpecError);
    cfg = short_run(0.1, 1.0);
    cfg.stop_trace = 1.0;
    EXPECT_THROW(propagate(gen, rho, cfg), SpecError);
    cfg = short_run(0.1, 1.0);
    cfg.snapshot_stride = 0;
    EXPECT_THROW(propagate(gen, rho, cfg), SpecError);
    EXPECT_THROW(propagate(gen, initial_excitation(0, 3), short_run(0.1, 1.0)), SpecError);
}

TEST(StepLimit, MinOfCorrelationAndSpectralBounds) {
    const auto chain = test::two_site_chain();
    const double mu = std::sqrt(1.04);
    EXPECT_NEAR(max_stable_step(chain, 1.0), 0.05, 1e-15);
    EXPECT_NEAR(max_stable_step(chain, 10.0), 0.1 / mu, 1e-15);
    EXPECT_NEAR(max_stable_step(chain, std::numeric_limits<double>::infinity()), 0.1 / mu, 1e-15);
    EXPECT_NO_THROW(check_step(0.05, chain, 1.0));
    EXPECT_THROW(check_step(0.051, chain, 1.0), SpecError);
}

TEST(PopulationIntegral, ExactAtSnapshotsLinearBetween) {
    Trajectory traj;
    traj.times = {0.0, 1.0, 2.0};
    traj.populations = {{1.0, 0.5, 0.0}, {0.0, 0.5, 1.0}};
    traj.cumulative = {{0.0, 0.7, 1.0}, {0.0, 0.3, 1.0}};
    traj.traces = {1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(population_integral(traj, 0, 1.0), 0.7);
    EXPECT_DOUBLE_EQ(population_integral(traj, 0, 0.0), 0.0);
    // cum(1) + trapezoid from 1 to 1.5 of a line from 0.5 to 0.25.
    EXPECT_DOUBLE_EQ(population_integral(traj, 0, 1.5), 0.7 + 0.5 * 0.5 * 0.75);
    EXPECT_THROW(population_integral(traj, 0, 3.0), ConvergenceError);
    EXPECT_THROW(population_integral(traj, 2, 1.0), SpecError);
}

TEST(TailFit, RecoversExponentialRate) {
    Trajectory traj;
    for (int k = 0; k <= 100; ++k) {
        const double t = 10.0 * k;
        traj.times.push_back(t);
        traj.traces.push_back(0.8 * std::exp(-0.004 * t));
    }
    traj.populations = {traj.traces};
    traj.cumulative = {std::vector<double>(traj.times.size(), 0.0)};
    const auto fit = fit_trace_tail(traj);
    EXPECT_NEAR(fit.rate, 0.004, 1e-12);
    EXPECT_NEAR(fit.amplitude, 0.8, 1e-10);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(tail_extrapolate(traj, 0), traj.traces.back() / 0.004, 1e-9);
}

TEST(TailFit, RefusesUnconvergedRun) {
    Trajectory traj;
    traj.times = {0.0, 1.0, 2.0, 3.0};
    traj.traces = {1.0, 0.9, 0.8, 0.7};
    traj.populations = {traj.traces};
    traj.cumulative = {{0.0, 0.0, 0.0, 0.0}};
    EXPECT_THROW(tail_extrapolate(traj, 0), ConvergenceError);
    traj.traces.back() = 1e-8;
    EXPECT_DOUBLE_EQ(tail_extrapolate(traj, 0), 0.0);
}

} // namespace
} // namespace qet
