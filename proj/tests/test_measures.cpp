// test_measures.cpp — Trapping time, transported ratio, yield and peak location

#include "qet/lindblad.hpp"
#include "qet/measures.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace qet {
namespace {

// Column-stacked Liouvillian of -i[H, rho] + gamma sum_m (A_m rho A_m - {A_m, rho}/2) - kappa rho_NN |N><N|.
ComplexMatrix liouvillian(const ChainSpec& chain, double gamma) {
    const int n = chain.n_sites();
    RealMatrix h0 = chain.v;
    h0.diagonal() = chain.omega;
    const ComplexMatrix h = h0.cast<Complex>();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const Complex i(0.0, 1.0);
    // vec(A X B) = (B^T kron A) vec(X)
    auto kron = [](const ComplexMatrix& a, const ComplexMatrix& b) {
        ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            for (Eigen::Index c = 0; c < a.cols(); ++c) {
                out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
            }
        }
        return out;
    };
    ComplexMatrix l = -i * (kron(id, h) - kron(h.transpose(), id));
    for (int m = 0; m < n; ++m) {
        ComplexMatrix a = ComplexMatrix::Zero(n, n);
        a(m, m) = 1.0;
        l += gamma * (kron(a, a) - 0.5 * kron(id, a) - 0.5 * kron(a, id));
    }
    l((n - 1) * n + (n - 1), (n - 1) * n + (n - 1)) -= chain.kappa;
    return l;
}

// int_0^inf rho_nn dt = -(L^-1 vec rho0)_nn.
std::vector<double> exact_population_integrals(const ChainSpec& chain, double gamma, int initial) {
    const int n = chain.n_sites();
    Eigen::VectorXcd rho0 = Eigen::VectorXcd::Zero(n * n);
    rho0(initial * n + initial) = 1.0;
    const Eigen::VectorXcd x = liouvillian(chain, gamma).partialPivLu().solve(rho0);
    std::vector<double> out;
    for (int a = 0; a < n; ++a) {
        out.push_back(-x(a * n + a).real());
    }
    return out;
}

TrappingTime lindblad_trapping(const ChainSpec& chain, double gamma, double stop_trace, double t_max) {
    const LindbladGenerator gen(chain, gamma);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.t_max = t_max;
    cfg.stop_trace = stop_trace;
    cfg.snapshot_stride = 100;
    cfg.store_states = false;
    const auto traj = propagate(gen, initial_excitation(0, chain.n_sites()), cfg);
    return average_trapping_time(traj, chain.kappa, stop_trace);
}

TEST(AverageTrappingTime, MatchesLiouvillianInverseTwoSites) {
    const auto chain = test::two_site_chain(0.05);
    const double gamma = 0.2;
    const auto exact = exact_population_integrals(chain, gamma, 0);
    const auto tt = lindblad_trapping(chain, gamma, 1e-8, 2e5);
    for (int a = 0; a < 2; ++a) {
        EXPECT_NEAR(tt.tau_n[a], exact[a], 1e-6 * exact[a]);
    }
    EXPECT_NEAR(chain.kappa * tt.tau_n[1], 1.0, 1e-6);
    EXPECT_NEAR(tt.avg_minus_offset, exact[0] + exact[1] - 1.0 / chain.kappa, 1e-6 * exact[0]);
}

TEST(AverageTrappingTime, StationaryRemainderOnShortRunThreeSites) {
    const auto chain = test::three_site_chain(0.15);
    const double gamma = 0.1;
    const auto exact = exact_population_integrals(chain, gamma, 0);
    // Trace is far from zero at t = 100; the closed-form remainder closes the gap.
    const auto tt = lindblad_trapping(chain, gamma, 1e-6, 100.0);
    double total = 0.0;
    for (int a = 0; a < 3; ++a) {
        EXPECT_NEAR(tt.tau_n[a], exact[a], 1e-6 * exact[a]);
        total += exact[a];
    }
    EXPECT_NEAR(tt.avg_trapping_time, total, 1e-6 * total);
    EXPECT_GT(tt.tail, 0.0);
    EXPECT_EQ(tt.tail_bound, 0.0);
}

TEST(AverageTrappingTime, UnconvergedRunThrows) {
    Trajectory traj;
    traj.times = {0.0, 1.0};
    traj.populations = {{1.0, 0.9}, {0.0, 0.1}};
    traj.cumulative = {{0.0, 0.95}, {0.0, 0.05}};
    traj.traces = {1.0, 1.0};
    EXPECT_THROW(average_trapping_time(traj, 0.005), ConvergenceError);
    EXPECT_THROW(average_trapping_time(traj, 0.0), SpecError);
    EXPECT_THROW(average_trapping_time(Trajectory{}, 0.005), ConvergenceError);
}

TEST(Eta, ApproachesOneForLongHorizons) {
    const auto chain = test::two_site_chain(0.05);
    const LindbladGenerator gen(chain, 0.2);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.t_max = 3000.0;
    cfg.stop_trace = 0.0;
    cfg.store_states = false;
    const auto traj = propagate(gen, initial_excitation(0, 2), cfg);
    const double short_eta = eta(traj, 50.0, chain.kappa);
    const double long_eta = eta(traj, 3000.0, chain.kappa);
    EXPECT_GT(short_eta, 0.0);
    EXPECT_LT(short_eta, long_eta);
    EXPECT_NEAR(long_eta, 1.0 - traj.end_trace(), 1e-6);
}

TEST(QuantumYield, Formula) {
    EXPECT_DOUBLE_EQ(quantum_yield(400.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantum_yield(400.0, 1e-3), 1.0 / 1.4);
    EXPECT_THROW(quantum_yield(400.0, -1.0), SpecError);
}

Trajectory parabola_samples(double vertex) {
    Trajectory traj;
    for (int k = 0; k <= 6; ++k) {
        traj.times.push_back(k);
        traj.traces.push_back(1.0);
    }
    std::vector<double> y;
    for (double t : traj.times) {
        y.push_back(1.0 - 0.1 * (t - vertex) * (t - vertex));
    }
    traj.populations = {y};
    traj.cumulative = {std::vector<double>(y.size(), 0.0)};
    return traj;
}

TEST(Peak, ParabolicRefinementIsExactForParabolas) {
    for (double vertex : {2.3, 3.0, 3.49, 4.8}) {
        const auto p = peak(parabola_samples(vertex), 0);
        EXPECT_FALSE(p.at_boundary);
        EXPECT_NEAR(p.time, vertex, 1e-12);
        EXPECT_NEAR(p.value, 1.0, 1e-12);
    }
}

TEST(Peak, FlagsBoundaryMaximum) {
    const auto p = peak(parabola_samples(9.0), 0);
    EXPECT_TRUE(p.at_boundary);
    EXPECT_DOUBLE_EQ(p.time, 6.0);
    EXPECT_THROW(peak(parabola_samples(2.0), 1), SpecError);
}

TEST(ComputeMeasures, CombinesAllFigures) {
    const auto chain = test::two_site_chain(0.05);
    const LindbladGenerator gen(chain, 0.2);
    IntegratorConfig cfg;
    cfg.step = 0.01;
    cfg.t_max = 1000.0;
    cfg.snapshot_stride = 10;
    const auto traj = propagate(gen, initial_excitation(0, 2), cfg);
    MeasureConfig mc;
    mc.t_u = 100.0;
    mc.k_d = 1e-3;
    const auto m = compute_measures(traj, chain.kappa, mc);
    EXPECT_DOUBLE_EQ(m.eta, eta(traj, 100.0, chain.kappa));
    EXPECT_DOUBLE_EQ(m.quantum_yield, quantum_yield(m.avg_trapping_time, 1e-3));
    EXPECT_DOUBLE_EQ(m.avg_minus_offset, m.avg_trapping_time - 20.0);
    EXPECT_GT(m.peak_value, 0.0);
    EXPECT_FALSE(m.peak_at_boundary);
}

} // namespace
} // namespace qet
