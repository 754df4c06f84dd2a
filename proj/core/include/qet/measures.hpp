// measures.hpp — Transport figures of merit computed from trajectories

#pragma once

#include "qet/integrator.hpp"
#include "qet/model.hpp"

#include <vector>

namespace qet {

struct TrappingTime {
    std::vector<double> tau_n;    // int_0^inf rho_nn dt per site
    double avg_trapping_time{0.0};
    double avg_minus_offset{0.0}; // <t> - 1/kappa
    double tail{0.0};             // extrapolated part included in tau_n
    double tail_bound{0.0};       // bound on the neglected remainder
};

// Requires a converged run: trace below `stop_trace` at the end, or a tail
// that can be extrapolated. Throws ConvergenceError otherwise.
TrappingTime average_trapping_time(const Trajectory& traj, double kappa, double stop_trace = 1.0e-6);

// kappa * int_0^{t_u} rho_NN dt.
double eta(const Trajectory& traj, double t_u, double kappa);

// 1 / (1 + k_d <t>).
double quantum_yield(double avg_trapping_time, double k_d);

struct Peak {
    double time{0.0};
    double value{0.0};
    bool at_boundary{false}; // maximum sits on the first or last stored point
};

// Argmax over snapshots with three-point parabolic refinement.
Peak peak(const Trajectory& traj, int site);

struct MeasureConfig {
    double t_u{2000.0};
    double k_d{0.0};
    double stop_trace{1.0e-6};
};

struct TransportMeasures {
    std::vector<double> tau_n;
    double avg_trapping_time{0.0};
    double avg_minus_offset{0.0};
    double tail{0.0};
    double tail_bound{0.0};
    double eta{0.0};
    double t_u{0.0};
    double k_d{0.0};
    double quantum_yield{1.0};
    double peak_time{0.0};
    double peak_value{0.0};
    bool peak_at_boundary{false};
};

// All measures for the last site as trap.
TransportMeasures compute_measures(const Trajectory& traj, double kappa, const MeasureConfig& cfg);

} // namespace qet
