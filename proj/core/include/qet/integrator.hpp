// integrator.hpp — Fixed-step RK4 propagation and population integrals

#pragma once

#include "qet/generator.hpp"
#include "qet/model.hpp"

#include <functional>
#include <vector>

namespace qet {

// Raised when a run is too short for an infinite-horizon integral.
class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

struct IntegratorConfig {
    double step{0.01};
    double t_max{2.0e5};
    double stop_trace{1.0e-6};  // terminate once trace(rho) drops below
    int snapshot_stride{10};    // store every k-th step
    // Once the generator is stationary, advance with the precomputed RK4
    // step matrix on the real Hermitian parametrization (only for N^2 <= 64).
    bool dense_stationary{true};
    bool monitor_positivity{true};
    bool store_states{true};    // keep full density matrices at snapshots

    void validate() const;
};

// Sampled propagation. Integrals are accumulated every step even when
// snapshots are thinned.
struct Trajectory {
    double step{0.0};
    std::vector<double> times;
    std::vector<ComplexMatrix> states;             // empty unless store_states
    std::vector<std::vector<double>> populations; // [site][snapshot]
    std::vector<std::vector<double>> cumulative;  // [site][snapshot], int_0^t rho_nn
    std::vector<double> traces;

    bool stopped_on_trace{false};
    // int_{t_end}^inf rho_nn dt of the continued RK4 recursion, summed in
    // closed form when the run ended in the stationary regime with a
    // contracting step matrix. Empty otherwise.
    std::vector<double> stationary_remainder;
    double min_eigenvalue{0.0};          // over all snapshots (when monitored)
    double max_hermiticity_error{0.0};
    double max_trace_increase{0.0};      // largest trace(k) - trace(k-1) over snapshots

    int n_sites() const noexcept { return static_cast<int>(populations.size()); }
    std::size_t size() const noexcept { return times.size(); }
    double end_time() const { return times.back(); }
    double end_trace() const { return traces.back(); }
};

using RhsFunction = std::function<ComplexMatrix(double, const ComplexMatrix&)>;

// Classical RK4 with stage times t, t + h/2, t + h.
Trajectory propagate(const Generator& gen, const DensityMatrix& rho0, const IntegratorConfig& cfg);
Trajectory propagate(const RhsFunction& rhs, const DensityMatrix& rho0, const IntegratorConfig& cfg);

// Largest step accepted by the pre-flight check: min(0.05 tau_c, 0.1 / mu_max),
// where mu_max is the spread of the H0 spectrum. Pass tau_c = infinity when
// the generator has no memory time.
double max_stable_step(const ChainSpec& chain, double min_tau_c);

// Throws SpecError when `step` exceeds max_stable_step.
void check_step(double step, const ChainSpec& chain, double min_tau_c);

// Trapezoidal int_0^{t_u} rho_nn dt. Exact at snapshot times; between
// snapshots the stored populations are integrated linearly.
double population_integral(const Trajectory& traj, int site, double t_u);

struct TailFit {
    double rate{0.0};       // r in trace(t) ~ A exp(-r t)
    double amplitude{0.0};  // A
    double r_squared{0.0};
    std::size_t points{0};
};

// Least-squares fit of log trace over the final decade of the run.
TailFit fit_trace_tail(const Trajectory& traj);

// Estimate of int_{t_end}^inf rho_nn dt. Zero when the run ended below
// `stop_trace`; otherwise needs trace(t_end) < 0.05 and a fit with R^2 > 0.999.
double tail_extrapolate(const Trajectory& traj, int site, double stop_trace = 1.0e-6);

} // namespace qet
