#include "qet/runner.hpp"

#include "qet/lindblad.hpp"
#include "qet/tcl2.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace qet {

namespace {

using nlohmann::ordered_json;

ordered_json finite_or_null(double value) {
    return std::isfinite(value) ? ordered_json(value) : ordered_json(nullptr);
}

ordered_json config_lines(const RunConfig& cfg) {
    ordered_json lines = ordered_json::array();
    std::istringstream in(echo(cfg));
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

} // namespace

double lindblad_rate(const RunConfig& cfg) {
    return cfg.lindblad_gamma ? *cfg.lindblad_gamma : white_noise_rate(cfg.noise);
}

std::unique_ptr<Generator> make_generator(const RunConfig& cfg) {
    if (cfg.engine == Engine::lindblad) {
        return std::make_unique<LindbladGenerator>(cfg.chain, lindblad_rate(cfg), cfg.trap);
    }
    return std::make_unique<Tcl2Generator>(cfg.chain, cfg.noise, cfg.trap);
}

IntegratorConfig integrator_settings(const RunConfig& cfg) {
    IntegratorConfig ic = cfg.integrator;
    ic.step = resolved_step(cfg);
    check_step(ic.step, cfg.chain, memory_time(cfg));
    return ic;
}

SimulationResult simulate(const RunConfig& cfg) {
    SimulationResult result;
    result.covariance = validate_covariance(cfg.noise);
    if (cfg.engine == Engine::tcl2 && result.covariance.checked && !result.covariance.is_realizable) {
        std::ostringstream msg;
        msg << "noise covariance is not positive semidefinite (min eigenvalue "
            << result.covariance.eigenvalues.minCoeff() << "); TCL2 runs it as a formal equation";
        result.warnings.push_back(msg.str());
    }
    const auto gen = make_generator(cfg);
    IntegratorConfig ic = integrator_settings(cfg);
    ic.store_states = cfg.output.states;
    result.trajectory = propagate(*gen, initial_excitation(cfg.initial_site, cfg.chain.n_sites()), ic);
    if (result.trajectory.min_eigenvalue < -1e-6) {
        std::ostringstream msg;
        msg << "density matrix lost positivity: min eigenvalue " << result.trajectory.min_eigenvalue;
        result.warnings.push_back(msg.str());
    }
    if (!(cfg.chain.kappa > 0.0)) {
        result.measures_error = "no trap (chain.kappa = 0): transport measures skipped";
        return result;
    }
    try {
        result.measures = compute_measures(result.trajectory, cfg.chain.kappa, cfg.measures);
    } catch (const ConvergenceError& err) {
        result.measures_error = err.what();
    }
    return result;
}

NoiseSpec oracle_noise(const RunConfig& cfg) {
    NoiseSpec noise = cfg.noise;
    if (cfg.oracle.epsilon_sq) {
        noise.epsilon_sq = *cfg.oracle.epsilon_sq;
    }
    return noise;
}

McConfig oracle_settings(const RunConfig& cfg, int jobs) {
    McConfig mc;
    mc.n_traj = cfg.oracle.n_traj;
    mc.seed = cfg.oracle.seed;
    mc.step = integrator_settings(cfg).step;
    mc.t_max = cfg.oracle.t_max;
    mc.snapshot_stride = cfg.integrator.snapshot_stride;
    mc.jobs = jobs;
    mc.trap = cfg.trap;
    mc.initial_site = cfg.initial_site;
    return mc;
}

McEstimate run_oracle(const RunConfig& cfg, int jobs) {
    return mc_average(cfg.chain, oracle_noise(cfg), oracle_settings(cfg, jobs));
}

CompareReport run_compare(const RunConfig& cfg, int jobs) {
    CompareReport report;
    report.oracle = run_oracle(cfg, jobs);

    IntegratorConfig ic = integrator_settings(cfg);
    ic.t_max = cfg.oracle.t_max;
    ic.stop_trace = 0.0;
    ic.store_states = false;
    const auto gen = make_generator(cfg);
    report.engine = propagate(*gen, initial_excitation(cfg.initial_site, cfg.chain.n_sites()), ic);
    if (report.engine.size() != report.oracle.times.size()) {
        throw NumericalError("compare: engine and oracle grids differ");
    }

    const int n = cfg.chain.n_sites();
    report.pass = true;
    for (int a = 0; a < n; ++a) {
        const auto i = static_cast<std::size_t>(a);
        double worst = -1.0, at = 0.0, env_at = 0.0, ratio = 0.0;
        for (std::size_t k = 0; k < report.oracle.times.size(); ++k) {
            const double dev = std::abs(report.engine.populations[i][k] - report.oracle.mean_populations[i][k]);
            const double env = std::max(3.0 * report.oracle.stderr_populations[i][k], 0.01);
            if (dev > worst) {
                worst = dev;
                at = report.oracle.times[k];
                env_at = env;
            }
            ratio = std::max(ratio, dev / env);
            if (!(dev <= env)) {
                report.pass = false;
            }
        }
        report.max_deviation.push_back(worst);
        report.time_of_max.push_back(at);
        report.envelope_at_max.push_back(env_at);
        report.max_ratio.push_back(ratio);
    }
    return report;
}

void write_measures_json(std::ostream& os, const RunConfig& cfg, const SimulationResult& result) {
    ordered_json j;
    j["version"] = kVersion;
    j["engine"] = to_string(cfg.engine);
    const auto& traj = result.trajectory;
    j["converged"] = result.measures.has_value();
    if (result.measures) {
        const auto& m = *result.measures;
        j["tau_n"] = m.tau_n;
        j["avg_trapping_time"] = m.avg_trapping_time;
        j["avg_minus_offset"] = m.avg_minus_offset;
        j["tail"] = m.tail;
        j["tail_bound"] = m.tail_bound;
        j["kappa_tau_N"] = cfg.chain.kappa * m.tau_n.back();
        j["eta"] = m.eta;
        j["t_u"] = m.t_u;
        j["k_d"] = m.k_d;
        j["quantum_yield"] = m.quantum_yield;
        j["peak_time"] = m.peak_time;
        j["peak_value"] = m.peak_value;
        j["peak_at_boundary"] = m.peak_at_boundary;
    } else {
        j["error"] = result.measures_error;
    }
    ordered_json diag;
    diag["step"] = traj.step;
    diag["end_time"] = traj.end_time();
    diag["end_trace"] = traj.end_trace();
    diag["stopped_on_trace"] = traj.stopped_on_trace;
    diag["min_eigenvalue"] = finite_or_null(traj.min_eigenvalue);
    diag["max_hermiticity_error"] = traj.max_hermiticity_error;
    diag["max_trace_increase"] = traj.max_trace_increase;
    if (cfg.engine == Engine::lindblad) {
        diag["lindblad_gamma"] = lindblad_rate(cfg);
    }
    if (result.covariance.checked) {
        diag["covariance_realizable"] = result.covariance.is_realizable;
        diag["covariance_eigenvalues"] = std::vector<double>(
            result.covariance.eigenvalues.data(),
            result.covariance.eigenvalues.data() + result.covariance.eigenvalues.size());
    }
    j["diagnostics"] = diag;
    j["warnings"] = result.warnings;
    j["config"] = config_lines(cfg);
    os << j.dump(2) << '\n';
}

void write_compare_json(std::ostream& os, const RunConfig& cfg, const CompareReport& report) {
    ordered_json j;
    j["version"] = kVersion;
    j["engine"] = to_string(cfg.engine);
    j["n_traj"] = report.oracle.n_traj;
    j["seed"] = cfg.oracle.seed;
    j["t_max"] = cfg.oracle.t_max;
    j["oracle_epsilon_sq"] = oracle_noise(cfg).epsilon_sq;
    ordered_json sites = ordered_json::array();
    for (std::size_t a = 0; a < report.max_deviation.size(); ++a) {
        ordered_json s;
        s["site"] = a + 1;
        s["max_deviation"] = report.max_deviation[a];
        s["time_of_max"] = report.time_of_max[a];
        s["envelope_at_max"] = report.envelope_at_max[a];
        s["max_ratio"] = report.max_ratio[a];
        sites.push_back(s);
    }
    j["sites"] = sites;
    j["pass"] = report.pass;
    j["config"] = config_lines(cfg);
    os << j.dump(2) << '\n';
}

void write_compare_csv(std::ostream& os, const CompareReport& report) {
    const std::size_t n = report.max_deviation.size();
    os << "t";
    for (std::size_t a = 1; a <= n; ++a) {
        os << ",engine_pop_" << a << ",mc_pop_" << a << ",mc_stderr_" << a;
    }
    os << '\n';
    for (std::size_t k = 0; k < report.oracle.times.size(); ++k) {
        os << format_double(report.oracle.times[k]);
        for (std::size_t a = 0; a < n; ++a) {
            os << ',' << format_double(report.engine.populations[a][k]) << ','
               << format_double(report.oracle.mean_populations[a][k]) << ','
               << format_double(report.oracle.stderr_populations[a][k]);
        }
        os << '\n';
    }
}

} // namespace qet
