#include "qet/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qet {

TrappingTime average_trapping_time(const Trajectory& traj, double kappa, double stop_trace) {
    if (traj.times.empty()) {
        throw ConvergenceError("average_trapping_time: empty trajectory");
    }
    if (!(kappa > 0.0)) {
        throw SpecError("average_trapping_time: kappa must be > 0");
    }
    const int n = traj.n_sites();
    TrappingTime out;
    out.tau_n.resize(static_cast<std::size_t>(n));

    const double end_trace = traj.end_trace();
    const bool below_stop = end_trace < stop_trace;
    const bool summed = !below_stop && !traj.stationary_remainder.empty();
    for (int site = 0; site < n; ++site) {
        const auto i = static_cast<std::size_t>(site);
        const double tail = summed ? traj.stationary_remainder[i] : tail_extrapolate(traj, site, stop_trace);
        out.tau_n[i] = traj.cumulative[i].back() + tail;
        out.tail += tail;
    }

    if (below_stop) {
        // Remaining population decays no slower than the fitted tail rate.
        const auto fit = fit_trace_tail(traj);
        const double rate = fit.rate > 0.0 ? fit.rate : kappa / n;
        out.tail_bound = end_trace / rate;
    } else if (!summed) {
        // The extrapolated tail itself is the uncertain part.
        out.tail_bound = out.tail;
    }

    out.avg_trapping_time = std::accumulate(out.tau_n.begin(), out.tau_n.end(), 0.0);
    out.avg_minus_offset = out.avg_trapping_time - 1.0 / kappa;
    return out;
}

double eta(const Trajectory& traj, double t_u, double kappa) {
    return kappa * population_integral(traj, traj.n_sites() - 1, t_u);
}

double quantum_yield(double avg_trapping_time, double k_d) {
    if (!(k_d >= 0.0)) {
        throw SpecError("quantum_yield: k_d must be >= 0");
    }
    return 1.0 / (1.0 + k_d * avg_trapping_time);
}

Peak peak(const Trajectory& traj, int site) {
    if (site < 0 || site >= traj.n_sites() || traj.times.empty()) {
        throw SpecError("peak: site out of range or empty trajectory");
    }
    const auto& pop = traj.populations[static_cast<std::size_t>(site)];
    const auto& times = traj.times;
    const auto best = static_cast<std::size_t>(std::max_element(pop.begin(), pop.end()) - pop.begin());

    Peak out{times[best], pop[best], best == 0 || best + 1 == pop.size()};
    if (out.at_boundary) {
        return out;
    }
    // Vertex of the parabola through the three points around the maximum.
    const double t0 = times[best - 1], t1 = times[best], t2 = times[best + 1];
    const double y0 = pop[best - 1], y1 = pop[best], y2 = pop[best + 1];
    const double d01 = (y1 - y0) / (t1 - t0);
    const double d12 = (y2 - y1) / (t2 - t1);
    const double curvature = (d12 - d01) / (t2 - t0);
    if (curvature < 0.0) {
        const double vertex = 0.5 * (t0 + t1) - d01 / (2.0 * curvature);
        if (vertex >= t0 && vertex <= t2) {
            out.time = vertex;
            out.value = y1 + d01 * (vertex - t1) + curvature * (vertex - t1) * (vertex - t0);
        }
    }
    return out;
}

TransportMeasures compute_measures(const Trajectory& traj, double kappa, const MeasureConfig& cfg) {
    TransportMeasures m;
    const auto trapping = average_trapping_time(traj, kappa, cfg.stop_trace);
    m.tau_n = trapping.tau_n;
    m.avg_trapping_time = trapping.avg_trapping_time;
    m.avg_minus_offset = trapping.avg_minus_offset;
    m.tail = trapping.tail;
    m.tail_bound = trapping.tail_bound;
    m.t_u = cfg.t_u;
    m.eta = eta(traj, cfg.t_u, kappa);
    m.k_d = cfg.k_d;
    m.quantum_yield = quantum_yield(m.avg_trapping_time, cfg.k_d);
    const auto p = peak(traj, traj.n_sites() - 1);
    m.peak_time = p.time;
    m.peak_value = p.value;
    m.peak_at_boundary = p.at_boundary;
    return m;
}

} // namespace qet
