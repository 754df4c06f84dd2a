#include "qet/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qet {

namespace {

constexpr int kDenseMaxEntries = 64;

class FunctionGenerator final : public Generator {
public:
    FunctionGenerator(const RhsFunction& rhs, int dim) : rhs_(rhs), dim_(dim) {}
    int dim() const override { return dim_; }
    ComplexMatrix apply(double t, const ComplexMatrix& rho) const override { return rhs_(t, rho); }

private:
    const RhsFunction& rhs_;
    int dim_;
};

// Hermitian rho <-> (diag, Re upper, Im upper) real vector of length N^2.
RealVector pack(const ComplexMatrix& rho) {
    const auto n = rho.rows();
    RealVector x(n * n);
    Eigen::Index k = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
        x(k++) = rho(a, a).real();
    }
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            x(k++) = rho(a, b).real();
            x(k++) = rho(a, b).imag();
        }
    }
    return x;
}

ComplexMatrix unpack(const RealVector& x, Eigen::Index n) {
    ComplexMatrix rho(n, n);
    Eigen::Index k = 0;
    for (Eigen::Index a = 0; a < n; ++a) {
        rho(a, a) = x(k++);
    }
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const Complex z(x(k), x(k + 1));
            k += 2;
            rho(a, b) = z;
            rho(b, a) = std::conj(z);
        }
    }
    return rho;
}

// One RK4 step of the autonomous linear map x' = L x, as a matrix.
RealMatrix rk4_step_matrix(const Generator& gen, double t, double h, Eigen::Index n) {
    const auto size = n * n;
    RealMatrix l(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        RealVector e = RealVector::Zero(size);
        e(i) = 1.0;
        l.col(i) = pack(gen.apply(t, unpack(e, n)));
    }
    const RealMatrix hl = h * l;
    const RealMatrix id = RealMatrix::Identity(size, size);
    return id + hl * (id + hl * (id + hl * (id + hl / 4.0) / 3.0) / 2.0);
}

class Recorder {
public:
    Recorder(int n, const IntegratorConfig& cfg, double step) : cfg_(cfg) {
        traj_.step = step;
        traj_.populations.assign(static_cast<std::size_t>(n), {});
        traj_.cumulative.assign(static_cast<std::size_t>(n), {});
        traj_.min_eigenvalue = std::numeric_limits<double>::infinity();
    }

    void record(double t, const ComplexMatrix& rho, const std::vector<double>& integrals) {
        const auto n = rho.rows();
        double trace = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) {
            const double p = rho(a, a).real();
            traj_.populations[static_cast<std::size_t>(a)].push_back(p);
            traj_.cumulative[static_cast<std::size_t>(a)].push_back(integrals[static_cast<std::size_t>(a)]);
            trace += p;
        }
        if (!traj_.traces.empty()) {
            traj_.max_trace_increase = std::max(traj_.max_trace_increase, trace - traj_.traces.back());
        }
        traj_.times.push_back(t);
        traj_.traces.push_back(trace);
        traj_.max_hermiticity_error =
            std::max(traj_.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
        if (cfg_.monitor_positivity) {
            const ComplexMatrix herm = 0.5 * (rho + rho.adjoint());
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
            traj_.min_eigenvalue = std::min(traj_.min_eigenvalue, solver.eigenvalues().minCoeff());
        }
        if (cfg_.store_states) {
            traj_.states.push_back(rho);
        }
    }

    Trajectory finish(bool stopped_on_trace) {
        traj_.stopped_on_trace = stopped_on_trace;
        if (!cfg_.monitor_positivity) {
            traj_.min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
        }
        return std::move(traj_);
    }

private:
    const IntegratorConfig& cfg_;
    Trajectory traj_;
};

// h ((I - P)^-1 - I/2) x summed over all future steps of x <- P x, the
// trapezoidal remainder of every component. Empty if P does not contract.
std::vector<double> geometric_remainder(const RealMatrix& step_matrix, const RealVector& x, double h,
                                        int n) {
    Eigen::EigenSolver<RealMatrix> eig(step_matrix, false);
    if (eig.info() != Eigen::Success || eig.eigenvalues().cwiseAbs().maxCoeff() >= 1.0 - 1e-14) {
        return {};
    }
    const auto size = step_matrix.rows();
    const RealMatrix id = RealMatrix::Identity(size, size);
    const RealVector sum = (id - step_matrix).partialPivLu().solve(x);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        const double r = h * (sum(a) - 0.5 * x(a));
        if (!std::isfinite(r)) {
            return {};
        }
        out[static_cast<std::size_t>(a)] = std::max(0.0, r);
    }
    return out;
}

[[noreturn]] void abort_non_finite(double t) {
    std::ostringstream msg;
    msg << "non-finite density matrix at t = " << t
        << "; step too large or generator blow-up";
    throw NumericalError(msg.str());
}

} // namespace

void IntegratorConfig::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw SpecError("integrator: step must be > 0");
    }
    if (!(t_max > 0.0)) {
        throw SpecError("integrator: t_max must be > 0");
    }
    if (!(stop_trace >= 0.0 && stop_trace < 1.0)) {
        throw SpecError("integrator: stop_trace must lie in [0, 1)");
    }
    if (snapshot_stride < 1) {
        throw SpecError("integrator: snapshot_stride must be >= 1");
    }
}

Trajectory propagate(const Generator& gen, const DensityMatrix& rho0, const IntegratorConfig& cfg) {
    cfg.validate();
    const int n = gen.dim();
    if (rho0.dim() != n) {
        throw SpecError("propagate: initial state dimension does not match the generator");
    }
    const double h = cfg.step;
    const auto total_steps = static_cast<long long>(std::ceil(cfg.t_max / h - 1e-9));
    const bool dense_allowed = cfg.dense_stationary && n * n <= kDenseMaxEntries;

    ComplexMatrix rho = rho0.matrix();
    std::vector<double> integrals(static_cast<std::size_t>(n), 0.0);
    std::vector<double> previous(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        previous[static_cast<std::size_t>(a)] = rho(a, a).real();
    }

    Recorder recorder(n, cfg, h);
    recorder.record(0.0, rho, integrals);

    bool dense = false;
    RealMatrix step_matrix;
    RealVector x;
    bool stopped_on_trace = false;

    for (long long k = 0; k < total_steps; ++k) {
        const double t = static_cast<double>(k) * h;
        if (!dense && dense_allowed && t >= gen.stationary_after()) {
            step_matrix = rk4_step_matrix(gen, t, h, n);
            x = pack(rho);
            dense = true;
        }

        if (dense) {
            x = step_matrix * x;
            if (!x.allFinite()) {
                abort_non_finite(t + h);
            }
        } else {
            const ComplexMatrix k1 = gen.apply(t, rho);
            const ComplexMatrix k2 = gen.apply(t + 0.5 * h, rho + (0.5 * h) * k1);
            const ComplexMatrix k3 = gen.apply(t + 0.5 * h, rho + (0.5 * h) * k2);
            const ComplexMatrix k4 = gen.apply(t + h, rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!rho.allFinite()) {
                abort_non_finite(t + h);
            }
        }

        double trace = 0.0;
        for (int a = 0; a < n; ++a) {
            const auto i = static_cast<std::size_t>(a);
            const double p = dense ? x(a) : rho(a, a).real();
            integrals[i] += 0.5 * h * (previous[i] + p);
            previous[i] = p;
            trace += p;
        }

        const bool last = k + 1 == total_steps;
        stopped_on_trace = trace < cfg.stop_trace;
        if ((k + 1) % cfg.snapshot_stride == 0 || last || stopped_on_trace) {
            if (dense) {
                rho = unpack(x, n);
            }
            recorder.record(static_cast<double>(k + 1) * h, rho, integrals);
        }
        if (stopped_on_trace) {
            break;
        }
    }
    auto traj = recorder.finish(stopped_on_trace);
    if (!stopped_on_trace && dense) {
        traj.stationary_remainder = geometric_remainder(step_matrix, x, h, n);
    }
    return traj;
}

Trajectory propagate(const RhsFunction& rhs, const DensityMatrix& rho0, const IntegratorConfig& cfg) {
    const FunctionGenerator gen(rhs, rho0.dim());
    return propagate(static_cast<const Generator&>(gen), rho0, cfg);
}

double max_stable_step(const ChainSpec& chain, double min_tau_c) {
    const auto spectral = SpectralDecomposition::of(build_h0(chain));
    const double spread = spectral.eigenvalues.maxCoeff() - spectral.eigenvalues.minCoeff();
    double limit = std::numeric_limits<double>::infinity();
    if (spread > 0.0) {
        limit = 0.1 / spread;
    }
    if (std::isfinite(min_tau_c)) {
        limit = std::min(limit, 0.05 * min_tau_c);
    }
    return limit;
}

void check_step(double step, const ChainSpec& chain, double min_tau_c) {
    const double limit = max_stable_step(chain, min_tau_c);
    if (step > limit * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "integrator.step = " << step << " exceeds the stable limit " << limit
            << " = min(0.05 tau_c, 0.1 / mu_max)";
        throw SpecError(msg.str());
    }
}

double population_integral(const Trajectory& traj, int site, double t_u) {
    if (site < 0 || site >= traj.n_sites()) {
        throw SpecError("population_integral: site out of range");
    }
    if (traj.times.empty()) {
        throw SpecError("population_integral: empty trajectory");
    }
    const auto& times = traj.times;
    const double tol = 1e-9 * std::max(1.0, std::abs(times.back()));
    if (t_u > times.back() + tol) {
        std::ostringstream msg;
        msg << "population_integral: t_u = " << t_u << " lies beyond the end of the run (t = "
            << times.back() << "); extend integrator.t_max";
        throw ConvergenceError(msg.str());
    }
    if (t_u <= 0.0) {
        return 0.0;
    }
    const auto& cum = traj.cumulative[static_cast<std::size_t>(site)];
    const auto& pop = traj.populations[static_cast<std::size_t>(site)];
    auto it = std::lower_bound(times.begin(), times.end(), t_u - tol);
    auto j = static_cast<std::size_t>(it - times.begin());
    if (j >= times.size()) {
        j = times.size() - 1;
    }
    if (std::abs(times[j] - t_u) <= tol) {
        return cum[j];
    }
    // t_u falls strictly between snapshots j-1 and j.
    const std::size_t i = j - 1;
    const double span = times[j] - times[i];
    const double frac = (t_u - times[i]) / span;
    const double p_u = pop[i] + frac * (pop[j] - pop[i]);
    return cum[i] + 0.5 * (t_u - times[i]) * (pop[i] + p_u);
}

TailFit fit_trace_tail(const Trajectory& traj) {
    TailFit fit;
    if (traj.traces.size() < 3) {
        return fit;
    }
    const double end = traj.traces.back();
    if (!(end > 0.0)) {
        return fit;
    }
    std::size_t first = traj.traces.size() - 1;
    while (first > 0 && traj.traces[first - 1] <= 10.0 * end && traj.traces[first - 1] > 0.0) {
        --first;
    }
    const std::size_t count = traj.traces.size() - first;
    fit.points = count;
    if (count < 3) {
        return fit;
    }
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0, syy = 0.0;
    for (std::size_t k = first; k < traj.traces.size(); ++k) {
        const double t = traj.times[k];
        const double y = std::log(traj.traces[k]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        syy += y * y;
    }
    const double cnt = static_cast<double>(count);
    const double var_t = stt - st * st / cnt;
    const double var_y = syy - sy * sy / cnt;
    const double cov = sty - st * sy / cnt;
    if (var_t <= 0.0) {
        return fit;
    }
    const double slope = cov / var_t;
    const double intercept = (sy - slope * st) / cnt;
    fit.rate = -slope;
    fit.amplitude = std::exp(intercept);
    fit.r_squared = var_y > 0.0 ? cov * cov / (var_t * var_y) : 1.0;
    return fit;
}

double tail_extrapolate(const Trajectory& traj, int site, double stop_trace) {
    if (site < 0 || site >= traj.n_sites()) {
        throw SpecError("tail_extrapolate: site out of range");
    }
    const double end_trace = traj.end_trace();
    if (end_trace < stop_trace) {
        return 0.0;
    }
    if (end_trace >= 0.05) {
        std::ostringstream msg;
        msg << "run not converged: trace(t_end = " << traj.end_time() << ") = " << end_trace
            << " >= 0.05; extend integrator.t_max";
        throw ConvergenceError(msg.str());
    }
    const auto fit = fit_trace_tail(traj);
    if (fit.points < 3 || !(fit.rate > 0.0) || !(fit.r_squared > 0.999)) {
        std::ostringstream msg;
        msg << "tail fit failed (points = " << fit.points << ", rate = " << fit.rate
            << ", R^2 = " << fit.r_squared << "); extend integrator.t_max";
        throw ConvergenceError(msg.str());
    }
    const double share = std::max(0.0, traj.populations[static_cast<std::size_t>(site)].back()) / end_trace;
    const double remaining = fit.amplitude * std::exp(-fit.rate * traj.end_time());
    return std::max(0.0, share * remaining / fit.rate);
}

} // namespace qet
