#include "qet/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace qet {

namespace {

constexpr int kMaxSites = 8;
constexpr int kBlockSize = 64;

constexpr int bound(int n) { return n == Eigen::Dynamic ? kMaxSites : n; }

template <int N>
using StateMatrix = Eigen::Matrix<Complex, N, N, 0, bound(N), bound(N)>;
template <int N>
using NoiseVector = Eigen::Matrix<double, N, 1, 0, bound(N), 1>;
template <int N>
using FactorMatrix = Eigen::Matrix<double, N, N, 0, bound(N), bound(N)>;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Streaming OU process on a uniform grid; sample_noise_path stores its output.
template <int N>
class OuStream {
public:
    OuStream(const OuSampler& sampler, std::uint64_t seed, double h)
        : factor_(sampler.factor()), engine_(seed), xi_(sampler.dim()), value_(sampler.dim()) {
        decay_ = std::exp(-h / sampler.tau_c());
        kick_ = std::sqrt(-std::expm1(-2.0 * h / sampler.tau_c()));
        draw();
        value_ = factor_ * xi_;
    }

    const NoiseVector<N>& value() const noexcept { return value_; }

    void advance() {
        draw();
        value_ = decay_ * value_ + kick_ * (factor_ * xi_);
    }

private:
    void draw() {
        for (Eigen::Index i = 0; i < xi_.size(); ++i) {
            xi_(i) = normal_(engine_);
        }
    }

    FactorMatrix<N> factor_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
    double decay_{0.0};
    double kick_{0.0};
    NoiseVector<N> xi_;
    NoiseVector<N> value_;
};

// Running mean and sum of squared deviations (Welford), merged pairwise (Chan).
struct Partial {
    double count{0.0};
    std::vector<std::vector<double>> mean; // [site][snapshot]
    std::vector<std::vector<double>> m2;
    std::vector<ComplexMatrix> states;

    Partial(int n, std::size_t snapshots) {
        mean.assign(static_cast<std::size_t>(n), std::vector<double>(snapshots, 0.0));
        m2 = mean;
        states.assign(snapshots, ComplexMatrix::Zero(n, n));
    }

    void absorb(const Partial& other) {
        if (other.count == 0.0) {
            return;
        }
        const double merged = count + other.count;
        const double weight = count * other.count / merged;
        for (std::size_t a = 0; a < mean.size(); ++a) {
            for (std::size_t k = 0; k < mean[a].size(); ++k) {
                const double d = other.mean[a][k] - mean[a][k];
                mean[a][k] += d * (other.count / merged);
                m2[a][k] += other.m2[a][k] + d * d * weight;
            }
        }
        for (std::size_t k = 0; k < states.size(); ++k) {
            states[k] += other.states[k];
        }
        count = merged;
    }
};

struct SnapshotGrid {
    long long total_steps{0};
    std::vector<long long> steps; // step index of every snapshot after t = 0

    SnapshotGrid(const McConfig& cfg) {
        total_steps = static_cast<long long>(std::ceil(cfg.t_max / cfg.step - 1e-9));
        for (long long k = 0; k < total_steps; ++k) {
            if ((k + 1) % cfg.snapshot_stride == 0 || k + 1 == total_steps) {
                steps.push_back(k + 1);
            }
        }
    }

    std::size_t size() const noexcept { return steps.size() + 1; }
};

class TrajectoryRunner {
public:
    virtual ~TrajectoryRunner() = default;
    virtual void run(std::uint64_t index, Partial& acc) const = 0;
};

// Stochastic Liouville propagation of one noise realization, RK4 with the
// noise sampled on the half-step grid.
template <int N>
class FixedRunner final : public TrajectoryRunner {
public:
    FixedRunner(const ChainSpec& chain, const NoiseSpec& noise, const McConfig& cfg,
                const OuSampler& sampler, const SnapshotGrid& grid)
        : cfg_(cfg), sampler_(sampler), grid_(grid), n_(chain.n_sites()),
          scale_(std::sqrt(noise.epsilon_sq)), kappa_(chain.kappa) {
        h0_ = build_h0(chain);
    }

    void run(std::uint64_t index, Partial& acc) const override {
        OuStream<N> noise(sampler_, sampler_.trajectory_seed(index), 0.5 * cfg_.step);
        StateMatrix<N> rho = StateMatrix<N>::Zero(n_, n_);
        rho(cfg_.initial_site, cfg_.initial_site) = 1.0;
        const double h = cfg_.step;

        acc.count += 1.0;
        std::size_t snap = 0;
        record(rho, snap++, acc);
        NoiseVector<N> f_start = scale_ * noise.value();
        StateMatrix<N> k1(n_, n_), k2(n_, n_), k3(n_, n_), k4(n_, n_), stage(n_, n_);
        for (long long k = 0; k < grid_.total_steps; ++k) {
            noise.advance();
            const NoiseVector<N> f_mid = scale_ * noise.value();
            noise.advance();
            const NoiseVector<N> f_end = scale_ * noise.value();

            rhs(rho, f_start, k1);
            stage = rho + (0.5 * h) * k1;
            rhs(stage, f_mid, k2);
            stage = rho + (0.5 * h) * k2;
            rhs(stage, f_mid, k3);
            stage = rho + h * k3;
            rhs(stage, f_end, k4);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            f_start = f_end;

            if (grid_.steps[snap - 1] == k + 1) {
                if (!rho.allFinite()) {
                    std::ostringstream msg;
                    msg << "mc_average: non-finite state in trajectory " << index << " at t = "
                        << static_cast<double>(k + 1) * h;
                    throw NumericalError(msg.str());
                }
                record(rho, snap++, acc);
            }
        }
    }

private:
    void rhs(const StateMatrix<N>& rho, const NoiseVector<N>& f, StateMatrix<N>& out) const {
        for (int b = 0; b < n_; ++b) {
            for (int a = 0; a < n_; ++a) {
                Complex acc = (f(a) - f(b)) * rho(a, b);
                for (int c = 0; c < n_; ++c) {
                    acc += h0_(a, c) * rho(c, b) - rho(a, c) * h0_(c, b);
                }
                out(a, b) = Complex(acc.imag(), -acc.real());
            }
        }
        const int last = n_ - 1;
        if (cfg_.trap == TrapMode::population_only) {
            out(last, last) -= kappa_ * rho(last, last);
        } else {
            out.row(last) -= (0.5 * kappa_) * rho.row(last);
            out.col(last) -= (0.5 * kappa_) * rho.col(last);
        }
    }

    void record(const StateMatrix<N>& rho, std::size_t snap, Partial& acc) const {
        const double count = acc.count;
        for (int a = 0; a < n_; ++a) {
            const double p = rho(a, a).real();
            double& mean = acc.mean[static_cast<std::size_t>(a)][snap];
            const double d = p - mean;
            mean += d / count;
            acc.m2[static_cast<std::size_t>(a)][snap] += d * (p - mean);
        }
        acc.states[snap] += rho;
    }

    const McConfig& cfg_;
    const OuSampler& sampler_;
    const SnapshotGrid& grid_;
    int n_;
    double scale_;
    double kappa_;
    FactorMatrix<N> h0_;
};

std::unique_ptr<TrajectoryRunner> make_runner(const ChainSpec& chain, const NoiseSpec& noise,
                                              const McConfig& cfg, const OuSampler& sampler,
                                              const SnapshotGrid& grid) {
    switch (chain.n_sites()) {
    case 2:
        return std::make_unique<FixedRunner<2>>(chain, noise, cfg, sampler, grid);
    case 3:
        return std::make_unique<FixedRunner<3>>(chain, noise, cfg, sampler, grid);
    case 4:
        return std::make_unique<FixedRunner<4>>(chain, noise, cfg, sampler, grid);
    default:
        return std::make_unique<FixedRunner<Eigen::Dynamic>>(chain, noise, cfg, sampler, grid);
    }
}

} // namespace

OuSampler::OuSampler(const NoiseSpec& noise, std::uint64_t master_seed) : master_seed_(master_seed) {
    const int n = noise.n_sites();
    noise.validate(n);
    if (!noise.common_tau_c()) {
        throw SpecError("OU sampler: noise.tau_c must be common to all pairs");
    }
    tau_c_ = noise.tau_c(0, 0);
    covariance_ = noise_covariance(noise);

    const Eigen::SelfAdjointEigenSolver<RealMatrix> eig(covariance_);
    const RealVector lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-10) {
        std::ostringstream msg;
        msg << "noise covariance is not positive semidefinite (eigenvalue " << lambda.minCoeff()
            << ")";
        throw SpecError(msg.str());
    }
    const RealMatrix root = eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    // root root^T = Sigma; the R factor of root^T gives the triangular form.
    const Eigen::HouseholderQR<RealMatrix> qr(root.transpose());
    factor_ = qr.matrixQR().triangularView<Eigen::Upper>().toDenseMatrix().transpose();
}

std::uint64_t OuSampler::trajectory_seed(std::uint64_t index) const noexcept {
    return splitmix64(splitmix64(master_seed_) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

RealMatrix sample_noise_path(const OuSampler& sampler, std::uint64_t trajectory_seed, double h,
                             double t_max) {
    if (!(h > 0.0)) {
        throw SpecError("sample_noise_path: h must be > 0");
    }
    if (sampler.dim() > kMaxSites) {
        throw SpecError("sample_noise_path: at most 8 sites are supported");
    }
    const auto steps = static_cast<Eigen::Index>(std::ceil(std::max(0.0, t_max) / h - 1e-9));
    RealMatrix path(sampler.dim(), steps + 1);
    OuStream<Eigen::Dynamic> stream(sampler, trajectory_seed, h);
    path.col(0) = stream.value();
    for (Eigen::Index k = 1; k <= steps; ++k) {
        stream.advance();
        path.col(k) = stream.value();
    }
    return path;
}

McEstimate mc_average(const ChainSpec& chain, const NoiseSpec& noise, const McConfig& cfg) {
    chain.validate();
    const int n = chain.n_sites();
    noise.validate(n);
    if (n > kMaxSites) {
        throw SpecError("mc_average: at most 8 sites are supported");
    }
    if (cfg.n_traj < 2) {
        throw SpecError("mc_average: n_traj must be >= 2");
    }
    if (!(cfg.step > 0.0) || !(cfg.t_max > 0.0) || cfg.snapshot_stride < 1) {
        throw SpecError("mc_average: step, t_max and snapshot_stride must be positive");
    }
    if (cfg.initial_site < 0 || cfg.initial_site >= n) {
        throw SpecError("mc_average: initial site out of range");
    }
    const OuSampler sampler(noise, cfg.seed);
    const SnapshotGrid grid(cfg);
    const auto runner = make_runner(chain, noise, cfg, sampler, grid);
    const std::size_t snapshots = grid.size();

    // Fixed blocks of trajectories, folded in block order: the sums do not
    // depend on the number of workers.
    const int blocks = (cfg.n_traj + kBlockSize - 1) / kBlockSize;
    Partial total(n, snapshots);
    std::vector<std::optional<Partial>> pending(static_cast<std::size_t>(blocks));
    int next_fold = 0;
    std::atomic<int> next_block{0};
    std::mutex mutex;
    std::exception_ptr failure;

    auto worker = [&] {
        for (;;) {
            const int b = next_block.fetch_add(1);
            if (b >= blocks) {
                return;
            }
            Partial part(n, snapshots);
            try {
                const int end = std::min(cfg.n_traj, (b + 1) * kBlockSize);
                for (int i = b * kBlockSize; i < end; ++i) {
                    runner->run(static_cast<std::uint64_t>(i), part);
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next_block.store(blocks);
                return;
            }
            const std::lock_guard<std::mutex> lock(mutex);
            pending[static_cast<std::size_t>(b)] = std::move(part);
            while (next_fold < blocks && pending[static_cast<std::size_t>(next_fold)]) {
                total.absorb(*pending[static_cast<std::size_t>(next_fold)]);
                pending[static_cast<std::size_t>(next_fold)].reset();
                ++next_fold;
            }
        }
    };

    const int jobs = std::max(1, std::min(cfg.jobs, blocks));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    McEstimate out;
    out.n_traj = cfg.n_traj;
    const double count = cfg.n_traj;
    out.times.reserve(snapshots);
    out.times.push_back(0.0);
    for (const long long s : grid.steps) {
        out.times.push_back(static_cast<double>(s) * cfg.step);
    }
    out.mean_populations.assign(static_cast<std::size_t>(n), std::vector<double>(snapshots));
    out.stderr_populations = out.mean_populations;
    for (std::size_t a = 0; a < static_cast<std::size_t>(n); ++a) {
        for (std::size_t k = 0; k < snapshots; ++k) {
            const double var = total.m2[a][k] / (count - 1.0);
            out.mean_populations[a][k] = total.mean[a][k];
            out.stderr_populations[a][k] = std::sqrt(var / count);
        }
    }
    out.mean_states.reserve(snapshots);
    for (auto& s : total.states) {
        out.mean_states.push_back(s / count);
    }
    return out;
}

} // namespace qet
