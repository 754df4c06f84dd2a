// mc_oracle.hpp — Monte-Carlo average over correlated Ornstein-Uhlenbeck noise paths
//
// Independent check of the TCL2 generator: each trajectory propagates
// rho under -i[H0 + sqrt(eps^2) sum_n f_n(t) |n><n|, rho] + Trap(rho) with
// an explicit stationary Gaussian noise path whose covariance is
// <f_n(0) f_m(t)> = c_nm delta_nm^2 exp(-|t| / tau_c).

#pragma once

#include "qet/generator.hpp"
#include "qet/integrator.hpp"
#include "qet/model.hpp"

#include <cstdint>
#include <vector>

namespace qet {

class OuSampler {
public:
    // Throws SpecError if the covariance is not positive semidefinite
    // (eigenvalue below -1e-10) or tau_c differs between pairs.
    OuSampler(const NoiseSpec& noise, std::uint64_t master_seed);

    int dim() const noexcept { return static_cast<int>(covariance_.rows()); }
    const RealMatrix& covariance() const noexcept { return covariance_; }
    const RealMatrix& factor() const noexcept { return factor_; } // lower triangular, L L^T = Sigma
    double tau_c() const noexcept { return tau_c_; }
    std::uint64_t master_seed() const noexcept { return master_seed_; }

    // Seed of trajectory `index`, a hash of (master_seed, index).
    std::uint64_t trajectory_seed(std::uint64_t index) const noexcept;

private:
    RealMatrix covariance_;
    RealMatrix factor_;
    double tau_c_;
    std::uint64_t master_seed_;
};

// f_n(k h) for k = 0..ceil(t_max / h), one row per site. Stationary start
// and the exact OU update f(t + h) = e^{-h/tau} f(t) + sqrt(1 - e^{-2h/tau}) L xi.
RealMatrix sample_noise_path(const OuSampler& sampler, std::uint64_t trajectory_seed, double h,
                             double t_max);

struct McConfig {
    int n_traj{10000};
    std::uint64_t seed{1};
    double step{0.01};
    double t_max{500.0};
    int snapshot_stride{10};
    int jobs{1};
    TrapMode trap{TrapMode::population_only};
    int initial_site{0};
};

struct McEstimate {
    std::vector<double> times;
    std::vector<std::vector<double>> mean_populations; // [site][snapshot]
    std::vector<std::vector<double>> stderr_populations;
    std::vector<ComplexMatrix> mean_states;
    int n_traj{0};
};

McEstimate mc_average(const ChainSpec& chain, const NoiseSpec& noise, const McConfig& cfg);

} // namespace qet
