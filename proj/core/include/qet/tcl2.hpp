// tcl2.hpp — Second-order time-convolutionless generator for correlated dephasing

#pragma once

#include "qet/generator.hpp"
#include "qet/model.hpp"

#include <vector>

namespace qet {

// d rho/dt = -i[H0, rho] + Trap(rho)
//            - eps^2 sum_{n,m} [A_n, [B_nm(t), rho]],
// B_nm(t) = int_0^t C_nm(s) exp(-i H0 s) A_m exp(i H0 s) ds, A_n = |n><n|.
//
// B_nm is assembled in the H0 eigenbasis, where the propagated projector is
// (A_m)_ab exp(-i (l_a - l_b) s) and the time integral is gamma_integral.
class Tcl2Generator final : public Generator {
public:
    Tcl2Generator(ChainSpec chain, NoiseSpec noise, TrapMode trap = TrapMode::population_only);

    int dim() const override { return chain_.n_sites(); }
    ComplexMatrix apply(double t, const ComplexMatrix& rho) const override;
    double stationary_after() const override { return stationary_after_; }

    // sum_m B_nm(t) for each site n, in the site basis (epsilon^2 not included).
    std::vector<ComplexMatrix> dissipator_operators(double t) const;

    // Only the -eps^2 sum [A_n, [B_n, rho]] part.
    ComplexMatrix dissipator(double t, const ComplexMatrix& rho) const;

    const ChainSpec& chain() const noexcept { return chain_; }
    const NoiseSpec& noise() const noexcept { return noise_; }
    TrapMode trap_mode() const noexcept { return trap_; }
    const RealMatrix& h0() const noexcept { return h0_; }
    const SpectralDecomposition& spectral() const noexcept { return spectral_; }

    // Site projectors expressed in the H0 eigenbasis.
    const std::vector<RealMatrix>& projectors() const noexcept { return projectors_; }

private:
    ChainSpec chain_;
    NoiseSpec noise_;
    TrapMode trap_;
    RealMatrix h0_;
    SpectralDecomposition spectral_;
    std::vector<RealMatrix> projectors_;
    RealMatrix gaps_;                 // l_a - l_b
    std::vector<double> rates_;       // distinct 1 / tau_c values
    std::vector<int> rate_index_;     // pair (n, m) -> index into rates_
    RealMatrix weights_;              // c_nm delta_nm^2
    double stationary_after_{0.0};
};

// ------------------------------------------------------- two-site closed form

struct TwoSiteCoefficients {
    double mu{0.0}; // sqrt((w1 - w2)^2 + 4 V^2)
    Complex f1;
    double f2{0.0};
};

// F1(t) = -int_0^t [V (w1 - w2)/mu^2 (1 - cos mu s) + i (V/mu) sin mu s] phi(s) ds
// F2(t) =  int_0^t [((w1 - w2)/mu)^2 + (1 - ((w1 - w2)/mu)^2) cos mu s] phi(s) ds
// with phi the site-difference correlation. The sine term carries the sign
// obtained by reducing the N-site generator to two sites.
TwoSiteCoefficients two_site_coefficients(double omega1, double omega2, double v12,
                                          const NoiseSpec& noise, double t);

Complex f1_coefficient(double omega1, double omega2, double v12, const NoiseSpec& noise, double t);
double f2_coefficient(double omega1, double omega2, double v12, const NoiseSpec& noise, double t);

// The four coupled two-site equations for rho_11, rho_12, rho_21, rho_22,
// trap acting on rho_22 only.
ComplexMatrix two_site_rhs(double t, const ComplexMatrix& rho, const ChainSpec& chain,
                           const NoiseSpec& noise);

class TwoSiteGenerator final : public Generator {
public:
    TwoSiteGenerator(ChainSpec chain, NoiseSpec noise);

    int dim() const override { return 2; }
    ComplexMatrix apply(double t, const ComplexMatrix& rho) const override;
    double stationary_after() const override { return stationary_after_; }

private:
    ChainSpec chain_;
    NoiseSpec noise_;
    double stationary_after_{0.0};
};

} // namespace qet
