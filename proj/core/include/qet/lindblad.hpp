// lindblad.hpp — Born-Markov coefficients and the white-noise (Lindblad) limit

#pragma once

#include "qet/generator.hpp"
#include "qet/model.hpp"

namespace qet {

// t -> infinity limits of the two-site coefficients for homogeneous noise,
// plus the white-noise dephasing rate.
struct MarkovCoefficients {
    Complex f1_inf;
    double f2_inf{0.0};
    double gamma{0.0}; // lim_{tau_c -> 0} F2(inf) at fixed delta^2 tau_c
};

// Homogeneous two-site parameters (amplitude delta, correlation time tau_c,
// spatial correlation c). The uncorrelated closed forms are scaled by the
// multiplicity (1 - c) of the site-difference correlation.
MarkovCoefficients markov_coefficients(double omega1, double omega2, double v12, double delta,
                                       double tau_c, double c);

// -i[H0, rho] + (gamma/2) sum_m (2 A_m rho A_m - A_m A_m rho - rho A_m A_m) + Trap(rho)
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const RealMatrix& h0, double gamma,
                           double kappa, TrapMode trap = TrapMode::population_only);

class LindbladGenerator final : public Generator {
public:
    LindbladGenerator(ChainSpec chain, double gamma, TrapMode trap = TrapMode::population_only);

    int dim() const override { return chain_.n_sites(); }
    ComplexMatrix apply(double t, const ComplexMatrix& rho) const override;
    double stationary_after() const override { return 0.0; }

    double gamma() const noexcept { return gamma_; }

private:
    ChainSpec chain_;
    RealMatrix h0_;
    double gamma_;
    TrapMode trap_;
};

// Effective dephasing rate of the Lindblad engine matching a TCL2 run with
// the given noise in the white-noise limit: eps^2 (1 - c_12) 2 delta^2 tau_c.
double white_noise_rate(const NoiseSpec& noise);

// Two-site population transfer rate after adiabatic elimination of the
// coherence under pure dephasing gamma: k = 2 V^2 gamma / (gamma^2 + (w1 - w2)^2).
// d(rho_11 - rho_22)/dt = -2 k (rho_11 - rho_22) + kappa rho_22.
double dephasing_transfer_rate(double omega1, double omega2, double v12, double gamma);

} // namespace qet
