#include "qet/lindblad.hpp"

#include <cmath>

namespace qet {

MarkovCoefficients markov_coefficients(double omega1, double omega2, double v12, double delta,
                                       double tau_c, double c) {
    const double detuning = omega1 - omega2;
    const double mu_sq = detuning * detuning + 4.0 * v12 * v12;
    const double multiplicity = 1.0 - c;
    const double scale = 2.0 * delta * delta * multiplicity;
    const double denom = 1.0 + mu_sq * tau_c * tau_c;

    MarkovCoefficients out;
    if (mu_sq == 0.0) {
        return out;
    }
    const double ratio_sq = detuning * detuning / mu_sq;
    out.f1_inf = -scale * Complex(v12 * detuning * tau_c * tau_c * tau_c / denom,
                                  v12 * tau_c * tau_c / denom);
    out.f2_inf = scale * (tau_c / denom + ratio_sq * mu_sq * tau_c * tau_c * tau_c / denom);
    out.gamma = scale * tau_c;
    return out;
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const RealMatrix& h0, double gamma,
                           double kappa, TrapMode trap) {
    const Complex i{0.0, 1.0};
    const ComplexMatrix h = h0.cast<Complex>();
    ComplexMatrix out = -i * (h * rho - rho * h);
    // Pure dephasing in the site basis damps every coherence at rate gamma.
    const auto n = rho.rows();
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
            if (a != b) {
                out(a, b) -= gamma * rho(a, b);
            }
        }
    }
    add_trap(trap, kappa, rho, out);
    return out;
}

LindbladGenerator::LindbladGenerator(ChainSpec chain, double gamma, TrapMode trap)
    : chain_(std::move(chain)), gamma_(gamma), trap_(trap) {
    chain_.validate();
    if (!(gamma_ >= 0.0)) {
        throw SpecError("lindblad: dephasing rate gamma must be >= 0");
    }
    h0_ = build_h0(chain_);
}

ComplexMatrix LindbladGenerator::apply(double /*t*/, const ComplexMatrix& rho) const {
    return lindblad_rhs(rho, h0_, gamma_, chain_.kappa, trap_);
}

double white_noise_rate(const NoiseSpec& noise) {
    if (noise.n_sites() < 2) {
        throw SpecError("white_noise_rate: need at least two sites");
    }
    const double delta = noise.delta(0, 0);
    return noise.epsilon_sq * (1.0 - noise.c(0, 1)) * 2.0 * delta * delta * noise.tau_c(0, 0);
}

double dephasing_transfer_rate(double omega1, double omega2, double v12, double gamma) {
    const double detuning = omega1 - omega2;
    return 2.0 * v12 * v12 * gamma / (gamma * gamma + detuning * detuning);
}

} // namespace qet
