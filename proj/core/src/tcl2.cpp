#include "qet/tcl2.hpp"

#include "qet/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace qet {

namespace {

constexpr Complex kI{0.0, 1.0};

// [A_n, X] with A_n = |n><n|: row n of X minus column n of X.
void subtract_projector_commutator(int n, const ComplexMatrix& x, double scale, ComplexMatrix& out) {
    out.row(n) -= scale * x.row(n);
    out.col(n) += scale * x.col(n);
}

} // namespace

// ------------------------------------------------------------ Tcl2Generator

Tcl2Generator::Tcl2Generator(ChainSpec chain, NoiseSpec noise, TrapMode trap)
    : chain_(std::move(chain)), noise_(std::move(noise)), trap_(trap) {
    chain_.validate();
    const int n = chain_.n_sites();
    noise_.validate(n);

    h0_ = build_h0(chain_);
    spectral_ = SpectralDecomposition::of(h0_);

    const auto& u = spectral_.eigenvectors;
    projectors_.reserve(n);
    for (int site = 0; site < n; ++site) {
        // U^T |n><n| U = outer product of row n of U.
        projectors_.push_back(u.row(site).transpose() * u.row(site));
    }

    const auto& lambda = spectral_.eigenvalues;
    gaps_ = lambda.replicate(1, n) - lambda.transpose().replicate(n, 1);

    weights_ = noise_covariance(noise_);
    rate_index_.assign(static_cast<std::size_t>(n * n), 0);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const double rate = 1.0 / noise_.tau_c(a, b);
            auto it = std::find(rates_.begin(), rates_.end(), rate);
            if (it == rates_.end()) {
                rates_.push_back(rate);
                it = rates_.end() - 1;
            }
            rate_index_[static_cast<std::size_t>(a * n + b)] = static_cast<int>(it - rates_.begin());
        }
    }
    const double slowest = *std::min_element(rates_.begin(), rates_.end());
    stationary_after_ = stationary_time(slowest);
}

std::vector<ComplexMatrix> Tcl2Generator::dissipator_operators(double t) const {
    const int n = dim();
    std::vector<ComplexMatrix> kernels;
    kernels.reserve(rates_.size());
    for (double rate : rates_) {
        ComplexMatrix g(n, n);
        for (int a = 0; a < n; ++a) {
            for (int b = 0; b < n; ++b) {
                g(a, b) = gamma_integral(rate, gaps_(a, b), t);
            }
        }
        kernels.push_back(std::move(g));
    }

    const auto& u = spectral_.eigenvectors;
    std::vector<ComplexMatrix> ops;
    ops.reserve(static_cast<std::size_t>(n));
    for (int site = 0; site < n; ++site) {
        ComplexMatrix b_eig = ComplexMatrix::Zero(n, n);
        for (int m = 0; m < n; ++m) {
            const double w = weights_(site, m);
            if (w == 0.0) {
                continue;
            }
            const auto& g = kernels[static_cast<std::size_t>(rate_index_[static_cast<std::size_t>(site * n + m)])];
            b_eig += w * projectors_[static_cast<std::size_t>(m)].cast<Complex>().cwiseProduct(g);
        }
        ops.push_back(u * b_eig * u.transpose());
    }
    return ops;
}

ComplexMatrix Tcl2Generator::dissipator(double t, const ComplexMatrix& rho) const {
    const int n = dim();
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    if (t <= 0.0 || noise_.epsilon_sq == 0.0) {
        return out;
    }
    const auto ops = dissipator_operators(t);
    for (int site = 0; site < n; ++site) {
        const auto& b = ops[static_cast<std::size_t>(site)];
        const ComplexMatrix inner = b * rho - rho * b;
        subtract_projector_commutator(site, inner, noise_.epsilon_sq, out);
    }
    return out;
}

ComplexMatrix Tcl2Generator::apply(double t, const ComplexMatrix& rho) const {
    if (rho.rows() != dim() || rho.cols() != dim()) {
        throw SpecError("tcl2: density matrix dimension does not match the chain");
    }
    if (t < 0.0) {
        throw SpecError("tcl2: generator evaluated at negative time");
    }
    const ComplexMatrix h = h0_.cast<Complex>();
    ComplexMatrix out = -kI * (h * rho - rho * h);
    add_trap(trap_, chain_.kappa, rho, out);
    out += dissipator(t, rho);
    return out;
}

// --------------------------------------------------------- two-site closed form

TwoSiteCoefficients two_site_coefficients(double omega1, double omega2, double v12,
                                          const NoiseSpec& noise, double t) {
    if (noise.n_sites() != 2) {
        throw SpecError("two-site coefficients need a two-site noise spec");
    }
    const double detuning = omega1 - omega2;
    TwoSiteCoefficients out;
    out.mu = std::sqrt(detuning * detuning + 4.0 * v12 * v12);
    if (out.mu == 0.0 || t <= 0.0) {
        return out;
    }
    const double ratio = detuning / out.mu;
    const double ratio_sq = ratio * ratio;

    // phi(s) = C11 + C22 - C12 - C21, each a signed exponential.
    const std::array<std::pair<int, int>, 4> pairs{{{0, 0}, {1, 1}, {0, 1}, {1, 0}}};
    const std::array<double, 4> signs{1.0, 1.0, -1.0, -1.0};
    double flat = 0.0; // int phi
    double cosine = 0.0;
    double sine = 0.0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto kp = KernelParams::of(noise, pairs[k].first, pairs[k].second);
        const double w = signs[k] * kp.amplitude_sq;
        if (w == 0.0) {
            continue;
        }
        const Complex g0 = gamma_integral(kp.rate, 0.0, t);
        const Complex gm = gamma_integral(kp.rate, out.mu, t);
        flat += w * g0.real();
        cosine += w * gm.real();
        sine -= w * gm.imag();
    }
    out.f1 = -Complex(v12 * detuning / (out.mu * out.mu) * (flat - cosine), v12 / out.mu * sine);
    out.f2 = ratio_sq * flat + (1.0 - ratio_sq) * cosine;
    return out;
}

Complex f1_coefficient(double omega1, double omega2, double v12, const NoiseSpec& noise, double t) {
    return two_site_coefficients(omega1, omega2, v12, noise, t).f1;
}

double f2_coefficient(double omega1, double omega2, double v12, const NoiseSpec& noise, double t) {
    return two_site_coefficients(omega1, omega2, v12, noise, t).f2;
}

ComplexMatrix two_site_rhs(double t, const ComplexMatrix& rho, const ChainSpec& chain,
                           const NoiseSpec& noise) {
    if (chain.n_sites() != 2 || rho.rows() != 2 || rho.cols() != 2) {
        throw SpecError("two_site_rhs: requires exactly two sites");
    }
    const double w1 = chain.omega(0);
    const double w2 = chain.omega(1);
    const double v = chain.v(0, 1);
    const auto coeff = two_site_coefficients(w1, w2, v, noise, t);
    const double eps2 = noise.epsilon_sq;

    const Complex r11 = rho(0, 0);
    const Complex r12 = rho(0, 1);
    const Complex r21 = rho(1, 0);
    const Complex r22 = rho(1, 1);
    const Complex imbalance = r11 - r22;

    ComplexMatrix d(2, 2);
    d(0, 0) = -kI * v * (-r12 + r21);
    d(0, 1) = -kI * (v * (-r11 + r22) + (w1 - w2) * r12) - eps2 * (coeff.f1 * imbalance + coeff.f2 * r12);
    d(1, 0) = -kI * (v * (r11 - r22) - (w1 - w2) * r21) -
              eps2 * (std::conj(coeff.f1) * imbalance + coeff.f2 * r21);
    d(1, 1) = -kI * v * (r12 - r21) - chain.kappa * r22;
    return d;
}

TwoSiteGenerator::TwoSiteGenerator(ChainSpec chain, NoiseSpec noise)
    : chain_(std::move(chain)), noise_(std::move(noise)) {
    chain_.validate();
    if (chain_.n_sites() != 2) {
        throw SpecError("two-site generator: chain must have two sites");
    }
    noise_.validate(2);
    stationary_after_ = stationary_time(1.0 / noise_.tau_c.maxCoeff());
}

ComplexMatrix TwoSiteGenerator::apply(double t, const ComplexMatrix& rho) const {
    return two_site_rhs(t, rho, chain_, noise_);
}

// ------------------------------------------------------------------ trap

const char* to_string(TrapMode mode) noexcept {
    switch (mode) {
    case TrapMode::population_only:
        return "population_only";
    case TrapMode::lindblad_trap:
        return "lindblad_trap";
    }
    return "population_only";
}

TrapMode trap_mode_from_string(const std::string& name) {
    if (name == "population_only") {
        return TrapMode::population_only;
    }
    if (name == "lindblad_trap") {
        return TrapMode::lindblad_trap;
    }
    throw SpecError("unknown trap mode '" + name + "' (expected population_only or lindblad_trap)");
}

void add_trap(TrapMode mode, double kappa, const ComplexMatrix& rho, ComplexMatrix& out) {
    if (kappa == 0.0) {
        return;
    }
    const auto last = rho.rows() - 1;
    if (mode == TrapMode::population_only) {
        out(last, last) -= kappa * rho(last, last);
        return;
    }
    out.row(last) -= 0.5 * kappa * rho.row(last);
    out.col(last) -= 0.5 * kappa * rho.col(last);
}

} // namespace qet
