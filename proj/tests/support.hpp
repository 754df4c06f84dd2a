// support.hpp — Shared fixtures for the test binaries

#pragma once

#include "qet/model.hpp"

#include <random>

namespace qet::test {

// Two-site chain with omega = (1.5, 0.5), V = 0.1, kappa = 0.005.
inline ChainSpec two_site_chain(double kappa = 0.005) {
    return ChainSpec::nearest_neighbor((RealVector(2) << 1.5, 0.5).finished(), 0.1, kappa);
}

// Three-site chain with omega = (1.5, 1.2, 1.0), V = 0.1, kappa = 0.005.
inline ChainSpec three_site_chain(double v23 = 0.1) {
    auto chain = ChainSpec::nearest_neighbor((RealVector(3) << 1.5, 1.2, 1.0).finished(), 0.1, 0.005);
    chain.v(1, 2) = chain.v(2, 1) = v23;
    return chain;
}

// c12 = c23 = -1, c13 = +1.
inline NoiseSpec anti_ferromagnetic(double tau_c, double epsilon_sq = 0.1) {
    auto noise = NoiseSpec::homogeneous(3, 1.0, tau_c, epsilon_sq);
    noise.set_correlation(0, 1, -1.0);
    noise.set_correlation(1, 2, -1.0);
    noise.set_correlation(0, 2, 1.0);
    return noise;
}

// Random Hermitian matrix with entries in [-1, 1] (not normalized).
inline ComplexMatrix random_hermitian(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = u(rng);
        for (int j = 0; j < i; ++j) {
            m(i, j) = Complex(u(rng), u(rng));
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

// Random density matrix: G G^dagger / trace.
inline ComplexMatrix random_state(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = Complex(g(rng), g(rng));
        }
    }
    ComplexMatrix rho = a * a.adjoint();
    return rho / rho.trace().real();
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

} // namespace qet::test
