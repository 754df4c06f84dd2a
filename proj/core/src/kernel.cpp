#include "qet/kernel.hpp"

#include <cmath>

namespace qet {

KernelParams KernelParams::of(const NoiseSpec& noise, int n, int m) {
    const double d = noise.delta(n, m);
    return {noise.c(n, m) * d * d, 1.0 / noise.tau_c(n, m)};
}

double KernelParams::at(double t) const {
    return amplitude_sq * std::exp(-std::abs(t) * rate);
}

double correlation(const NoiseSpec& noise, int n, int m, double t) {
    return KernelParams::of(noise, n, m).at(t);
}

double phi_difference(const NoiseSpec& noise, double t) {
    if (noise.n_sites() != 2) {
        throw SpecError("phi_difference: two-site noise spec required");
    }
    return correlation(noise, 0, 0, t) + correlation(noise, 1, 1, t) -
           correlation(noise, 0, 1, t) - correlation(noise, 1, 0, t);
}

Complex gamma_integral(double rate, double gap, double t) {
    const Complex z(rate, gap);
    if (t <= 0.0) {
        return {0.0, 0.0};
    }
    if (rate * t > kStationaryDecayExponent) {
        return 1.0 / z;
    }
    // 1 - exp(-(a + ib)) written without cancellation for small a, b.
    const double a = rate * t;
    const double b = gap * t;
    const double half_sin = std::sin(0.5 * b);
    const double re = 2.0 * half_sin * half_sin - std::cos(b) * std::expm1(-a);
    const double im = std::exp(-a) * std::sin(b);
    return Complex(re, im) / z;
}

} // namespace qet
