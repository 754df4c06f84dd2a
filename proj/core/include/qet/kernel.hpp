// kernel.hpp — Noise correlation functions and closed-form kernel integrals

#pragma once

#include "qet/model.hpp"

namespace qet {

// One exponentially decaying correlation c_nm delta_nm^2 exp(-|t| rate).
// amplitude_sq keeps its sign; anti-correlated pairs contribute negatively.
struct KernelParams {
    double amplitude_sq{0.0};
    double rate{1.0};

    static KernelParams of(const NoiseSpec& noise, int n, int m);

    double at(double t) const;
};

double correlation(const NoiseSpec& noise, int n, int m, double t);

// <(f_1(0) - f_2(0)) (f_1(-t) - f_2(-t))> for a two-site spec.
double phi_difference(const NoiseSpec& noise, double t);

// Beyond rate * t > this the exponential transient is below e^-50 and is
// dropped; kernels are exactly stationary past that point.
inline constexpr double kStationaryDecayExponent = 50.0;

// int_0^t exp(-rate s) exp(-i gap s) ds = (1 - exp(-(rate + i gap) t)) / (rate + i gap).
Complex gamma_integral(double rate, double gap, double t);

// Time after which gamma_integral(rate, ., t) no longer depends on t.
inline double stationary_time(double rate) { return kStationaryDecayExponent / rate; }

} // namespace qet
