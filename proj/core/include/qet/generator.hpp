// generator.hpp — Common interface for time-dependent linear master-equation generators

#pragma once

#include "qet/model.hpp"

#include <limits>

namespace qet {

// How population leaves the chain at the last site.
enum class TrapMode {
    population_only, // d rho_NN/dt gets -kappa rho_NN, nothing else
    lindblad_trap,   // -(kappa/2) {|N><N|, rho}
};

const char* to_string(TrapMode mode) noexcept;
TrapMode trap_mode_from_string(const std::string& name);

// Adds the trap contribution for the last site to `out`.
void add_trap(TrapMode mode, double kappa, const ComplexMatrix& rho, ComplexMatrix& out);

// A linear map rho -> d rho/dt that may depend on time.
class Generator {
public:
    virtual ~Generator() = default;

    virtual int dim() const = 0;
    virtual ComplexMatrix apply(double t, const ComplexMatrix& rho) const = 0;

    // apply(t, .) is the same linear map for every t >= stationary_after().
    virtual double stationary_after() const { return std::numeric_limits<double>::infinity(); }
};

} // namespace qet
