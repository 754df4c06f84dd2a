// model.hpp — Chain and noise specifications, system Hamiltonian, initial states

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace qet {

using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

// Raised for malformed or inconsistent model input.
class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Raised when a propagation produces non-finite values or violates a
// numerical precondition.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Single-excitation chain. All quantities are in units of the fluctuation
// amplitude (Delta = 1), hbar = 1. Sites are 0-based in the C++ API.
struct ChainSpec {
    RealVector omega;   // site frequencies
    RealMatrix v;       // symmetric couplings, zero diagonal
    double kappa{0.0};  // trap rate on the last site

    int n_sites() const noexcept { return static_cast<int>(omega.size()); }

    // Throws SpecError on any violated invariant.
    void validate() const;

    // Linear chain with uniform nearest-neighbour coupling.
    static ChainSpec nearest_neighbor(const RealVector& omega, double coupling, double kappa);

    bool operator==(const ChainSpec& other) const;
};

// Spatio-temporal noise correlations <f_n(0) f_m(t)> = c_nm delta_nm^2 exp(-|t|/tau_nm).
struct NoiseSpec {
    RealMatrix c;           // spatial correlation, unit diagonal, entries in [-1, 1]
    RealMatrix delta;       // fluctuation amplitudes
    RealMatrix tau_c;       // correlation times
    double epsilon_sq{0.0}; // weight of the second-order cumulant

    int n_sites() const noexcept { return static_cast<int>(c.rows()); }

    void validate(int n_sites) const;

    // Same delta and tau_c for every pair, c = identity.
    static NoiseSpec homogeneous(int n_sites, double delta, double tau_c, double epsilon_sq);

    // Two-site helper: homogeneous amplitudes with c_12 = c_21 = c12.
    static NoiseSpec two_site(double c12, double delta, double tau_c, double epsilon_sq);

    void set_correlation(int n, int m, double value);

    // True when every tau_c entry equals tau_c(0, 0).
    bool common_tau_c() const;

    bool operator==(const NoiseSpec& other) const;
};

struct SpectralDecomposition {
    RealVector eigenvalues;   // ascending
    RealMatrix eigenvectors;  // orthonormal columns

    static SpectralDecomposition of(const RealMatrix& symmetric);

    RealMatrix reconstruct() const;
    double reconstruction_error(const RealMatrix& original) const;
    double orthonormality_error() const;
};

// Hermitian N x N state of the single-excitation manifold. Trace may be
// below one; 1 - trace is the trapped population.
class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(ComplexMatrix elements);

    int dim() const noexcept { return static_cast<int>(elements_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return elements_; }

    double trace() const;
    double population(int site) const { return elements_(site, site).real(); }
    double hermiticity_error() const;
    double min_eigenvalue() const;

private:
    ComplexMatrix elements_;
};

RealMatrix build_h0(const ChainSpec& spec);

// |site><site|, 0-based site index.
DensityMatrix initial_excitation(int site, int dim);

struct CovarianceReport {
    bool checked{false};       // false when tau_c differs between pairs
    bool is_realizable{false}; // all eigenvalues >= -1e-10
    RealVector eigenvalues;    // of Sigma_nm = c_nm delta_nm^2, ascending
};

CovarianceReport validate_covariance(const NoiseSpec& noise);

// Sigma_nm = c_nm delta_nm^2.
RealMatrix noise_covariance(const NoiseSpec& noise);

} // namespace qet
