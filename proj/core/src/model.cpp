#include "qet/model.hpp"

#include <cmath>
#include <string>

namespace qet {

namespace {

bool is_symmetric(const RealMatrix& m) {
    return m.rows() == m.cols() && m == m.transpose();
}

std::string dims(const RealMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

// ---------------------------------------------------------------- ChainSpec

void ChainSpec::validate() const {
    const auto n = omega.size();
    if (n < 2) {
        throw SpecError("chain: at least two sites are required, got " + std::to_string(n));
    }
    if (v.rows() != n || v.cols() != n) {
        throw SpecError("chain: coupling matrix is " + dims(v) + " but omega has " +
                        std::to_string(n) + " entries");
    }
    if (!is_symmetric(v)) {
        throw SpecError("chain: coupling matrix must be symmetric");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (v(i, i) != 0.0) {
            throw SpecError("chain: coupling matrix must have a zero diagonal");
        }
    }
    if (!omega.allFinite() || !v.allFinite()) {
        throw SpecError("chain: non-finite frequency or coupling");
    }
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
        throw SpecError("chain: trap rate kappa must be finite and >= 0");
    }
}

ChainSpec ChainSpec::nearest_neighbor(const RealVector& omega, double coupling, double kappa) {
    const auto n = omega.size();
    ChainSpec spec;
    spec.omega = omega;
    spec.v = RealMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        spec.v(i, i + 1) = coupling;
        spec.v(i + 1, i) = coupling;
    }
    spec.kappa = kappa;
    return spec;
}

bool ChainSpec::operator==(const ChainSpec& other) const {
    return omega.size() == other.omega.size() && omega == other.omega &&
           v.rows() == other.v.rows() && v == other.v && kappa == other.kappa;
}

// ---------------------------------------------------------------- NoiseSpec

void NoiseSpec::validate(int n) const {
    for (const auto* m : {&c, &delta, &tau_c}) {
        if (m->rows() != n || m->cols() != n) {
            throw SpecError("noise: matrices must be " + std::to_string(n) + "x" +
                            std::to_string(n) + ", got " + dims(*m));
        }
        if (!is_symmetric(*m)) {
            throw SpecError("noise: c, delta and tau_c must be symmetric");
        }
        if (!m->allFinite()) {
            throw SpecError("noise: non-finite entry");
        }
    }
    for (int i = 0; i < n; ++i) {
        if (c(i, i) != 1.0) {
            throw SpecError("noise: c must have a unit diagonal");
        }
        for (int j = 0; j < n; ++j) {
            if (c(i, j) < -1.0 || c(i, j) > 1.0) {
                throw SpecError("noise: c[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) +
                                "] outside [-1, 1]");
            }
            if (!(delta(i, j) > 0.0)) {
                throw SpecError("noise: delta entries must be > 0");
            }
            if (!(tau_c(i, j) > 0.0)) {
                throw SpecError("noise: tau_c entries must be > 0");
            }
        }
    }
    if (!(epsilon_sq >= 0.0) || !std::isfinite(epsilon_sq)) {
        throw SpecError("noise: epsilon_sq must be finite and >= 0");
    }
}

NoiseSpec NoiseSpec::homogeneous(int n, double delta, double tau_c, double epsilon_sq) {
    NoiseSpec spec;
    spec.c = RealMatrix::Identity(n, n);
    spec.delta = RealMatrix::Constant(n, n, delta);
    spec.tau_c = RealMatrix::Constant(n, n, tau_c);
    spec.epsilon_sq = epsilon_sq;
    return spec;
}

NoiseSpec NoiseSpec::two_site(double c12, double delta, double tau_c, double epsilon_sq) {
    auto spec = homogeneous(2, delta, tau_c, epsilon_sq);
    spec.set_correlation(0, 1, c12);
    return spec;
}

void NoiseSpec::set_correlation(int n, int m, double value) {
    c(n, m) = value;
    c(m, n) = value;
}

bool NoiseSpec::common_tau_c() const {
    return tau_c.size() > 0 && (tau_c.array() == tau_c(0, 0)).all();
}

bool NoiseSpec::operator==(const NoiseSpec& other) const {
    return c.rows() == other.c.rows() && c == other.c && delta == other.delta &&
           tau_c == other.tau_c && epsilon_sq == other.epsilon_sq;
}

// ---------------------------------------------------- SpectralDecomposition

SpectralDecomposition SpectralDecomposition::of(const RealMatrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigen decomposition of H0 failed");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

RealMatrix SpectralDecomposition::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

double SpectralDecomposition::reconstruction_error(const RealMatrix& original) const {
    return (original - reconstruct()).cwiseAbs().maxCoeff();
}

double SpectralDecomposition::orthonormality_error() const {
    const auto n = eigenvectors.cols();
    return (eigenvectors.transpose() * eigenvectors - RealMatrix::Identity(n, n))
        .cwiseAbs()
        .maxCoeff();
}

// ------------------------------------------------------------ DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix elements) : elements_(std::move(elements)) {
    if (elements_.rows() != elements_.cols()) {
        throw SpecError("density matrix must be square");
    }
}

double DensityMatrix::trace() const {
    return elements_.diagonal().real().sum();
}

double DensityMatrix::hermiticity_error() const {
    return (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(elements_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// --------------------------------------------------------------- operations

RealMatrix build_h0(const ChainSpec& spec) {
    const auto n = spec.omega.size();
    if (spec.v.rows() != n || spec.v.cols() != n) {
        throw SpecError("build_h0: coupling matrix is " + dims(spec.v) + " but omega has " +
                        std::to_string(n) + " entries");
    }
    RealMatrix h = RealMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) = spec.omega(i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            h(i, j) = spec.v(i, j);
            h(j, i) = spec.v(i, j);
        }
    }
    return h;
}

DensityMatrix initial_excitation(int site, int dim) {
    if (dim < 1 || site < 0 || site >= dim) {
        throw SpecError("initial_excitation: site " + std::to_string(site + 1) +
                        " out of range 1.." + std::to_string(dim));
    }
    ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
    rho(site, site) = 1.0;
    return DensityMatrix(std::move(rho));
}

RealMatrix noise_covariance(const NoiseSpec& noise) {
    return noise.c.cwiseProduct(noise.delta.cwiseProduct(noise.delta));
}

CovarianceReport validate_covariance(const NoiseSpec& noise) {
    CovarianceReport report;
    if (!noise.common_tau_c()) {
        return report;
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(noise_covariance(noise),
                                                     Eigen::EigenvaluesOnly);
    report.checked = true;
    report.eigenvalues = solver.eigenvalues();
    report.is_realizable = report.eigenvalues.minCoeff() >= -1e-10;
    return report;
}

} // namespace qet
