// test_model.cpp — Chain and noise validation, H0 construction, spectral checks

#include "qet/model.hpp"

#include <gtest/gtest.h>

#include <random>

namespace qet {
namespace {

ChainSpec three_site() {
    return ChainSpec::nearest_neighbor((RealVector(3) << 1.5, 1.2, 1.0).finished(), 0.1, 0.005);
}

TEST(ChainSpec, NearestNeighborFillsOnlyAdjacentPairs) {
    const auto chain = three_site();
    EXPECT_DOUBLE_EQ(chain.v(0, 1), 0.1);
    EXPECT_DOUBLE_EQ(chain.v(1, 2), 0.1);
    EXPECT_DOUBLE_EQ(chain.v(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(chain.v(2, 1), chain.v(1, 2));
    EXPECT_NO_THROW(chain.validate());
}

TEST(ChainSpec, RejectsInvalidInput) {
    auto single = ChainSpec{RealVector::Ones(1), RealMatrix::Zero(1, 1), 0.0};
    EXPECT_THROW(single.validate(), SpecError);

    auto asym = three_site();
    asym.v(0, 1) = 0.2;
    EXPECT_THROW(asym.validate(), SpecError);

    auto diag = three_site();
    diag.v(1, 1) = 0.1;
    EXPECT_THROW(diag.validate(), SpecError);

    auto neg_kappa = three_site();
    neg_kappa.kappa = -1.0;
    EXPECT_THROW(neg_kappa.validate(), SpecError);

    auto nan_omega = three_site();
    nan_omega.omega(0) = std::nan("");
    EXPECT_THROW(nan_omega.validate(), SpecError);

    auto wrong_shape = three_site();
    wrong_shape.v = RealMatrix::Zero(2, 2);
    EXPECT_THROW(wrong_shape.validate(), SpecError);
}

TEST(NoiseSpec, RejectsInvalidInput) {
    auto noise = NoiseSpec::homogeneous(3, 1.0, 1.0, 0.1);
    EXPECT_NO_THROW(noise.validate(3));
    EXPECT_THROW(noise.validate(2), SpecError);

    auto out_of_range = noise;
    out_of_range.c(0, 1) = out_of_range.c(1, 0) = 1.5;
    EXPECT_THROW(out_of_range.validate(3), SpecError);

    auto bad_diag = noise;
    bad_diag.c(1, 1) = 0.5;
    EXPECT_THROW(bad_diag.validate(3), SpecError);

    auto bad_tau = noise;
    bad_tau.tau_c(0, 0) = 0.0;
    EXPECT_THROW(bad_tau.validate(3), SpecError);

    auto bad_eps = noise;
    bad_eps.epsilon_sq = -0.1;
    EXPECT_THROW(bad_eps.validate(3), SpecError);
}

TEST(NoiseSpec, SetCorrelationIsSymmetric) {
    auto noise = NoiseSpec::homogeneous(3, 1.0, 1.0, 0.1);
    noise.set_correlation(0, 2, -0.5);
    EXPECT_DOUBLE_EQ(noise.c(2, 0), -0.5);
    EXPECT_TRUE(noise.common_tau_c());
    noise.tau_c(0, 1) = noise.tau_c(1, 0) = 2.0;
    EXPECT_FALSE(noise.common_tau_c());
}

TEST(BuildH0, DiagonalIsOmegaOffDiagonalIsV) {
    const auto chain = three_site();
    const auto h0 = build_h0(chain);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(h0(i, i), chain.omega(i));
        for (int j = 0; j < 3; ++j) {
            if (i != j) {
                EXPECT_DOUBLE_EQ(h0(i, j), chain.v(i, j));
            }
        }
    }
}

TEST(BuildH0, TwoSiteSpectrumMatchesQuadraticFormula) {
    const auto chain = ChainSpec::nearest_neighbor((RealVector(2) << 1.5, 0.5).finished(), 0.1, 0.0);
    const auto sd = SpectralDecomposition::of(build_h0(chain));
    const double mean = 1.0;
    const double half_mu = 0.5 * std::sqrt(1.0 + 4.0 * 0.01);
    EXPECT_NEAR(sd.eigenvalues(0), mean - half_mu, 1e-14);
    EXPECT_NEAR(sd.eigenvalues(1), mean + half_mu, 1e-14);
}

TEST(SpectralDecomposition, RandomSymmetricMatricesReconstruct) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 7;
        RealMatrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                a(i, j) = a(j, i) = u(rng);
            }
        }
        const auto sd = SpectralDecomposition::of(a);
        EXPECT_LT(sd.reconstruction_error(a), 1e-12);
        EXPECT_LT(sd.orthonormality_error(), 1e-12);
        for (int k = 1; k < n; ++k) {
            EXPECT_LE(sd.eigenvalues(k - 1), sd.eigenvalues(k));
        }
    }
}

TEST(DensityMatrix, InitialExcitationIsPurePopulation) {
    const auto rho = initial_excitation(1, 3);
    EXPECT_DOUBLE_EQ(rho.trace(), 1.0);
    EXPECT_DOUBLE_EQ(rho.population(1), 1.0);
    EXPECT_DOUBLE_EQ(rho.population(0), 0.0);
    EXPECT_DOUBLE_EQ(rho.hermiticity_error(), 0.0);
    EXPECT_NEAR(rho.min_eigenvalue(), 0.0, 1e-15);
    EXPECT_THROW(initial_excitation(3, 3), SpecError);
}

TEST(DensityMatrix, HermiticityErrorDetectsAsymmetry) {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    m(0, 1) = Complex(0.0, 0.1);
    m(1, 0) = Complex(0.0, 0.1);
    EXPECT_NEAR(DensityMatrix(m).hermiticity_error(), 0.2, 1e-15);
    EXPECT_THROW(DensityMatrix(ComplexMatrix::Zero(2, 3)), SpecError);
}

TEST(Covariance, AntiFerromagneticPatternIsRealizable) {
    auto noise = NoiseSpec::homogeneous(3, 1.0, 0.3, 0.1);
    noise.set_correlation(0, 1, -1.0);
    noise.set_correlation(1, 2, -1.0);
    noise.set_correlation(0, 2, 1.0);
    const auto report = validate_covariance(noise);
    EXPECT_TRUE(report.checked);
    EXPECT_TRUE(report.is_realizable);
    EXPECT_NEAR(report.eigenvalues(0), 0.0, 1e-12);
}

TEST(Covariance, AllPairsAntiCorrelatedIsNotRealizable) {
    auto noise = NoiseSpec::homogeneous(3, 1.0, 0.3, 0.1);
    noise.c = RealMatrix::Constant(3, 3, -1.0);
    noise.c.diagonal().setOnes();
    const auto report = validate_covariance(noise);
    EXPECT_TRUE(report.checked);
    EXPECT_FALSE(report.is_realizable);
    // Eigenvalues of I - (J - I): 3 - 3 = -1 once and 2 twice.
    EXPECT_NEAR(report.eigenvalues(0), -1.0, 1e-12);
}

TEST(Covariance, MixedCorrelationTimesAreNotChecked) {
    auto noise = NoiseSpec::homogeneous(2, 1.0, 1.0, 0.1);
    noise.tau_c(0, 1) = noise.tau_c(1, 0) = 2.0;
    EXPECT_FALSE(validate_covariance(noise).checked);
}

TEST(Covariance, ScalesWithAmplitudeSquared) {
    auto noise = NoiseSpec::two_site(0.5, 2.0, 1.0, 0.1);
    const auto sigma = noise_covariance(noise);
    EXPECT_DOUBLE_EQ(sigma(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(sigma(0, 1), 2.0);
}

} // namespace
} // namespace qet
