#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "alignflow/quadrature_oracle.hpp"
#include "alignflow/spectral.hpp"
#include "test_support.hpp"

using namespace alignflow;
using alignflow::test::kTwoPi;

// c_α from the Gamma duplication form agrees with the reflection form
// α / (2 Γ(1-α) cos(πα/2)).
TEST(KernelConstant, MatchesReflectionForm) {
  for (double alpha : {0.1, 0.3, 0.5, 0.7, 0.9, 1.3, 1.7}) {
    const double other = alpha / (2.0 * std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2));
    EXPECT_NEAR(fractional_kernel_constant(alpha), other, 1e-13 * std::abs(other)) << alpha;
  }
  EXPECT_NEAR(fractional_kernel_constant(1.0), 1.0 / std::numbers::pi, 1e-15);
}

// The symbol of the singular integral at k = 1 is 2 c_α ∫_0^∞ (1 - cos h) h^{-1-α} dh = 1.
TEST(KernelConstant, GivesUnitSymbolByDirectIntegration) {
  for (double alpha : {0.3, 0.5, 0.7}) {
    boost::math::quadrature::tanh_sinh<double> near;
    auto f = [alpha](double h) {
      if (h <= 0.0) return 0.0;
      const double s = std::sin(0.5 * h) / h;
      return 2.0 * s * s * std::pow(h, 1.0 - alpha);
    };
    // Integrate period by period, then add the mean of the remaining tail;
    // the cosine remainder beyond 2π·4000 is below 1e-7.
    double total = near.integrate(f, 0.0, kTwoPi);
    for (int p = 1; p < 4000; ++p) total += near.integrate(f, kTwoPi * p, kTwoPi * (p + 1));
    total += std::pow(kTwoPi * 4000, -alpha) / alpha;
    EXPECT_NEAR(2.0 * fractional_kernel_constant(alpha) * total, 1.0, 1e-6) << alpha;
  }
}

TEST(QuadratureOracle, ConstantFieldGivesZero) {
  SpectralGrid g(32);
  auto r = fractional_laplacian_quadrature(RealField(g, 2.0), 0.5, 100);
  EXPECT_EQ(r.values.max_abs(), 0.0);
  EXPECT_FALSE(r.accuracy_warning);
}

TEST(QuadratureOracle, CosineMatchesSymbolAtTenThousandImages) {
  SpectralGrid g(64);
  auto f = RealField::sample(g, [](double x) { return std::cos(x); });
  auto r = fractional_laplacian_quadrature(f, 0.5, 10000);
  auto spectral = fractional_laplacian(f, 0.5);
  EXPECT_LE(test::max_abs_diff(r.values, spectral), 1e-6 * spectral.max_abs());
  EXPECT_FALSE(r.accuracy_warning);
}

TEST(QuadratureOracle, AgreesWithSpectralOnRandomEightModeFields) {
  SpectralGrid g(128);
  for (double alpha : {0.3, 0.5, 0.7, 1.0}) {
    auto f = test::random_band_limited(g, 8, 100 + static_cast<std::uint32_t>(alpha * 10), 0.5);
    auto r = fractional_laplacian_quadrature(f, alpha, 10000);
    auto spectral = fractional_laplacian(f, alpha);
    EXPECT_LE(test::max_abs_diff(r.values, spectral), 1e-6 * spectral.max_abs()) << alpha;
  }
}

TEST(QuadratureOracle, WorksOnNonStandardPeriod) {
  SpectralGrid g(64, 3.0);
  auto f = test::random_band_limited(g, 6, 5);
  auto r = fractional_laplacian_quadrature(f, 0.7, 10000);
  auto spectral = fractional_laplacian(f, 0.7);
  EXPECT_LE(test::max_abs_diff(r.values, spectral), 1e-6 * spectral.max_abs());
}

TEST(QuadratureOracle, TruncationErrorDecreasesMonotonically) {
  SpectralGrid g(64);
  auto f = test::random_band_limited(g, 5, 21);
  auto spectral = fractional_laplacian(f, 0.5);
  QuadratureOracleOptions raw;
  raw.tail_correction = false;
  double prev = std::numeric_limits<double>::infinity();
  for (long images : {10L, 20L, 40L, 80L, 160L, 320L}) {
    auto r = fractional_laplacian_quadrature(f, 0.5, images, raw);
    const double err = test::max_abs_diff(r.values, spectral);
    EXPECT_LT(err, prev) << images;
    EXPECT_TRUE(r.accuracy_warning);
    prev = err;
  }
  // With the continuum tail the error also falls under refinement.
  prev = std::numeric_limits<double>::infinity();
  for (long images : {1L, 2L, 4L, 8L}) {
    auto r = fractional_laplacian_quadrature(f, 0.5, images);
    const double err = test::max_abs_diff(r.values, spectral);
    EXPECT_LT(err, prev) << images;
    prev = err;
  }
}

TEST(QuadratureOracle, WarnsWhenImagesAreTooFew) {
  SpectralGrid g(32);
  auto f = RealField::sample(g, [](double x) { return std::sin(2 * x); });
  EXPECT_TRUE(fractional_laplacian_quadrature(f, 0.5, 5).accuracy_warning);
  EXPECT_THROW(fractional_laplacian_quadrature(f, 0.5, 0), ParameterError);
}
