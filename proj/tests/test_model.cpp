#include <gtest/gtest.h>

#include <algorithm>

#include "rcar/error.hpp"
#include "rcar/model.hpp"
#include "rcar/oracle.hpp"
#include "test_support.hpp"

namespace rcar {
namespace {

TEST(CoefficientVector, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(CoefficientVector(VectorXd(0)), InvalidArgument);
  EXPECT_THROW(CoefficientVector({0.5, std::nan("")}), InvalidArgument);
  EXPECT_EQ(CoefficientVector({0.1, 0.2}).order(), 2);
}

TEST(Companion, Layout) {
  const MatrixXd a = companion_matrix(CoefficientVector({0.5, 0.3, 0.1}).alpha());
  MatrixXd expected(3, 3);
  expected << 0, 1, 0, 0, 0, 1, 0.1, 0.3, 0.5;
  EXPECT_EQ(a, expected);
  const CompanionMatrix c(CoefficientVector({0.5, 0.3, 0.1}));
  EXPECT_EQ(c.coefficients(), CoefficientVector({0.5, 0.3, 0.1}));
}

TEST(Roots, QuadraticExample) {
  const auto roots = char_poly_roots(CoefficientVector({0.5, 0.3}));
  ASSERT_EQ(roots.size(), 2u);
  EXPECT_NEAR(roots[0].real(), 0.85207972893961481, 1e-13);
  EXPECT_NEAR(roots[1].real(), -0.35207972893961481, 1e-13);
  EXPECT_EQ(roots[0].imag(), 0.0);
}

TEST(Roots, AgreeWithQuadraticFormula) {
  auto s = testing::test_stream(11);
  for (int trial = 0; trial < 200; ++trial) {
    const double a1 = 2.0 * s(), a2 = s();
    const auto roots = char_poly_roots(CoefficientVector({a1, a2}));
    const auto [r1, r2] = oracle::quadratic_roots(a1, a2);
    const double scale = 1.0 + std::abs(r1);
    const bool direct = std::abs(roots[0] - r1) + std::abs(roots[1] - r2) < 1e-9 * scale;
    const bool swapped = std::abs(roots[0] - r2) + std::abs(roots[1] - r1) < 1e-9 * scale;
    EXPECT_TRUE(direct || swapped) << "a1=" << a1 << " a2=" << a2;
  }
}

TEST(Roots, TrailingZerosGiveZeroRoots) {
  const auto roots = char_poly_roots(CoefficientVector({0.5, 0.0, 0.0}));
  ASSERT_EQ(roots.size(), 3u);
  EXPECT_NEAR(roots[0].real(), 0.5, 1e-15);
  EXPECT_EQ(std::abs(roots[1]), 0.0);
  EXPECT_EQ(std::abs(roots[2]), 0.0);
}

TEST(Roots, SortedByModulus) {
  auto s = testing::test_stream(12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto roots = char_poly_roots(testing::random_stationary_coeffs(s, 4));
    for (std::size_t k = 1; k < roots.size(); ++k) {
      EXPECT_GE(std::abs(roots[k - 1]) + 1e-12, std::abs(roots[k]));
    }
  }
}

TEST(Stationarity, EigenAndRootRoutesAgree) {
  auto s = testing::test_stream(13);
  for (int trial = 0; trial < 300; ++trial) {
    const int p = 1 + trial % 4;
    VectorXd alpha(p);
    for (int k = 0; k < p; ++k) alpha(k) = 0.7 * s();
    const CoefficientVector c(alpha);
    EXPECT_EQ(is_stationary_draw(c), is_stationary_draw_by_roots(c));
  }
}

TEST(Stationarity, UnitRootIsNonstationary) {
  EXPECT_FALSE(is_stationary_draw(CoefficientVector({1.0})));
  EXPECT_FALSE(is_stationary_draw(CoefficientVector({0.5, 0.5})));
  EXPECT_TRUE(is_stationary_draw(CoefficientVector({0.5, 0.3})));
  EXPECT_FALSE(is_stationary_draw(CoefficientVector({1.0 - 1e-12})));
}

TEST(Stationarity, ToleranceRange) {
  EXPECT_THROW(is_stationary_draw(CoefficientVector({0.5}), 0.0), InvalidArgument);
  EXPECT_THROW(is_stationary_draw(CoefficientVector({0.5}), 0.2), InvalidArgument);
}

TEST(Distribution, ProbabilitiesMustSumToOne) {
  EXPECT_THROW(CoefficientDistribution::discrete({{CoefficientVector({0.2}), 0.5},
                                                  {CoefficientVector({0.4}), 0.4}}),
               InvalidArgument);
  EXPECT_THROW(CoefficientDistribution::discrete({{CoefficientVector({0.2}), 1.0},
                                                  {CoefficientVector({0.4, 0.1}), 0.0}}),
               InvalidArgument);
}

TEST(Distribution, GaussianValidation) {
  MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.0, 1;
  EXPECT_THROW(CoefficientDistribution::gaussian(VectorXd::Zero(2), asym), InvalidArgument);
  MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  EXPECT_THROW(CoefficientDistribution::gaussian(VectorXd::Zero(2), indefinite), InvalidArgument);
  const auto g = CoefficientDistribution::gaussian(VectorXd::Constant(1, 0.3),
                                                   MatrixXd::Constant(1, 1, 0.01));
  EXPECT_TRUE(g.is_gaussian());
  EXPECT_THROW(g.atoms(), InvalidArgument);
}

TEST(Distribution, DiscreteDrawFrequencies) {
  const auto d = CoefficientDistribution::discrete(
      {{CoefficientVector({0.2}), 0.25}, {CoefficientVector({0.4}), 0.75}});
  auto s = testing::test_stream(14);
  int high = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) high += d.draw(s)[0] == 0.4;
  const double se = std::sqrt(0.25 * 0.75 / n);
  EXPECT_NEAR(high / static_cast<double>(n), 0.75, 4 * se);
}

TEST(Noise, ConstantAndDiscrete) {
  EXPECT_THROW(NoiseSpec::constant(0.0), InvalidArgument);
  EXPECT_THROW(NoiseSpec::discrete({{1.0, 0.5}, {-1.0, 0.5}}), InvalidArgument);
  const auto n = NoiseSpec::discrete({{0.5, 0.5}, {1.5, 0.5}});
  EXPECT_DOUBLE_EQ(n.mean_variance(), 1.0);
  EXPECT_EQ(omega_matrix(3, 2.0)(2, 2), 2.0);
  EXPECT_EQ(omega_matrix(3, 2.0).sum(), 2.0);
}

TEST(ModelSpec, Validation) {
  const auto d = CoefficientDistribution::degenerate(CoefficientVector({0.5, 0.1}));
  ModelSpec spec{2, d, NoiseSpec::constant(1.0), 10, 1};
  EXPECT_THROW(spec.validate(), InvalidArgument);  // T < p
  spec.T = 2;
  EXPECT_NO_THROW(spec.validate());
  spec.p = 1;
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(SecondOrder, DegenerateRadiusIsSquare) {
  const auto v = is_second_order_stationary(
      CoefficientDistribution::degenerate(CoefficientVector({0.5})));
  EXPECT_TRUE(v.stationary);
  EXPECT_NEAR(v.radius, 0.25, 1e-15);
  EXPECT_FALSE(v.approximate);
}

TEST(SecondOrder, DiscreteScalarMoment) {
  // E{a^2} for a in {0.2, 0.4} equally weighted.
  const auto v = is_second_order_stationary(CoefficientDistribution::discrete(
      {{CoefficientVector({0.2}), 0.5}, {CoefficientVector({0.4}), 0.5}}));
  EXPECT_NEAR(v.radius, 0.1, 1e-15);
}

TEST(SecondOrder, ContractiveMeanButExplosiveAtom) {
  // E{a^2} = 0.5 * 1.21 + 0.5 * 0.01 = 0.61 < 1 although a = 1.1 explodes.
  const auto v = is_second_order_stationary(CoefficientDistribution::discrete(
      {{CoefficientVector({1.1}), 0.5}, {CoefficientVector({0.1}), 0.5}}));
  EXPECT_TRUE(v.stationary);
  EXPECT_NEAR(v.radius, 0.61, 1e-14);
}

TEST(SecondOrder, GaussianSampledMatchesClosedForm) {
  // E{A (x) A} = M (x) M + E{(A - M) (x) (A - M)}; only the bottom row is random.
  VectorXd mean(2);
  mean << 0.4, 0.2;
  MatrixXd cov(2, 2);
  cov << 0.01, 0.002, 0.002, 0.004;
  const auto g = CoefficientDistribution::gaussian(mean, cov);
  const MatrixXd m = companion_matrix(mean);
  MatrixXd e = oracle::kron_brute(m, m);
  // Bottom row entries: A(1, j) = alpha_{2 - j}; row 1 of A is (alpha2, alpha1).
  const int p = 2;
  for (int j = 0; j < p; ++j) {
    for (int l = 0; l < p; ++l) {
      const int r = (p - 1) * p + (p - 1);
      e(r, j * p + l) += cov(p - 1 - j, p - 1 - l);
    }
  }
  const double exact = spectral_radius(e);
  SamplingOptions opt;
  opt.stationary_only = false;
  opt.samples = 200000;
  const auto v = is_second_order_stationary(g, kDefaultBoundaryTol, opt);
  EXPECT_TRUE(v.approximate);
  EXPECT_EQ(v.samples, opt.samples);
  EXPECT_NEAR(v.radius, exact, 5e-3);
}

TEST(Expectation, GaussianNeedsSamplingMode) {
  const auto g = CoefficientDistribution::gaussian(VectorXd::Constant(1, 0.3),
                                                   MatrixXd::Constant(1, 1, 0.01));
  EXPECT_THROW(expectation_atoms(g, ExpectationMode::exact()), InvalidArgument);
  SamplingOptions opt;
  opt.samples = 1000;
  const auto atoms = expectation_atoms(g, ExpectationMode::sample(opt));
  EXPECT_EQ(atoms.size(), 1000u);
  double total = 0.0;
  for (const auto& a : atoms) total += a.probability;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

}  // namespace
}  // namespace rcar
