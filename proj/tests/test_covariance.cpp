#include <gtest/gtest.h>

#include "rcar/covariance.hpp"
#include "rcar/model.hpp"
#include "rcar/oracle.hpp"
#include "test_support.hpp"

namespace rcar {
namespace {

MatrixXd scalar(double x) { return MatrixXd::Constant(1, 1, x); }

TEST(Gamma0, ScalarClosedForm) {
  for (double a : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    EXPECT_NEAR(gamma0_direct(scalar(a), scalar(1.0))(0, 0), oracle::ar1_gamma0(a, 1.0), 1e-12);
    EXPECT_NEAR(gamma0_series(scalar(a), scalar(2.0)).value(0, 0), oracle::ar1_gamma0(a, 2.0),
                1e-10);
  }
}

TEST(Gamma0, SeriesOrderCountsLastIndex) {
  EXPECT_EQ(gamma0_series(scalar(0.0), scalar(1.0)).order, 1u);
  // 0.25^k first drops below 1e-12 at k = 20.
  EXPECT_EQ(gamma0_series(scalar(0.5), scalar(1.0)).order, 20u);
}

TEST(Gamma0, Ar2ClosedForm) {
  const MatrixXd a = companion_matrix(CoefficientVector({0.5, 0.3}).alpha());
  const MatrixXd g = gamma0_direct(a, omega_matrix(2, 1.0));
  // gamma(0) = (1 - a2) / ((1 + a2)((1 - a2)^2 - a1^2)), gamma(1) = a1 gamma(0) / (1 - a2)
  EXPECT_NEAR(g(0, 0), 2.2435897435897436, 1e-12);
  EXPECT_NEAR(g(1, 1), 2.2435897435897436, 1e-12);
  EXPECT_NEAR(g(0, 1), 1.6025641025641026, 1e-12);
}

TEST(Gamma0, LyapunovResidualAndDefiniteness) {
  auto s = testing::test_stream(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = 1 + trial % 3;
    const MatrixXd a = companion_matrix(testing::random_stationary_coeffs(s, p).alpha());
    const MatrixXd omega = omega_matrix(p, 1.0 + s.uniform());
    const MatrixXd g = gamma0_direct(a, omega);
    const MatrixXd residual = g - a * g * a.transpose() - omega;
    EXPECT_LT(max_abs(residual), 1e-10 * (1.0 + max_abs(g)));
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatrixXd>(g).eigenvalues().minCoeff(), 0.0);
    EXPECT_EQ(g, g.transpose());
  }
}

TEST(Gamma0, SeriesTailBoundCoversError) {
  auto s = testing::test_stream(22);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 1 + trial % 3;
    const MatrixXd a = companion_matrix(testing::random_stationary_coeffs(s, p, 0.9).alpha());
    const MatrixXd omega = omega_matrix(p, 1.0);
    SeriesOptions opt;
    opt.tol = 1e-6;
    const auto series = gamma0_series(a, omega, opt);
    const double err = max_abs(MatrixXd(series.value - gamma0_direct(a, omega)));
    EXPECT_LE(err, series.tail_bound * 1.0001 + 1e-12) << "p=" << p;
  }
}

TEST(Gamma0, NonstationaryRejected) {
  EXPECT_THROW(gamma0_direct(scalar(1.0), scalar(1.0)), NonstationaryError);
  EXPECT_THROW(gamma0_direct(scalar(-1.2), scalar(1.0)), NonstationaryError);
}

TEST(Gamma0, TruncationErrorCarriesTail) {
  SeriesOptions opt;
  opt.max_terms = 5;
  try {
    gamma0_series(scalar(0.99), scalar(1.0), opt);
    FAIL() << "expected TruncationError";
  } catch (const TruncationError& e) {
    EXPECT_GT(e.tail_estimate(), 1.0);
  }
}

TEST(Gamma0, ShapeChecked) {
  EXPECT_THROW(gamma0_direct(MatrixXd::Zero(2, 2), scalar(1.0)), InvalidArgument);
}

TEST(GammaU, PowersOfA) {
  const MatrixXd a = companion_matrix(CoefficientVector({0.5, 0.3}).alpha());
  const MatrixXd g0 = gamma0_direct(a, omega_matrix(2, 1.0));
  EXPECT_EQ(gamma_u(a, g0, 0), g0);
  EXPECT_LT(max_abs(MatrixXd(gamma_u(a, g0, 3) - a * a * a * g0)), 1e-14);
  EXPECT_THROW(gamma_u(a, g0, -1), InvalidArgument);
}

TEST(Identification, RoundTrip) {
  auto s = testing::test_stream(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + trial % 3;
    const MatrixXd a = companion_matrix(testing::random_stationary_coeffs(s, p).alpha());
    const MatrixXd g0 = gamma0_direct(a, omega_matrix(p, 1.0));
    const MatrixXd recovered = identify_A_from_covariances(MatrixXd(a * g0), g0);
    EXPECT_LT(max_abs(MatrixXd(recovered - a)), 1e-8);
  }
}

TEST(Identification, SingularGammaRejected) {
  MatrixXd g0 = MatrixXd::Ones(2, 2);
  EXPECT_THROW(identify_A_from_covariances(g0, g0), RankDeficiencyError);
}

}  // namespace
}  // namespace rcar
