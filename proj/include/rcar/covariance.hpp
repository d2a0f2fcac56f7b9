#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "rcar/linalg.hpp"
#include "rcar/model.hpp"

namespace rcar {

/// Truncation control shared by every infinite series in the library: stop
/// at the first term whose max-abs entry is below tol.
struct SeriesOptions {
  double tol = 1e-12;
  std::size_t max_terms = 100000;
};

/// Reciprocal condition estimate below which I - A (x) A is treated as
/// singular.
inline constexpr double kMinReciprocalCondition = 1e-12;

/// Condition-number bound for inverting a lag-0 covariance.
inline constexpr double kMaxCovarianceCondition = 1e12;

template <typename Scalar>
struct SeriesResult {
  Matrix<Scalar> value;
  std::size_t order;  // index K of the last term summed
  double tail_bound;  // estimate of the omitted remainder (max-abs entry)
};

namespace detail {

/// Geometric tail estimate |term_K| r / (1 - r) plus an allowance for the
/// rounding accumulated over K additions.
inline double geometric_tail(double last, double previous, double rate_floor,
                             std::size_t order, double sum_scale) {
  double r = previous > 0.0 ? last / previous : 0.0;
  r = std::max(r, rate_floor);
  const double rounding = static_cast<double>(order + 1) *
                          std::numeric_limits<double>::epsilon() * sum_scale;
  if (last == 0.0) return rounding;
  if (r >= 1.0) return std::numeric_limits<double>::infinity();
  return last * r / (1.0 - r) + rounding;
}

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, Eigen::Index p, const char* what) {
  if (m.rows() != p || m.cols() != p) {
    throw InvalidArgument(std::string(what) + ": expected a " + std::to_string(p) + "x" +
                          std::to_string(p) + " matrix");
  }
}

template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  using Plain = Matrix<typename Derived::Scalar>;
  return static_cast<double>(Eigen::JacobiSVD<Plain>(Plain(m)).singularValues()(0));
}

}  // namespace detail

/// Stationary state covariance of Y_t = A Y_{t-1} + e_t with E{e e'} = Omega,
/// from the linear system (I - A (x) A) vec(Gamma) = vec(Omega). The result is
/// symmetrized. Throws NonstationaryError when the spectral radius of A is not
/// below 1 - boundary_tol or the system is numerically singular.
template <typename DerivedA, typename DerivedO>
Matrix<typename DerivedA::Scalar> gamma0_direct(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedO>& omega,
    double boundary_tol = kDefaultBoundaryTol) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index p = a.rows();
  detail::require_square(a, p, "gamma0_direct");
  detail::require_square(omega, p, "gamma0_direct");
  const double radius = spectral_radius(a);
  if (!(radius < 1.0 - boundary_tol)) {
    throw NonstationaryError("gamma0_direct: spectral radius " + std::to_string(radius) +
                             " is not inside the unit circle");
  }
  const Matrix<Scalar> system =
      Matrix<Scalar>::Identity(p * p, p * p) - kron(a, a);
  Eigen::PartialPivLU<Matrix<Scalar>> lu(system);
  if (!(static_cast<double>(lu.rcond()) >= kMinReciprocalCondition)) {
    throw NonstationaryError("gamma0_direct: I - A (x) A is numerically singular");
  }
  const Matrix<Scalar> gamma = unvec(lu.solve(vec(omega)), p);
  return (gamma + gamma.transpose()) / Scalar(2);
}

/// Partial sums of sum_k A^k Omega A'^k.
template <typename DerivedA, typename DerivedO>
SeriesResult<typename DerivedA::Scalar> gamma0_series(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedO>& omega,
    const SeriesOptions& options = {}) {
  using Scalar = typename DerivedA::Scalar;
  const Eigen::Index p = a.rows();
  detail::require_square(a, p, "gamma0_series");
  detail::require_square(omega, p, "gamma0_series");
  const Matrix<Scalar> am = a;
  Matrix<Scalar> term = omega;
  Matrix<Scalar> sum = Matrix<Scalar>::Zero(p, p);
  Matrix<Scalar> power = am;  // A^{k+1}
  double previous = 0.0;
  const double rate_floor = std::min(0.999999, std::pow(spectral_radius(am), 2));
  for (std::size_t k = 0;; ++k) {
    sum += term;
    const double size = static_cast<double>(max_abs(term));
    if (size < options.tol) {
      // The remainder R = P (S + R) P' with P = A^{K+1}, so
      // |R|_2 <= |P S P'|_2 / (1 - |P|_2^2).
      const double q = std::pow(detail::spectral_norm(power), 2);
      const double rounding = static_cast<double>(k + 1) *
                              std::numeric_limits<double>::epsilon() *
                              static_cast<double>(max_abs(sum));
      const double tail =
          q < 1.0 ? detail::spectral_norm(power * sum * power.transpose()) /
                            (1.0 - q) +
                        rounding
                  : detail::geometric_tail(size, previous, rate_floor, k,
                                           static_cast<double>(max_abs(sum)));
      return {sum, k, tail};
    }
    if (k >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("gamma0_series: " + std::to_string(options.max_terms) +
                                " terms exhausted before tolerance",
                            detail::geometric_tail(size, previous, rate_floor, k, 0.0));
    }
    previous = size;
    term = (am * term * am.transpose()).eval();
    power = (power * am).eval();
  }
}

/// Lag-u conditional covariance A^u Gamma(0).
template <typename DerivedA, typename DerivedG>
Matrix<typename DerivedA::Scalar> gamma_u(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedG>& gamma0,
                                          int u) {
  if (u < 0) throw InvalidArgument("gamma_u: lag must be >= 0");
  detail::require_square(gamma0, a.rows(), "gamma_u");
  return matrix_power(a, u) * gamma0;
}

/// Gamma(1) Gamma(0)^{-1}. Throws RankDeficiencyError when Gamma(0) is
/// singular, i.e. some non-zero combination of the lagged states is exactly
/// determined by the others.
template <typename DerivedG1, typename DerivedG0>
Matrix<typename DerivedG1::Scalar> identify_A_from_covariances(
    const Eigen::MatrixBase<DerivedG1>& gamma1, const Eigen::MatrixBase<DerivedG0>& gamma0,
    double max_condition = kMaxCovarianceCondition) {
  using Scalar = typename DerivedG1::Scalar;
  const Eigen::Index p = gamma0.rows();
  detail::require_square(gamma0, p, "identify_A_from_covariances");
  detail::require_square(gamma1, p, "identify_A_from_covariances");
  const Matrix<Scalar> g0 = gamma0;
  Eigen::JacobiSVD<Matrix<Scalar>> svd(g0);
  const auto& s = svd.singularValues();
  const double smax = static_cast<double>(s(0));
  const double smin = static_cast<double>(s(p - 1));
  if (!(smin > 0.0) || smax / smin > max_condition) {
    throw RankDeficiencyError(
        "identify_A_from_covariances: lag-0 covariance is singular; the lagged states "
        "are exactly linearly dependent");
  }
  // X Gamma0 = Gamma1  <=>  Gamma0' X' = Gamma1'
  return g0.transpose().fullPivLu().solve(gamma1.transpose()).transpose();
}

}  // namespace rcar
