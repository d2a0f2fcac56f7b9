#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>

#include "rcar/error.hpp"

namespace rcar {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Matrix<double>;
using VectorXd = Vector<double>;
using MatrixXcd = Matrix<std::complex<double>>;
using VectorXcd = Vector<std::complex<double>>;

/// Kronecker product, (r1 r2) x (c1 c2).
template <typename DerivedA, typename DerivedB>
Matrix<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                       const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Matrix<Scalar> lhs = a;
  const Matrix<Scalar> rhs = b;
  return Eigen::kroneckerProduct(lhs, rhs).eval();
}

/// Column-stacking vec operator.
template <typename Derived>
Vector<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& m) {
  return m.eval().reshaped();
}

/// Inverse of vec for a square p x p matrix.
template <typename Derived>
Matrix<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& w,
                                       Eigen::Index p) {
  if (w.cols() != 1 || p < 0 || w.rows() != p * p) {
    throw InvalidArgument("unvec: vector of length " +
                          std::to_string(w.rows() * w.cols()) +
                          " cannot be reshaped to " + std::to_string(p) +
                          "x" + std::to_string(p));
  }
  return w.eval().reshaped(p, p);
}

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? typename Derived::RealScalar(0)
                       : m.cwiseAbs().maxCoeff();
}

/// A^k by binary powering; A^0 = I.
template <typename Derived>
Matrix<typename Derived::Scalar> matrix_power(
    const Eigen::MatrixBase<Derived>& a, int k) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw InvalidArgument("matrix_power: non-square");
  if (k < 0) throw InvalidArgument("matrix_power: negative exponent");
  Matrix<Scalar> result = Matrix<Scalar>::Identity(a.rows(), a.cols());
  Matrix<Scalar> base = a;
  while (k > 0) {
    if (k & 1) result = (result * base).eval();
    k >>= 1;
    if (k > 0) base = (base * base).eval();
  }
  return result;
}

/// Eigenvalues of a real square matrix; throws NumericalError if the QR
/// iteration does not converge.
template <typename Derived>
VectorXcd eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eigenvalues: non-square");
  if (!m.allFinite()) throw InvalidArgument("eigenvalues: non-finite entries");
  if (m.rows() == 0) return VectorXcd(0);
  const MatrixXd dense = m.template cast<double>();
  Eigen::EigenSolver<MatrixXd> solver(dense, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigen-solver did not converge");
  }
  return solver.eigenvalues();
}

/// max |lambda_i| over the eigenvalues of m.
template <typename Derived>
double spectral_radius(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() == 0) return 0.0;
  return eigenvalues(m).cwiseAbs().maxCoeff();
}

}  // namespace rcar
