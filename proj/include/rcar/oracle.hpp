#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcar/linalg.hpp"

// Closed-form reference values computed without the library's solvers. Tests
// and `rcar oracle` use them to regenerate the documented example numbers.
namespace rcar::oracle {

/// Roots of z^2 - a1 z - a2 by the quadratic formula, larger modulus first.
std::pair<std::complex<double>, std::complex<double>> quadratic_roots(double a1, double a2);

struct PartialSum {
  double value = 0.0;
  std::size_t terms = 0;
};

/// sum_k a^{2k} sigma2 until the next term is below tol.
PartialSum ar1_gamma0_partial_sum(double a, double sigma2, double tol = 1e-16);

double ar1_gamma0(double a, double sigma2);

struct ScalarAtom {
  double a;
  double probability;
};

/// E{a^u sigma2 / (1 - a^2)} by enumeration over the atoms.
double scalar_upsilon(const std::vector<ScalarAtom>& atoms, double sigma2, int u);

/// E{sigma2 / (2 pi (1 - a)^2)}: the zero-frequency density of a scalar mixture.
double scalar_spectral_zero(const std::vector<ScalarAtom>& atoms, double sigma2);

/// Kronecker product by explicit index arithmetic.
MatrixXd kron_brute(const MatrixXd& a, const MatrixXd& b);

/// max |(A (x) B)(C (x) D) - (AC) (x) (BD)| using kron_brute.
double kron_mixed_product_residual(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                   const MatrixXd& d);

/// Registered subcase for `rcar oracle`.
struct Output {
  std::string name;
  std::vector<std::string> derivation;
  std::vector<std::pair<std::string, double>> values;
};

/// Names of the registered subcases with one-line usage strings.
std::vector<std::pair<std::string, std::string>> registry();

/// Runs a subcase. Arguments are `key=value` pairs or positional numbers as
/// documented in registry(). Throws InvalidArgument for unknown subcases.
Output run(const std::string& name, const std::vector<std::string>& args);

}  // namespace rcar::oracle
