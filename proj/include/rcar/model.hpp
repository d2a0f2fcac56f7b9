#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "rcar/linalg.hpp"
#include "rcar/random.hpp"

namespace rcar {

/// Default distance from the unit circle below which a spectral radius is
/// treated as "not strictly inside".
inline constexpr double kDefaultBoundaryTol = 1e-9;

/// Residual tolerance used to accept a characteristic-polynomial root:
/// |P(z)| <= kRootResidualTol * (1 + |z|^p).
inline constexpr double kRootResidualTol = 1e-9;

/// Autoregressive coefficients (alpha_1, ..., alpha_p), p >= 1, all finite.
class CoefficientVector {
 public:
  explicit CoefficientVector(VectorXd alpha);
  CoefficientVector(std::initializer_list<double> alpha);

  int order() const noexcept { return static_cast<int>(alpha_.size()); }
  const VectorXd& alpha() const noexcept { return alpha_; }
  /// alpha_{k+1}, zero-based.
  double operator[](int k) const { return alpha_(k); }

  friend bool operator==(const CoefficientVector& a, const CoefficientVector& b) {
    return a.alpha_.size() == b.alpha_.size() && a.alpha_ == b.alpha_;
  }

 private:
  VectorXd alpha_;
};

/// Companion matrix of an order-p recursion: ones on the superdiagonal of the
/// first p-1 rows and (alpha_p, ..., alpha_1) in the bottom row.
template <typename Derived>
Matrix<typename Derived::Scalar> companion_matrix(
    const Eigen::MatrixBase<Derived>& alpha) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index p = alpha.size();
  Matrix<Scalar> a = Matrix<Scalar>::Zero(p, p);
  for (Eigen::Index i = 0; i + 1 < p; ++i) a(i, i + 1) = Scalar(1);
  for (Eigen::Index j = 0; j < p; ++j) a(p - 1, j) = alpha(p - 1 - j);
  return a;
}

class CompanionMatrix {
 public:
  explicit CompanionMatrix(const CoefficientVector& coeffs)
      : matrix_(companion_matrix(coeffs.alpha())) {}

  int order() const noexcept { return static_cast<int>(matrix_.rows()); }
  const MatrixXd& matrix() const noexcept { return matrix_; }
  CoefficientVector coefficients() const {
    return CoefficientVector(matrix_.row(order() - 1).reverse().transpose());
  }

 private:
  MatrixXd matrix_;
};

inline CompanionMatrix companion_from_coeffs(const CoefficientVector& coeffs) {
  return CompanionMatrix(coeffs);
}

/// Roots of z^p - alpha_1 z^{p-1} - ... - alpha_p, ordered by decreasing
/// modulus. Aberth-Ehrlich iteration, independent of any eigen-solver.
/// Throws NumericalError when a root fails the residual check.
std::vector<std::complex<double>> char_poly_roots(const CoefficientVector& coeffs);

/// Spectral radius of the companion matrix is strictly below 1 - tol.
bool is_stationary_draw(const CoefficientVector& coeffs,
                        double tol = kDefaultBoundaryTol);
/// Same criterion evaluated through the characteristic roots.
bool is_stationary_draw_by_roots(const CoefficientVector& coeffs,
                                 double tol = kDefaultBoundaryTol);

// ---------------------------------------------------------------------------
// Coefficient and noise distributions

struct WeightedCoefficients {
  CoefficientVector value;
  double probability;
};

struct DegenerateCoefficients {
  CoefficientVector value;
};

struct DiscreteCoefficients {
  std::vector<WeightedCoefficients> atoms;
};

struct GaussianCoefficients {
  VectorXd mean;
  MatrixXd covariance;
  MatrixXd factor;  // factor * factor' == covariance
};

/// Distribution of the coefficient vector across individuals.
class CoefficientDistribution {
 public:
  using Variant =
      std::variant<DegenerateCoefficients, DiscreteCoefficients, GaussianCoefficients>;

  static CoefficientDistribution degenerate(CoefficientVector value);
  /// Probabilities must be positive and sum to one within 1e-12.
  static CoefficientDistribution discrete(std::vector<WeightedCoefficients> atoms);
  /// Covariance must be symmetric positive semi-definite.
  static CoefficientDistribution gaussian(VectorXd mean, MatrixXd covariance);

  int order() const noexcept { return order_; }
  const Variant& variant() const noexcept { return variant_; }
  bool is_gaussian() const noexcept {
    return std::holds_alternative<GaussianCoefficients>(variant_);
  }
  VectorXd mean() const;

  /// Atoms of a degenerate or discrete distribution; throws for gaussian.
  std::vector<WeightedCoefficients> atoms() const;

  /// One draw. Consumes a uniform for discrete atoms, p normals for gaussian.
  CoefficientVector draw(NormalStream& stream) const;

 private:
  CoefficientDistribution(Variant v, int order) : variant_(std::move(v)), order_(order) {}
  Variant variant_;
  int order_;
};

/// Distribution of the innovation variance sigma^2 across individuals.
class NoiseSpec {
 public:
  struct Atom {
    double sigma2;
    double probability;
  };

  static NoiseSpec constant(double sigma2);
  static NoiseSpec discrete(std::vector<Atom> atoms);

  bool is_constant() const noexcept { return atoms_.size() == 1; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double mean_variance() const;
  double draw(NormalStream& stream) const;

 private:
  explicit NoiseSpec(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {}
  std::vector<Atom> atoms_;
};

/// p x p innovation covariance of the state recursion: zero except (p,p).
MatrixXd omega_matrix(int p, double sigma2);

struct ModelSpec {
  int p;
  CoefficientDistribution coefficients;
  NoiseSpec noise;
  int N;
  int T;

  /// Throws InvalidArgument unless p >= 1, N >= 1, T >= p and the
  /// distribution order equals p.
  void validate() const;
  MatrixXd mean_omega() const { return omega_matrix(p, noise.mean_variance()); }
};

// ---------------------------------------------------------------------------
// Expectations over the coefficient distribution

struct SamplingOptions {
  std::size_t samples = 100000;
  std::uint64_t seed = 0x52434152;
  /// Drop draws outside the stationarity region, matching the simulator's
  /// default reject-and-redraw policy.
  bool stationary_only = true;
  double boundary_tol = kDefaultBoundaryTol;
};

/// Exact expectations enumerate atoms; sampled expectations replace a
/// gaussian law by the empirical measure of a seeded sample.
struct ExpectationMode {
  bool sampled = false;
  SamplingOptions sampling{};

  static ExpectationMode exact() { return {}; }
  static ExpectationMode sample(SamplingOptions options = {}) {
    return {true, options};
  }
};

/// Weighted atoms over which expectations are taken. Degenerate and discrete
/// distributions always use their own atoms; gaussian requires sampled mode.
std::vector<WeightedCoefficients> expectation_atoms(const CoefficientDistribution& dist,
                                                    const ExpectationMode& mode);

struct SecondOrderVerdict {
  bool stationary;
  double radius;       // spectral radius of E{A (x) A}
  bool approximate;    // expectation was estimated by sampling
  std::size_t samples; // 0 when exact
  explicit operator bool() const noexcept { return stationary; }
};

/// spectral_radius(E{A (x) A}) < 1 - tol. Gaussian distributions use a seeded
/// sample (default 1e5 draws) and are flagged approximate.
SecondOrderVerdict is_second_order_stationary(const CoefficientDistribution& dist,
                                              double tol = kDefaultBoundaryTol,
                                              const SamplingOptions& sampling = {});

}  // namespace rcar
