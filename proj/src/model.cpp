#include "rcar/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace rcar {

namespace {

constexpr double kProbabilityTol = 1e-12;
constexpr std::size_t kMaxConsecutiveRejections = 1000000;

void check_probabilities(const std::vector<double>& probs, const char* what) {
  if (probs.empty()) throw InvalidArgument(std::string(what) + ": no atoms");
  double total = 0.0;
  for (double w : probs) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidArgument(std::string(what) + ": probabilities must be positive");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kProbabilityTol) {
    throw InvalidArgument(std::string(what) + ": probabilities sum to " +
                          std::to_string(total) + ", expected 1");
  }
}

template <typename Atoms, typename Weight>
std::size_t pick_atom(const Atoms& atoms, Weight weight, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    cumulative += weight(atoms[i]);
    if (u < cumulative) return i;
  }
  return atoms.size() - 1;
}

std::complex<double> horner(const std::vector<double>& c, std::complex<double> z,
                            std::complex<double>* derivative) {
  std::complex<double> value = c[0];
  std::complex<double> d = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    d = d * z + value;
    value = value * z + c[k];
  }
  if (derivative) *derivative = d;
  return value;
}

}  // namespace

CoefficientVector::CoefficientVector(VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 1) throw InvalidArgument("coefficient vector must have order p >= 1");
  if (!alpha_.allFinite()) throw InvalidArgument("coefficient vector has non-finite entries");
}

CoefficientVector::CoefficientVector(std::initializer_list<double> alpha)
    : CoefficientVector(VectorXd::Map(alpha.begin(), static_cast<Eigen::Index>(alpha.size()))) {}

std::vector<std::complex<double>> char_poly_roots(const CoefficientVector& coeffs) {
  const int p = coeffs.order();
  std::vector<std::complex<double>> roots;

  // Exact zero roots come from trailing zero coefficients.
  int degree = p;
  while (degree > 0 && coeffs[degree - 1] == 0.0) {
    roots.emplace_back(0.0, 0.0);
    --degree;
  }

  if (degree == 1) {
    roots.emplace_back(coeffs[0], 0.0);
  } else if (degree > 1) {
    // Monic polynomial, highest power first.
    std::vector<double> c(degree + 1);
    c[0] = 1.0;
    for (int k = 1; k <= degree; ++k) c[k] = -coeffs[k - 1];

    const double radius = std::max(0.5, std::pow(std::abs(c[degree]), 1.0 / degree));

    std::vector<std::complex<double>> z(degree);
    for (int k = 0; k < degree; ++k) {
      const double angle = 2.0 * std::numbers::pi * k / degree + 0.4;
      z[k] = std::polar(radius, angle);
    }

    constexpr int kMaxIterations = 1000;
    bool converged = false;
    for (int iter = 0; iter < kMaxIterations && !converged; ++iter) {
      double max_step = 0.0;
      for (int k = 0; k < degree; ++k) {
        std::complex<double> d;
        const std::complex<double> value = horner(c, z[k], &d);
        if (value == 0.0) continue;
        const std::complex<double> ratio = value / d;
        std::complex<double> repulsion = 0.0;
        for (int j = 0; j < degree; ++j) {
          if (j != k) repulsion += 1.0 / (z[k] - z[j]);
        }
        const std::complex<double> step = ratio / (1.0 - ratio * repulsion);
        if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) continue;
        z[k] -= step;
        max_step = std::max(max_step, std::abs(step) / (1.0 + std::abs(z[k])));
      }
      converged = max_step < 1e-15;
    }

    for (const auto& root : z) {
      const double residual = std::abs(horner(c, root, nullptr));
      const double scale = 1.0 + std::pow(std::abs(root), degree);
      if (!std::isfinite(residual) || residual > kRootResidualTol * scale) {
        throw NumericalError("char_poly_roots: root finder failed to converge (residual " +
                             std::to_string(residual) + ")");
      }
      // Snap numerically real roots onto the real axis.
      roots.push_back(std::abs(root.imag()) <= 1e-14 * (1.0 + std::abs(root))
                          ? std::complex<double>(root.real(), 0.0)
                          : root);
    }
  }

  std::stable_sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return std::abs(a) > std::abs(b);
  });
  return roots;
}

namespace {
void check_boundary_tol(double tol) {
  if (!(tol > 0.0 && tol <= 0.1)) {
    throw InvalidArgument("stationarity tolerance must lie in (0, 0.1]");
  }
}
}  // namespace

bool is_stationary_draw(const CoefficientVector& coeffs, double tol) {
  check_boundary_tol(tol);
  return spectral_radius(companion_from_coeffs(coeffs).matrix()) < 1.0 - tol;
}

bool is_stationary_draw_by_roots(const CoefficientVector& coeffs, double tol) {
  check_boundary_tol(tol);
  double radius = 0.0;
  for (const auto& z : char_poly_roots(coeffs)) radius = std::max(radius, std::abs(z));
  return radius < 1.0 - tol;
}

// ---------------------------------------------------------------------------

CoefficientDistribution CoefficientDistribution::degenerate(CoefficientVector value) {
  const int p = value.order();
  return CoefficientDistribution(DegenerateCoefficients{std::move(value)}, p);
}

CoefficientDistribution CoefficientDistribution::discrete(
    std::vector<WeightedCoefficients> atoms) {
  std::vector<double> probs;
  for (const auto& atom : atoms) probs.push_back(atom.probability);
  check_probabilities(probs, "discrete coefficient distribution");
  const int p = atoms.front().value.order();
  for (const auto& atom : atoms) {
    if (atom.value.order() != p) {
      throw InvalidArgument("discrete coefficient distribution: atoms of mixed order");
    }
  }
  return CoefficientDistribution(DiscreteCoefficients{std::move(atoms)}, p);
}

CoefficientDistribution CoefficientDistribution::gaussian(VectorXd mean, MatrixXd covariance) {
  const Eigen::Index p = mean.size();
  if (p < 1) throw InvalidArgument("gaussian coefficient distribution: empty mean");
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw InvalidArgument("gaussian coefficient distribution: non-finite parameters");
  }
  if (covariance.rows() != p || covariance.cols() != p) {
    throw InvalidArgument("gaussian coefficient distribution: covariance must be p x p");
  }
  const double scale = 1.0 + max_abs(covariance);
  if (max_abs(MatrixXd(covariance - covariance.transpose())) > 1e-12 * scale) {
    throw InvalidArgument("gaussian coefficient distribution: covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(covariance);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("gaussian coefficient distribution: eigen-solver failed");
  }
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    throw InvalidArgument("gaussian coefficient distribution: covariance not positive semi-definite");
  }
  MatrixXd factor = eig.eigenvectors() *
                    eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return CoefficientDistribution(
      GaussianCoefficients{std::move(mean), std::move(covariance), std::move(factor)},
      static_cast<int>(p));
}

VectorXd CoefficientDistribution::mean() const {
  return std::visit(
      [](const auto& d) -> VectorXd {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DegenerateCoefficients>) {
          return d.value.alpha();
        } else if constexpr (std::is_same_v<T, DiscreteCoefficients>) {
          VectorXd m = VectorXd::Zero(d.atoms.front().value.order());
          for (const auto& atom : d.atoms) m += atom.probability * atom.value.alpha();
          return m;
        } else {
          return d.mean;
        }
      },
      variant_);
}

std::vector<WeightedCoefficients> CoefficientDistribution::atoms() const {
  if (const auto* d = std::get_if<DegenerateCoefficients>(&variant_)) {
    return {{d->value, 1.0}};
  }
  if (const auto* d = std::get_if<DiscreteCoefficients>(&variant_)) return d->atoms;
  throw InvalidArgument("gaussian coefficient distribution has no finite atom set");
}

CoefficientVector CoefficientDistribution::draw(NormalStream& stream) const {
  return std::visit(
      [&](const auto& d) -> CoefficientVector {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, DegenerateCoefficients>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, DiscreteCoefficients>) {
          const double u = stream.uniform();
          return d.atoms[pick_atom(d.atoms, [](const auto& a) { return a.probability; }, u)].value;
        } else {
          VectorXd z(d.mean.size());
          for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = stream();
          return CoefficientVector(VectorXd(d.mean + d.factor * z));
        }
      },
      variant_);
}

NoiseSpec NoiseSpec::constant(double sigma2) {
  return discrete({{sigma2, 1.0}});
}

NoiseSpec NoiseSpec::discrete(std::vector<Atom> atoms) {
  std::vector<double> probs;
  for (const auto& atom : atoms) {
    if (!(atom.sigma2 > 0.0) || !std::isfinite(atom.sigma2)) {
      throw InvalidArgument("noise variance atoms must be strictly positive");
    }
    probs.push_back(atom.probability);
  }
  check_probabilities(probs, "noise variance distribution");
  return NoiseSpec(std::move(atoms));
}

double NoiseSpec::mean_variance() const {
  double m = 0.0;
  for (const auto& atom : atoms_) m += atom.probability * atom.sigma2;
  return m;
}

double NoiseSpec::draw(NormalStream& stream) const {
  if (is_constant()) return atoms_.front().sigma2;
  const double u = stream.uniform();
  return atoms_[pick_atom(atoms_, [](const Atom& a) { return a.probability; }, u)].sigma2;
}

MatrixXd omega_matrix(int p, double sigma2) {
  if (p < 1) throw InvalidArgument("omega_matrix: p must be >= 1");
  MatrixXd omega = MatrixXd::Zero(p, p);
  omega(p - 1, p - 1) = sigma2;
  return omega;
}

void ModelSpec::validate() const {
  if (p < 1) throw InvalidArgument("model: order p must be >= 1");
  if (N < 1) throw InvalidArgument("model: N must be >= 1");
  if (T < p) throw InvalidArgument("model: T must be >= p");
  if (coefficients.order() != p) {
    throw InvalidArgument("model: coefficient distribution has order " +
                          std::to_string(coefficients.order()) + ", expected " +
                          std::to_string(p));
  }
}

// ---------------------------------------------------------------------------

std::vector<WeightedCoefficients> expectation_atoms(const CoefficientDistribution& dist,
                                                    const ExpectationMode& mode) {
  if (!dist.is_gaussian()) return dist.atoms();
  if (!mode.sampled) {
    throw InvalidArgument(
        "gaussian coefficient distribution requires sampling mode for expectations");
  }
  const SamplingOptions& opt = mode.sampling;
  if (opt.samples == 0) throw InvalidArgument("sampling mode needs at least one sample");
  NormalStream stream(make_stream(
      opt.seed, {static_cast<std::uint64_t>(StreamPurpose::expectation_sampling)}));
  std::vector<WeightedCoefficients> atoms;
  atoms.reserve(opt.samples);
  const double weight = 1.0 / static_cast<double>(opt.samples);
  std::size_t rejections = 0;
  while (atoms.size() < opt.samples) {
    CoefficientVector draw = dist.draw(stream);
    if (opt.stationary_only && !is_stationary_draw(draw, opt.boundary_tol)) {
      if (++rejections > kMaxConsecutiveRejections) {
        throw NonstationaryError(
            "expectation sampling: coefficient distribution is predominantly nonstationary");
      }
      continue;
    }
    rejections = 0;
    atoms.push_back({std::move(draw), weight});
  }
  return atoms;
}

SecondOrderVerdict is_second_order_stationary(const CoefficientDistribution& dist,
                                              double tol,
                                              const SamplingOptions& sampling) {
  check_boundary_tol(tol);
  const ExpectationMode mode =
      dist.is_gaussian() ? ExpectationMode::sample(sampling) : ExpectationMode::exact();
  const auto atoms = expectation_atoms(dist, mode);
  const int p = dist.order();
  MatrixXd second = MatrixXd::Zero(p * p, p * p);
  for (const auto& atom : atoms) {
    const MatrixXd a = companion_matrix(atom.value.alpha());
    second += atom.probability * kron(a, a);
  }
  if (!second.allFinite()) {
    throw NumericalError("second-order stationarity: expectation of A (x) A is not finite");
  }
  const double radius = spectral_radius(second);
  return {radius < 1.0 - tol, radius, mode.sampled, mode.sampled ? atoms.size() : 0};
}

}  // namespace rcar
