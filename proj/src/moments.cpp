#include "rcar/moments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace rcar {

namespace {

struct Atom {
  MatrixXd a;
  double weight;
  double radius;
};

std::vector<Atom> load_atoms(const CoefficientDistribution& dist, const ExpectationMode& mode) {
  std::vector<Atom> out;
  for (const auto& w : expectation_atoms(dist, mode)) {
    MatrixXd a = companion_matrix(w.value.alpha());
    const double radius = spectral_radius(a);
    out.push_back({std::move(a), w.probability, radius});
  }
  return out;
}

/// The unconditional series need both the second-order criterion and
/// stationarity of every atom: an explosive atom makes sum_v E{A^v Omega A'^v}
/// diverge even when E{A (x) A} is contractive.
void require_convergent(const std::vector<Atom>& atoms, int p, const char* what) {
  MatrixXd second = MatrixXd::Zero(p * p, p * p);
  for (const auto& atom : atoms) second += atom.weight * kron(atom.a, atom.a);
  const double radius = spectral_radius(second);
  if (!(radius < 1.0 - kDefaultBoundaryTol)) {
    throw NonstationaryError(std::string(what) +
                             ": distribution is not second-order stationary "
                             "(spectral radius of E{A (x) A} is " +
                             std::to_string(radius) + ")");
  }
  for (const auto& atom : atoms) {
    if (!(atom.radius < 1.0 - kDefaultBoundaryTol)) {
      throw NonstationaryError(std::string(what) +
                               ": an atom has eigenvalues outside the unit circle "
                               "(spectral radius " +
                               std::to_string(atom.radius) + ")");
    }
  }
}

double max_radius(const std::vector<Atom>& atoms) {
  double r = 0.0;
  for (const auto& atom : atoms) r = std::max(r, atom.radius);
  return r;
}

void check_omega(const MatrixXd& omega_bar, int p, const char* what) {
  detail::require_square(omega_bar, p, what);
}

SeriesResult<double> upsilon_from_atoms(const std::vector<Atom>& atoms, const MatrixXd& omega_bar,
                                        int u, const SeriesOptions& options) {
  const Eigen::Index p = omega_bar.rows();
  std::vector<MatrixXd> lead;
  std::vector<MatrixXd> inner(atoms.size(), omega_bar);
  lead.reserve(atoms.size());
  for (const auto& atom : atoms) lead.push_back(matrix_power(atom.a, u));

  const double rate_floor = std::min(0.999999, std::pow(max_radius(atoms), 2));
  MatrixXd sum = MatrixXd::Zero(p, p);
  double previous = 0.0;
  for (std::size_t v = 0;; ++v) {
    MatrixXd term = MatrixXd::Zero(p, p);
    double size = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const MatrixXd contribution = lead[i] * inner[i];
      term += atoms[i].weight * contribution;
      size += atoms[i].weight * max_abs(contribution);
    }
    sum += term;
    if (size < options.tol) {
      return {sum, v, detail::geometric_tail(size, previous, rate_floor, v, max_abs(sum))};
    }
    if (v >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("upsilon_series: " + std::to_string(options.max_terms) +
                                " terms exhausted before tolerance",
                            detail::geometric_tail(size, previous, rate_floor, v, 0.0));
    }
    previous = size;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      inner[i] = (atoms[i].a * inner[i] * atoms[i].a.transpose()).eval();
    }
  }
}

double inf_norm(const MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

CovarianceSet conditional_covariances(const CompanionMatrix& a, const MatrixXd& omega,
                                      int max_lag, double boundary_tol) {
  if (max_lag < 0) throw InvalidArgument("conditional_covariances: max_lag must be >= 0");
  CovarianceSet set;
  set.kind = CovarianceKind::conditional;
  const MatrixXd gamma0 = gamma0_direct(a.matrix(), omega, boundary_tol);
  MatrixXd current = gamma0;
  set.lags.push_back(gamma0);
  for (int u = 1; u <= max_lag; ++u) {
    current = (a.matrix() * current).eval();
    set.lags.push_back(current);
  }
  return set;
}

MatrixXd moment_mu(const CoefficientDistribution& dist, int v, int u,
                   const ExpectationMode& mode) {
  if (v < 0 || u < 0) throw InvalidArgument("moment_mu: v and u must be >= 0");
  const int p = dist.order();
  if (v == 0 && u == 0) return MatrixXd::Identity(p * p, p * p);
  MatrixXd mu = MatrixXd::Zero(p * p, p * p);
  for (const auto& atom : load_atoms(dist, mode)) {
    mu += atom.weight * kron(matrix_power(atom.a, v), matrix_power(atom.a, v + u));
  }
  return mu;
}

MomentSeries moment_series(const CoefficientDistribution& dist, int max_v, int max_u,
                           const ExpectationMode& mode) {
  if (max_v < 0 || max_u < 0) throw InvalidArgument("moment_series: bounds must be >= 0");
  const int p = dist.order();
  const auto atoms = load_atoms(dist, mode);
  MomentSeries series;
  series.p = p;
  series.max_v = max_v;
  series.max_u = max_u;
  for (int v = 0; v <= max_v; ++v) {
    for (int u = 0; u <= max_u; ++u) {
      MatrixXd mu = MatrixXd::Zero(p * p, p * p);
      for (const auto& atom : atoms) {
        mu += atom.weight * kron(matrix_power(atom.a, v), matrix_power(atom.a, v + u));
      }
      series.entries.emplace(std::make_pair(v, u), std::move(mu));
    }
  }
  if (max_v >= 1) {
    const double last = max_abs(series.at(max_v, 0));
    const double previous = max_abs(series.at(max_v - 1, 0));
    series.tail_bound = detail::geometric_tail(last, previous, 0.0, 0, 0.0);
  } else {
    series.tail_bound = std::numeric_limits<double>::infinity();
  }
  return series;
}

SeriesResult<double> upsilon_series(const CoefficientDistribution& dist,
                                    const MatrixXd& omega_bar, int u,
                                    const SeriesOptions& options, const ExpectationMode& mode) {
  if (u < 0) throw InvalidArgument("upsilon_series: lag must be >= 0");
  check_omega(omega_bar, dist.order(), "upsilon_series");
  const auto atoms = load_atoms(dist, mode);
  require_convergent(atoms, dist.order(), "upsilon_series");
  return upsilon_from_atoms(atoms, omega_bar, u, options);
}

CovarianceSet unconditional_covariances(const CoefficientDistribution& dist,
                                        const MatrixXd& omega_bar, int max_lag,
                                        const SeriesOptions& options,
                                        const ExpectationMode& mode) {
  if (max_lag < 0) throw InvalidArgument("unconditional_covariances: max_lag must be >= 0");
  check_omega(omega_bar, dist.order(), "unconditional_covariances");
  const auto atoms = load_atoms(dist, mode);
  require_convergent(atoms, dist.order(), "unconditional_covariances");
  CovarianceSet set;
  set.kind = CovarianceKind::unconditional;
  for (int u = 0; u <= max_lag; ++u) {
    auto result = upsilon_from_atoms(atoms, omega_bar, u, options);
    if (u == 0) result.value = (result.value + result.value.transpose()) / 2.0;
    set.lags.push_back(std::move(result.value));
    set.truncation_order = std::max(set.truncation_order, result.order);
    set.tail_bound = std::max(set.tail_bound, result.tail_bound);
  }
  return set;
}

SpectralDensityValue spectral_density(const CoefficientDistribution& dist,
                                      const MatrixXd& omega_bar, double lambda,
                                      const SeriesOptions& options,
                                      const ExpectationMode& mode) {
  const int p = dist.order();
  check_omega(omega_bar, p, "spectral_density");
  if (!std::isfinite(lambda)) throw InvalidArgument("spectral_density: non-finite frequency");
  const auto atoms = load_atoms(dist, mode);
  for (const auto& atom : atoms) {
    if (!(atom.radius < 1.0 - kDefaultBoundaryTol)) {
      throw NonstationaryError(
          "spectral_density: [I - I (x) A]^2 is not invertible for some coefficient draw "
          "(spectral radius " + std::to_string(atom.radius) +
          "); the spectral density does not exist");
    }
  }

  // Per-draw stationary covariance, then Y(u) = E{A^u Gamma(0)}.
  std::vector<MatrixXd> lagged;
  lagged.reserve(atoms.size());
  MatrixXd upsilon0 = MatrixXd::Zero(p, p);
  for (const auto& atom : atoms) {
    lagged.push_back(gamma0_direct(atom.a, omega_bar));
    upsilon0 += atom.weight * lagged.back();
  }
  MatrixXcd value = upsilon0.cast<std::complex<double>>();

  const double rate_floor = std::min(0.999999, max_radius(atoms));
  double previous = max_abs(upsilon0);
  for (std::size_t u = 1;; ++u) {
    MatrixXd upsilon = MatrixXd::Zero(p, p);
    double size = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      lagged[i] = (atoms[i].a * lagged[i]).eval();
      upsilon += atoms[i].weight * lagged[i];
      size += atoms[i].weight * max_abs(lagged[i]);
    }
    const std::complex<double> phase = std::polar(1.0, -lambda * static_cast<double>(u));
    value += upsilon.cast<std::complex<double>>() * phase +
             upsilon.transpose().cast<std::complex<double>>() * std::conj(phase);
    if (size < options.tol) {
      const double tail =
          2.0 * detail::geometric_tail(size, previous, rate_floor, u, max_abs(value));
      value /= 2.0 * std::numbers::pi;
      return {lambda, value, u, tail / (2.0 * std::numbers::pi)};
    }
    if (u >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("spectral_density: lag sum did not reach tolerance",
                            detail::geometric_tail(size, previous, rate_floor, u, 0.0));
    }
    previous = size;
  }
}

namespace {

/// sum_v (A (x) A)^v vec(Omega) for one atom, Kronecker form.
struct KronSeries {
  VectorXd value;
  double tail;
  std::size_t order;
};

KronSeries stationary_vec_series(const Atom& atom, const VectorXd& vec_omega,
                                 const SeriesOptions& options) {
  const MatrixXd k = kron(atom.a, atom.a);
  VectorXd term = vec_omega;
  VectorXd sum = VectorXd::Zero(vec_omega.size());
  const double rate_floor = std::min(0.999999, atom.radius * atom.radius);
  double previous = 0.0;
  for (std::size_t v = 0;; ++v) {
    sum += term;
    const double size = max_abs(term);
    if (size < options.tol) {
      return {sum, detail::geometric_tail(size, previous, rate_floor, v, max_abs(sum)), v};
    }
    if (v >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("spectral moment form: stationary series did not converge",
                            detail::geometric_tail(size, previous, rate_floor, v, 0.0));
    }
    previous = size;
    term = (k * term).eval();
  }
}

SpectralDensityValue zero_moment_joint(const std::vector<Atom>& atoms, const MatrixXd& omega_bar,
                                       const SeriesOptions& options) {
  const Eigen::Index p = omega_bar.rows();
  const VectorXd vec_omega = vec(omega_bar);

  std::vector<KronSeries> base;
  base.reserve(atoms.size());
  for (const auto& atom : atoms) base.push_back(stationary_vec_series(atom, vec_omega, options));

  // h = [I + sum_u (I (x) A^u + A^u (x) I)] g, applied through
  // (I (x) B) vec(G) = vec(B G) and (B (x) I) vec(G) = vec(G B').
  std::vector<MatrixXd> g;
  std::vector<MatrixXd> power(atoms.size(), MatrixXd::Identity(p, p));
  std::vector<double> amplification(atoms.size(), 1.0);
  VectorXd h = VectorXd::Zero(p * p);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    g.push_back(unvec(base[i].value, p));
    h += atoms[i].weight * base[i].value;
  }
  const double rate_floor = std::min(0.999999, max_radius(atoms));
  double previous = max_abs(h);
  for (std::size_t u = 1;; ++u) {
    double size = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      power[i] = (atoms[i].a * power[i]).eval();
      const MatrixXd increment = power[i] * g[i] + g[i] * power[i].transpose();
      h += atoms[i].weight * vec(increment);
      size += atoms[i].weight * max_abs(increment);
      amplification[i] += 2.0 * inf_norm(power[i]);
    }
    if (size < options.tol) {
      double propagated = 0.0;
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        // Remaining operator mass beyond u, geometric in the atom's radius.
        const double r = std::min(0.999999, atoms[i].radius);
        const double tail_mass = 2.0 * inf_norm(power[i]) * r / (1.0 - r);
        propagated += atoms[i].weight * (amplification[i] + tail_mass) * base[i].tail;
      }
      const double tail = detail::geometric_tail(size, previous, rate_floor, u, max_abs(h)) +
                          propagated;
      MatrixXcd value = unvec(h, p).cast<std::complex<double>>() / (2.0 * std::numbers::pi);
      return {0.0, value, u, tail / (2.0 * std::numbers::pi)};
    }
    if (u >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("spectral moment form: lag operator series did not converge",
                            detail::geometric_tail(size, previous, rate_floor, u, 0.0));
    }
    previous = size;
  }
}

SpectralDensityValue zero_moment_factorized(const std::vector<Atom>& atoms,
                                            const MatrixXd& omega_bar,
                                            const SeriesOptions& options) {
  const Eigen::Index p = omega_bar.rows();
  const Eigen::Index q = p * p;
  const MatrixXd id_p = MatrixXd::Identity(p, p);
  const double rate = std::min(0.999999, max_radius(atoms));

  // sum_v mu_{2v} = sum_v E{(A (x) A)^v}
  MatrixXd stationary = MatrixXd::Identity(q, q);
  std::vector<MatrixXd> kpow(atoms.size(), MatrixXd::Identity(q, q));
  double tail_stationary = 0.0;
  double previous = 1.0;
  for (std::size_t v = 1;; ++v) {
    MatrixXd term = MatrixXd::Zero(q, q);
    double size = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      kpow[i] = (kron(atoms[i].a, atoms[i].a) * kpow[i]).eval();
      term += atoms[i].weight * kpow[i];
      size += atoms[i].weight * max_abs(kpow[i]);
    }
    stationary += term;
    if (size < options.tol) {
      tail_stationary = detail::geometric_tail(size, previous, rate * rate, v, max_abs(stationary));
      break;
    }
    if (v >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("spectral moment form: sum of mu_2v did not converge", size);
    }
    previous = size;
  }

  // I + sum_u (E{I (x) A^u} + E{A^u (x) I})
  MatrixXd lag_operator = MatrixXd::Identity(q, q);
  std::vector<MatrixXd> apow(atoms.size(), id_p);
  double tail_lag = 0.0;
  previous = 1.0;
  for (std::size_t u = 1;; ++u) {
    MatrixXd term = MatrixXd::Zero(q, q);
    double size = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      apow[i] = (atoms[i].a * apow[i]).eval();
      const MatrixXd both = kron(id_p, apow[i]) + kron(apow[i], id_p);
      term += atoms[i].weight * both;
      size += atoms[i].weight * max_abs(both);
    }
    lag_operator += term;
    if (size < options.tol) {
      tail_lag = detail::geometric_tail(size, previous, rate, u, max_abs(lag_operator));
      break;
    }
    if (u >= options.max_terms || !std::isfinite(size)) {
      throw TruncationError("spectral moment form: lag operator did not converge", size);
    }
    previous = size;
  }

  const VectorXd vec_omega = vec(omega_bar);
  const VectorXd g = stationary * vec_omega;
  const VectorXd h = lag_operator * g;
  const double tail = inf_norm(lag_operator) * tail_stationary * max_abs(vec_omega) * q +
                      tail_lag * q * max_abs(g);
  MatrixXcd value = unvec(h, p).cast<std::complex<double>>() / (2.0 * std::numbers::pi);
  return {0.0, value, 0, tail / (2.0 * std::numbers::pi)};
}

}  // namespace

SpectralDensityValue spectral_density_zero_moment_form(const CoefficientDistribution& dist,
                                                       const MatrixXd& omega_bar,
                                                       const SeriesOptions& options,
                                                       const ExpectationMode& mode,
                                                       MomentFactorization factorization) {
  check_omega(omega_bar, dist.order(), "spectral_density_zero_moment_form");
  const auto atoms = load_atoms(dist, mode);
  for (const auto& atom : atoms) {
    if (!(atom.radius < 1.0 - kDefaultBoundaryTol)) {
      throw NonstationaryError(
          "spectral moment form: [I - I (x) A]^2 is not invertible for some coefficient "
          "draw; the spectral density does not exist");
    }
  }
  return factorization == MomentFactorization::joint
             ? zero_moment_joint(atoms, omega_bar, options)
             : zero_moment_factorized(atoms, omega_bar, options);
}

SpectralExistence spectral_existence_check(const CoefficientDistribution& dist, double tol,
                                           const SamplingOptions& sampling) {
  if (!(tol > 0.0 && tol <= 0.1)) {
    throw InvalidArgument("stationarity tolerance must lie in (0, 0.1]");
  }
  std::vector<Atom> atoms;
  if (dist.is_gaussian()) {
    SamplingOptions raw = sampling;
    raw.stationary_only = false;
    atoms = load_atoms(dist, ExpectationMode::sample(raw));
  } else {
    atoms = load_atoms(dist, ExpectationMode::exact());
  }
  SpectralExistence result;
  std::size_t violating = 0;
  for (const auto& atom : atoms) {
    result.worst_radius = std::max(result.worst_radius, atom.radius);
    if (!(atom.radius < 1.0 - tol)) {
      result.violating_mass += atom.weight;
      ++violating;
    }
  }
  result.exists = violating == 0;
  std::ostringstream out;
  if (result.exists) {
    out << "all " << atoms.size() << (dist.is_gaussian() ? " sampled draws" : " atoms")
        << " have spectral radius below 1 - tol (largest " << result.worst_radius << ")";
  } else {
    out << violating << " of " << atoms.size()
        << (dist.is_gaussian() ? " sampled draws" : " atoms")
        << " have spectral radius >= 1 - tol (probability mass " << result.violating_mass
        << ", largest radius " << result.worst_radius
        << "); [I - I (x) A]^2 is singular for those draws";
  }
  result.diagnostic = out.str();
  return result;
}

}  // namespace rcar
