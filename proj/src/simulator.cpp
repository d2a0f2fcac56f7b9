#include "rcar/simulator.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "rcar/covariance.hpp"
#include "rcar/parallel.hpp"

namespace rcar {

unsigned default_threads() {
  if (const char* env = std::getenv("RCAR_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return 1;
}

std::string init_mode_name(const InitMode& init) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BurnIn>) return "burn_in";
        if constexpr (std::is_same_v<T, ExactStationary>) return "exact_stationary";
        if constexpr (std::is_same_v<T, MaTruncation>) return "ma_truncation";
      },
      init);
}

void validate(const InitMode& init) {
  if (const auto* b = std::get_if<BurnIn>(&init); b && b->steps < 0) {
    throw InvalidArgument("burn_in: B must be >= 0");
  }
  if (const auto* m = std::get_if<MaTruncation>(&init); m && m->terms < 1) {
    throw InvalidArgument("ma_truncation: J must be >= 1");
  }
}

IndividualDraw draw_individual(const ModelSpec& spec, NormalStream& stream,
                               const DrawOptions& options) {
  const bool reject = options.policy == NonstationaryPolicy::reject_and_redraw;
  if (reject && !spec.coefficients.is_gaussian()) {
    bool any_stationary = false;
    for (const auto& atom : spec.coefficients.atoms()) {
      any_stationary = any_stationary || is_stationary_draw(atom.value, options.boundary_tol);
    }
    if (!any_stationary) {
      throw NonstationaryError(
          "draw_individual: every coefficient atom lies outside the stationarity region; "
          "redraws cannot succeed");
    }
  }
  for (std::size_t redraws = 0;; ++redraws) {
    CoefficientVector coeffs = spec.coefficients.draw(stream);
    const bool stationary = is_stationary_draw(coeffs, options.boundary_tol);
    if (stationary || !reject) {
      const double sigma2 = spec.noise.draw(stream);
      return {std::move(coeffs), sigma2, stationary, redraws};
    }
    if (redraws >= options.max_redraws) {
      throw NonstationaryError("draw_individual: " + std::to_string(options.max_redraws) +
                               " consecutive nonstationary draws; distribution mass is "
                               "predominantly nonstationary");
    }
  }
}

namespace {

void require_stationary(const CoefficientVector& coeffs, const char* mode) {
  if (!is_stationary_draw(coeffs)) {
    throw NonstationaryError(std::string("simulate_path: ") + mode +
                             " initialization needs a stationary coefficient draw");
  }
}

}  // namespace

VectorXd simulate_path(const CoefficientVector& coeffs, double sigma2, int T,
                       const InitMode& init, NormalStream& stream) {
  if (T < 0) throw InvalidArgument("simulate_path: T must be >= 0");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw InvalidArgument("simulate_path: sigma2 must be finite and >= 0");
  }
  validate(init);
  const int p = coeffs.order();
  const double sd = std::sqrt(sigma2);
  const MatrixXd a = companion_matrix(coeffs.alpha());
  const VectorXd bottom = a.row(p - 1).transpose();

  VectorXd state = VectorXd::Zero(p);  // (y_{t-p+1}, ..., y_t)
  auto step = [&] {
    const double next = bottom.dot(state) + sd * stream();
    for (int k = 0; k + 1 < p; ++k) state(k) = state(k + 1);
    state(p - 1) = next;
  };

  if (const auto* b = std::get_if<BurnIn>(&init)) {
    if (b->initial_state) {
      if (b->initial_state->size() != p) {
        throw InvalidArgument("burn_in: initial state must have length p");
      }
      state = *b->initial_state;
    }
    for (int i = 0; i < b->steps; ++i) step();
  } else if (std::holds_alternative<ExactStationary>(init)) {
    require_stationary(coeffs, "exact_stationary");
    const MatrixXd gamma0 = gamma0_direct(a, omega_matrix(p, sigma2));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gamma0);
    const MatrixXd factor =
        eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    VectorXd z(p);
    for (int k = 0; k < p; ++k) z(k) = stream();
    state = factor * z;
  } else {
    const int terms = std::get<MaTruncation>(init).terms;
    require_stationary(coeffs, "ma_truncation");
    MatrixXd power = MatrixXd::Identity(p, p);
    for (int j = 0; j <= terms; ++j) {
      state += power.col(p - 1) * (sd * stream());
      power = (a * power).eval();
    }
  }

  VectorXd y(T + 1);
  y(0) = state(p - 1);
  for (int t = 1; t <= T; ++t) {
    step();
    y(t) = state(p - 1);
  }
  if (!y.allFinite()) {
    throw NumericalError("simulate_path: observations overflowed to non-finite values");
  }
  return y;
}

IndividualStreams individual_streams(std::uint64_t seed, int omega) {
  const auto id = static_cast<std::uint64_t>(omega);
  return {NormalStream(make_stream(
              seed, {static_cast<std::uint64_t>(StreamPurpose::coefficients), id})),
          NormalStream(make_stream(
              seed, {static_cast<std::uint64_t>(StreamPurpose::innovations), id}))};
}

void Panel::validate() const {
  if (N < 1 || T < 0 || p < 1) throw InvalidArgument("panel: invalid dimensions");
  if (y.rows() != N || y.cols() != T + 1) throw InvalidArgument("panel: observation shape mismatch");
  if (!y.allFinite()) throw InvalidArgument("panel: non-finite observations");
  if (truth && static_cast<int>(truth->size()) != N) {
    throw InvalidArgument("panel: truth must have exactly N entries");
  }
}

namespace {

[[noreturn]] void rethrow_for_individual(int omega) {
  const std::string where = "individual " + std::to_string(omega) + ": ";
  try {
    throw;
  } catch (const NonstationaryError& e) {
    throw NonstationaryError(where + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(where + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(where + e.what());
  }
}

}  // namespace

Panel simulate_panel(const ModelSpec& spec, std::uint64_t seed, const InitMode& init,
                     bool keep_truth, const DrawOptions& options, unsigned threads) {
  spec.validate();
  validate(init);
  Panel panel;
  panel.N = spec.N;
  panel.T = spec.T;
  panel.p = spec.p;
  panel.init = init;
  panel.seed = seed;
  panel.y.resize(spec.N, spec.T + 1);
  std::vector<std::optional<IndividualDraw>> draws(spec.N);

  parallel_for(static_cast<std::size_t>(spec.N), threads, [&](std::size_t i) {
    const int omega = static_cast<int>(i) + 1;
    try {
      auto streams = individual_streams(seed, omega);
      IndividualDraw draw = draw_individual(spec, streams.coefficients, options);
      panel.y.row(static_cast<Eigen::Index>(i)) =
          simulate_path(draw.coeffs, draw.sigma2, spec.T, init, streams.innovations).transpose();
      draws[i] = std::move(draw);
    } catch (...) {
      rethrow_for_individual(omega);
    }
  });

  if (keep_truth) {
    std::vector<IndividualDraw> truth;
    truth.reserve(draws.size());
    for (auto& d : draws) truth.push_back(std::move(*d));
    panel.truth = std::move(truth);
  }
  return panel;
}

}  // namespace rcar
