#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rcar/model.hpp"
#include "rcar/random.hpp"

namespace rcar {

/// Run B steps from `initial_state` (zeros by default) and discard them.
struct BurnIn {
  int steps = 500;
  std::optional<VectorXd> initial_state;
};
/// Draw the initial state from N(0, Gamma(0)) of the individual's own draw.
struct ExactStationary {};
/// Initial state sum_{j=0}^{J} A^j eta_{-j}, eta = (0, ..., 0, e)'.
struct MaTruncation {
  int terms = 50;
};

using InitMode = std::variant<BurnIn, ExactStationary, MaTruncation>;

std::string init_mode_name(const InitMode& init);
void validate(const InitMode& init);

enum class NonstationaryPolicy { reject_and_redraw, keep_and_flag };

struct DrawOptions {
  NonstationaryPolicy policy = NonstationaryPolicy::reject_and_redraw;
  std::size_t max_redraws = 1000000;
  double boundary_tol = kDefaultBoundaryTol;
};

struct IndividualDraw {
  CoefficientVector coeffs;
  double sigma2;
  bool stationary;
  std::size_t redraws;
};

/// One individual's (coefficients, sigma^2). Under reject_and_redraw a
/// nonstationary coefficient draw is discarded; more than max_redraws
/// consecutive rejections throw NonstationaryError.
IndividualDraw draw_individual(const ModelSpec& spec, NormalStream& stream,
                               const DrawOptions& options = {});

/// y_0..y_T of one individual. y_0 is the last component of the initial
/// state; sigma2 may be 0 for a noiseless recursion.
VectorXd simulate_path(const CoefficientVector& coeffs, double sigma2, int T,
                       const InitMode& init, NormalStream& stream);

/// Independent streams of individual omega (1-based).
struct IndividualStreams {
  NormalStream coefficients;
  NormalStream innovations;
};
IndividualStreams individual_streams(std::uint64_t seed, int omega);

using PanelMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Panel {
  int N = 0;
  int T = 0;
  int p = 1;
  PanelMatrix y;  // N x (T + 1); row omega-1 holds individual omega
  std::optional<std::vector<IndividualDraw>> truth;
  InitMode init = ExactStationary{};
  std::optional<std::uint64_t> seed;

  /// Observations of individual omega (1-based).
  VectorXd series(int omega) const { return y.row(omega - 1).transpose(); }
  /// Throws InvalidArgument on shape mismatch or non-finite observations.
  void validate() const;
};

/// Panel of spec.N individuals, each driven only by streams derived from
/// (seed, omega); the result is independent of thread count.
Panel simulate_panel(const ModelSpec& spec, std::uint64_t seed, const InitMode& init,
                     bool keep_truth, const DrawOptions& options = {},
                     unsigned threads = 1);

}  // namespace rcar
