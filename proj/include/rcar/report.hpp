#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rcar/config.hpp"
#include "rcar/estimators.hpp"
#include "rcar/harness.hpp"

namespace rcar {

inline constexpr int kSchemaVersion = 1;

Json to_json(const MatrixXd& m);
Json to_json(const MatrixXcd& m);

/// {schema_version, kind, config, result}.
Json envelope(const std::string& kind, const Json& effective_config, Json result);

/// Stationarity verdicts, covariance tables and spectral samples for the model
/// section. A nonstationary model yields a verdict without tables.
Json analyze_model(const Config& config);

/// Estimation output for the selected pathways, the stationary-start
/// diagnostic and, when `truth` is present, error columns against it.
Json estimation_json(const Panel& panel, const Config& config,
                     const std::optional<std::vector<IndividualDraw>>& truth);

Json to_json(const ExperimentResult& result);

/// Pretty-printed JSON with a trailing newline.
std::string dump(const Json& j);

}  // namespace rcar
