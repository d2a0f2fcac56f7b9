#pragma once

#include <istream>
#include <string>
#include <vector>

#include "rcar/simulator.hpp"

namespace rcar {

/// 17 significant digits ("%.17g"); parses back to the identical double.
std::string format_double(double x);

/// Writes `content` to a temporary file beside `path`, then renames it over
/// `path`. Throws Error on IO failure.
void write_atomic(const std::string& path, const std::string& content);

/// Panel CSV: header `omega,t,y`, one row per (omega, t) sorted by omega then t.
std::string format_panel_csv(const Panel& panel);
void write_panel_csv(const Panel& panel, const std::string& path);

/// Parses a panel CSV. Rows must cover omega = 1..N and t = 0..T exactly once,
/// in order; violations raise DataError with the 1-based line number.
Panel parse_panel_csv(std::istream& in, int p);
Panel read_panel_csv(const std::string& path, int p);

/// Truth sidecar: header `omega,sigma2,alpha1..alphap`, one row per individual.
std::string format_truth_csv(const std::vector<IndividualDraw>& truth);
void write_truth_csv(const std::vector<IndividualDraw>& truth, const std::string& path);
std::vector<IndividualDraw> parse_truth_csv(std::istream& in);
std::vector<IndividualDraw> read_truth_csv(const std::string& path);

/// `<stem>.truth.csv` next to the panel file.
std::string truth_path_for(const std::string& panel_path);

}  // namespace rcar
