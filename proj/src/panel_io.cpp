#include "rcar/panel_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>
#include <unistd.h>

namespace rcar {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path temp = target;
  temp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + temp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + temp.string() + "'");
  }
  std::error_code ec;
  fs::rename(temp, target, ec);
  if (ec) {
    fs::remove(temp);
    throw Error("cannot rename '" + temp.string() + "' to '" + path + "': " + ec.message());
  }
}

std::string format_panel_csv(const Panel& panel) {
  panel.validate();
  std::string out = "omega,t,y\n";
  out.reserve(out.size() + static_cast<std::size_t>(panel.N) * (panel.T + 1) * 32);
  for (int omega = 1; omega <= panel.N; ++omega) {
    for (int t = 0; t <= panel.T; ++t) {
      out += std::to_string(omega);
      out += ',';
      out += std::to_string(t);
      out += ',';
      out += format_double(panel.y(omega - 1, t));
      out += '\n';
    }
  }
  return out;
}

void write_panel_csv(const Panel& panel, const std::string& path) {
  write_atomic(path, format_panel_csv(panel));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
T parse_field(std::string_view text, const char* name, std::size_t line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DataError("cannot parse " + std::string(name) + " '" + std::string(text) + "'", line);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw DataError(std::string(name) + " must be finite", line);
    }
  }
  return value;
}

void expect_header(std::istream& in, const std::vector<std::string>& expected,
                   std::size_t& line_no, bool prefix) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: missing header", 1);
  ++line_no;
  const auto fields = split(trim(line));
  bool ok = prefix ? fields.size() >= expected.size() : fields.size() == expected.size();
  for (std::size_t i = 0; ok && i < expected.size(); ++i) ok = fields[i] == expected[i];
  if (!ok) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw DataError("header must be '" + want + (prefix ? ",..." : "") + "'", line_no);
  }
}

}  // namespace

Panel parse_panel_csv(std::istream& in, int p) {
  if (p < 1) throw InvalidArgument("parse_panel_csv: p must be >= 1");
  std::size_t line_no = 0;
  expect_header(in, {"omega", "t", "y"}, line_no, false);

  std::vector<std::vector<double>> series;
  int expected_T = -1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split(body);
    if (fields.size() != 3) {
      throw DataError("expected 3 fields, found " + std::to_string(fields.size()), line_no);
    }
    const int omega = parse_field<int>(fields[0], "omega", line_no);
    const int t = parse_field<int>(fields[1], "t", line_no);
    const double y = parse_field<double>(fields[2], "y", line_no);

    const int current = static_cast<int>(series.size());
    if (current > 0 && omega == current && t == static_cast<int>(series.back().size())) {
      series.back().push_back(y);
      continue;
    }
    if (omega == current + 1 && t == 0) {
      if (current > 0) {
        const int T = static_cast<int>(series.back().size()) - 1;
        if (expected_T < 0) expected_T = T;
        if (T != expected_T) {
          throw DataError("individual " + std::to_string(current) + " has T = " +
                              std::to_string(T) + ", expected " + std::to_string(expected_T) +
                              " (dense grid required)",
                          line_no);
        }
      }
      series.push_back({y});
      continue;
    }
    const std::string expected =
        current == 0 ? "(1, 0)"
                     : "(" + std::to_string(current) + ", " +
                           std::to_string(series.back().size()) + ") or (" +
                           std::to_string(current + 1) + ", 0)";
    throw DataError("row (" + std::to_string(omega) + ", " + std::to_string(t) +
                        ") out of order, duplicated or missing a predecessor; expected " +
                        expected,
                    line_no);
  }
  if (series.empty()) throw DataError("no data rows", line_no);
  const int T = static_cast<int>(series.back().size()) - 1;
  if (expected_T >= 0 && T != expected_T) {
    throw DataError("individual " + std::to_string(series.size()) + " has T = " +
                        std::to_string(T) + ", expected " + std::to_string(expected_T) +
                        " (dense grid required)",
                    line_no);
  }
  if (T < p - 1) {
    throw DataError("T = " + std::to_string(T) + " is too short for p = " + std::to_string(p));
  }

  Panel panel;
  panel.N = static_cast<int>(series.size());
  panel.T = T;
  panel.p = p;
  panel.y.resize(panel.N, T + 1);
  for (int i = 0; i < panel.N; ++i) {
    for (int t = 0; t <= T; ++t) panel.y(i, t) = series[i][t];
  }
  return panel;
}

Panel read_panel_csv(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open panel file '" + path + "'");
  return parse_panel_csv(in, p);
}

std::string format_truth_csv(const std::vector<IndividualDraw>& truth) {
  if (truth.empty()) throw InvalidArgument("format_truth_csv: empty truth");
  const int p = truth.front().coeffs.order();
  std::string out = "omega,sigma2";
  for (int k = 1; k <= p; ++k) out += ",alpha" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out += std::to_string(i + 1) + ',' + format_double(truth[i].sigma2);
    for (int k = 0; k < p; ++k) out += ',' + format_double(truth[i].coeffs[k]);
    out += '\n';
  }
  return out;
}

void write_truth_csv(const std::vector<IndividualDraw>& truth, const std::string& path) {
  write_atomic(path, format_truth_csv(truth));
}

std::vector<IndividualDraw> parse_truth_csv(std::istream& in) {
  std::size_t line_no = 0;
  std::string header;
  if (!std::getline(in, header)) throw DataError("empty sidecar: missing header", 1);
  ++line_no;
  const auto names = split(trim(header));
  const int p = static_cast<int>(names.size()) - 2;
  bool ok = p >= 1 && names[0] == "omega" && names[1] == "sigma2";
  for (int k = 1; ok && k <= p; ++k) ok = names[k + 1] == "alpha" + std::to_string(k);
  if (!ok) throw DataError("sidecar header must be 'omega,sigma2,alpha1..alphap'", line_no);

  std::vector<IndividualDraw> truth;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto fields = split(body);
    if (static_cast<int>(fields.size()) != p + 2) {
      throw DataError("expected " + std::to_string(p + 2) + " fields", line_no);
    }
    const int omega = parse_field<int>(fields[0], "omega", line_no);
    if (omega != static_cast<int>(truth.size()) + 1) {
      throw DataError("sidecar rows must list omega = 1, 2, ... in order", line_no);
    }
    const double sigma2 = parse_field<double>(fields[1], "sigma2", line_no);
    VectorXd alpha(p);
    for (int k = 0; k < p; ++k) alpha(k) = parse_field<double>(fields[k + 2], "alpha", line_no);
    CoefficientVector coeffs(alpha);
    const bool stationary = is_stationary_draw(coeffs);
    truth.push_back({std::move(coeffs), sigma2, stationary, 0});
  }
  if (truth.empty()) throw DataError("sidecar has no data rows", line_no);
  return truth;
}

std::vector<IndividualDraw> read_truth_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open sidecar file '" + path + "'");
  return parse_truth_csv(in);
}

std::string truth_path_for(const std::string& panel_path) {
  std::filesystem::path path(panel_path);
  const std::string stem = path.extension() == ".csv" ? path.stem().string()
                                                      : path.filename().string();
  return (path.parent_path() / (stem + ".truth.csv")).string();
}

}  // namespace rcar
