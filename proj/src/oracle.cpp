#include "rcar/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include "rcar/error.hpp"
#include "rcar/random.hpp"

namespace rcar::oracle {

std::pair<std::complex<double>, std::complex<double>> quadratic_roots(double a1, double a2) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(a1 * a1 + 4.0 * a2, 0.0));
  std::complex<double> r1 = (a1 + disc) / 2.0;
  std::complex<double> r2 = (a1 - disc) / 2.0;
  if (std::abs(r2) > std::abs(r1)) std::swap(r1, r2);
  return {r1, r2};
}

PartialSum ar1_gamma0_partial_sum(double a, double sigma2, double tol) {
  if (!(std::abs(a) < 1.0)) throw InvalidArgument("ar1_gamma0: need |a| < 1");
  PartialSum out;
  double term = sigma2;
  while (term >= tol && out.terms < 100000) {
    out.value += term;
    ++out.terms;
    term *= a * a;
  }
  return out;
}

double ar1_gamma0(double a, double sigma2) { return sigma2 / (1.0 - a * a); }

double scalar_upsilon(const std::vector<ScalarAtom>& atoms, double sigma2, int u) {
  double sum = 0.0;
  for (const auto& atom : atoms) {
    sum += atom.probability * std::pow(atom.a, u) * sigma2 / (1.0 - atom.a * atom.a);
  }
  return sum;
}

double scalar_spectral_zero(const std::vector<ScalarAtom>& atoms, double sigma2) {
  double sum = 0.0;
  for (const auto& atom : atoms) {
    sum += atom.probability * sigma2 / (2.0 * std::numbers::pi * (1.0 - atom.a) * (1.0 - atom.a));
  }
  return sum;
}

MatrixXd kron_brute(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index k = 0; k < b.rows(); ++k)
        for (Eigen::Index l = 0; l < b.cols(); ++l)
          out(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return out;
}

double kron_mixed_product_residual(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                                   const MatrixXd& d) {
  const MatrixXd lhs = kron_brute(a, b) * kron_brute(c, d);
  const MatrixXd rhs = kron_brute(a * c, b * d);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

namespace {

struct Args {
  std::map<std::string, double> named;
  std::vector<double> positional;

  double get(const std::string& key, std::size_t index, double fallback) const {
    if (auto it = named.find(key); it != named.end()) return it->second;
    return index < positional.size() ? positional[index] : fallback;
  }
};

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw InvalidArgument("oracle: cannot parse number '" + text + "'");
  return value;
}

Args parse_args(const std::vector<std::string>& raw) {
  Args args;
  for (const auto& item : raw) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      args.positional.push_back(parse_number(item));
    } else {
      args.named[item.substr(0, eq)] = parse_number(item.substr(eq + 1));
    }
  }
  return args;
}

std::string fmt(const char* pattern, double x) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::vector<ScalarAtom> two_atoms(const Args& args) {
  const double a1 = args.get("a1", 0, 0.2);
  const double a2 = args.get("a2", 1, 0.4);
  return {{a1, 0.5}, {a2, 0.5}};
}

Output two_atom_upsilon(const Args& args, int u) {
  const auto atoms = two_atoms(args);
  const double s2 = args.get("sigma2", 2, 1.0);
  Output out;
  out.name = "two_atom_upsilon" + std::to_string(u);
  double total = 0.0;
  for (const auto& atom : atoms) {
    const double addend = atom.probability * std::pow(atom.a, u) * s2 / (1.0 - atom.a * atom.a);
    out.derivation.push_back(fmt("a = %.17g", atom.a) +
                             fmt(": 0.5 * a^u * sigma2 / (1 - a^2) = %.17g", addend));
    out.values.emplace_back(fmt("addend a=%g", atom.a), addend);
    total += addend;
  }
  out.values.emplace_back("upsilon(" + std::to_string(u) + ")", total);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> registry() {
  return {
      {"two_atom_upsilon0", "[a1=0.2] [a2=0.4] [sigma2=1]  equal-weight scalar atoms, lag 0"},
      {"two_atom_upsilon2", "[a1=0.2] [a2=0.4] [sigma2=1]  equal-weight scalar atoms, lag 2"},
      {"telescoping", "[a1=0.2] [a2=0.4] [sigma2=1]  upsilon(0) - upsilon(2) = sigma2"},
      {"ar1_gamma0", "[a=0.5] [sigma2=1]  geometric partial sums of a^{2k} sigma2"},
      {"ar1_spectral0", "[a=0.5] [sigma2=1]  sigma2 / (2 pi (1 - a)^2)"},
      {"roots", "a1 a2  roots of z^2 - a1 z - a2"},
      {"kron_mixed_product", "[seed=1] [n=3]  brute-force (A(x)B)(C(x)D) = AC(x)BD residual"},
  };
}

Output run(const std::string& name, const std::vector<std::string>& raw) {
  const Args args = parse_args(raw);
  if (name == "two_atom_upsilon0") return two_atom_upsilon(args, 0);
  if (name == "two_atom_upsilon2") return two_atom_upsilon(args, 2);
  if (name == "telescoping") {
    const auto atoms = two_atoms(args);
    const double s2 = args.get("sigma2", 2, 1.0);
    const double y0 = scalar_upsilon(atoms, s2, 0);
    const double y2 = scalar_upsilon(atoms, s2, 2);
    Output out{"telescoping", {}, {}};
    out.derivation.push_back("sum_i w_i sigma2 (1 - a_i^2) / (1 - a_i^2) = sigma2");
    out.values = {{"upsilon(0)", y0}, {"upsilon(2)", y2}, {"difference", y0 - y2}};
    return out;
  }
  if (name == "ar1_gamma0") {
    const double a = args.get("a", 0, 0.5);
    const double s2 = args.get("sigma2", 1, 1.0);
    const PartialSum sum = ar1_gamma0_partial_sum(a, s2);
    Output out{"ar1_gamma0", {}, {}};
    out.derivation.push_back("sum_{k>=0} a^{2k} sigma2 over " + std::to_string(sum.terms) +
                             " terms");
    out.derivation.push_back("closed form sigma2 / (1 - a^2)");
    out.values = {{"partial_sum", sum.value}, {"closed_form", ar1_gamma0(a, s2)}};
    return out;
  }
  if (name == "ar1_spectral0") {
    const double a = args.get("a", 0, 0.5);
    const double s2 = args.get("sigma2", 1, 1.0);
    Output out{"ar1_spectral0", {"sigma2 / (2 pi (1 - a)^2)"}, {}};
    out.values = {{"S(0)", scalar_spectral_zero({{a, 1.0}}, s2)}};
    return out;
  }
  if (name == "roots") {
    if (args.positional.size() != 2 && args.named.size() != 2) {
      throw InvalidArgument("oracle roots: expected two coefficients a1 a2");
    }
    const double a1 = args.get("a1", 0, 0.0);
    const double a2 = args.get("a2", 1, 0.0);
    const auto [r1, r2] = quadratic_roots(a1, a2);
    Output out{"roots", {fmt("(a1 +- sqrt(a1^2 + 4 a2)) / 2, discriminant %.17g", a1 * a1 + 4 * a2)},
               {}};
    out.values = {{"root1_re", r1.real()}, {"root1_im", r1.imag() + 0.0},
                  {"root2_re", r2.real()}, {"root2_im", r2.imag() + 0.0}};
    return out;
  }
  if (name == "kron_mixed_product") {
    const auto seed = static_cast<std::uint64_t>(args.get("seed", 0, 1.0));
    const auto n = static_cast<Eigen::Index>(args.get("n", 1, 3.0));
    if (n < 1 || n > 8) throw InvalidArgument("oracle kron_mixed_product: n must be in [1, 8]");
    NormalStream stream(make_stream(seed, {99}));
    auto draw = [&] {
      MatrixXd m(n, n);
      for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = stream();
      return m;
    };
    const MatrixXd a = draw(), b = draw(), c = draw(), d = draw();
    Output out{"kron_mixed_product", {"explicit index loops, no library Kronecker product"}, {}};
    out.values = {{"max_abs_residual", kron_mixed_product_residual(a, b, c, d)}};
    return out;
  }
  throw InvalidArgument("oracle: unknown subcase '" + name + "'");
}

}  // namespace rcar::oracle
