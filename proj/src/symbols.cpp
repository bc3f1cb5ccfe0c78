#include "rbfq/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rbfq/error.hpp"

namespace rbfq {

double RadialProfile::operator()(double r) const {
  r = std::abs(r);
  switch (kind) {
    case RbfKind::linear:
      return r;
    case RbfKind::cubic:
      return r * r * r;
    case RbfKind::multiquadric:
      return std::sqrt(r * r + shape_c * shape_c);
    case RbfKind::thinplate:
      return r == 0.0 ? 0.0 : r * r * std::log(r);
  }
  return 0.0;
}

double RadialProfile::decay_part(double r) const {
  r = std::abs(r);
  if (kind != RbfKind::multiquadric) return 0.0;
  // sqrt(r^2 + c^2) - r, written without cancellation.
  const double c2 = shape_c * shape_c;
  return c2 / (r + std::sqrt(r * r + c2));
}

double multiquadric_xi2_coefficient(double c) {
  // z K_1(z) = 1 + (z^2/2)(log(z/2) + gamma - 1/2) + O(z^4 log z)
  return -c * c * (std::log(c / 2.0) + kEulerGamma - 0.5);
}

namespace {

HomogeneousPolynomial norm_power(int dim, int m) {
  // ||xi||^{2m}
  Polynomial sq(dim);
  for (int i = 0; i < dim; ++i) {
    MultiIndex e(dim, 0);
    e[i] = 2;
    sq.add_term(e, 1.0);
  }
  Polynomial p = Polynomial::constant(dim, 1.0);
  for (int i = 0; i < m; ++i) p = p * sq;
  return HomogeneousPolynomial(p, 2 * m);
}

void finish(RbfSymbol& s) {
  const DerivedParameters d = [&] {
    DerivedParameters out;
    out.m2 = s.b == 0.0 ? s.m0 + s.theta : std::min(s.m0 + s.theta, static_cast<double>(s.n0()));
    out.ell0 = std::min(s.m0, 2 * s.m1 - 1);
    out.ell = std::min(s.m0 - 1, 2 * s.m1 - 1);
    return out;
  }();
  s.m2 = d.m2;
  s.ell0 = d.ell0;
  s.ell = d.ell;
  s.P = build_symbol_P(series_reciprocal(s.F_taylor, s.m0), s.G);
}

}  // namespace

RbfSymbol catalog_lookup(const std::string& name, int dim,
                         const std::map<std::string, double>& params) {
  RbfSymbol s;
  s.name = name;
  s.dim = dim;
  s.theta = 1.0;
  if (name == "linear" && dim == 1) {
    s.phi = {RbfKind::linear, 0.0};
    s.F_taylor = PowerSeries(Polynomial::constant(1, -2.0), 3);
    s.G = norm_power(1, 1);
    s.m1 = 1;
    s.m0 = 3;
  } else if (name == "cubic" && dim == 1) {
    s.phi = {RbfKind::cubic, 0.0};
    s.F_taylor = PowerSeries(Polynomial::constant(1, 12.0), 4);
    s.G = norm_power(1, 2);
    s.m1 = 2;
    s.m0 = 4;
  } else if (name == "multiquadric" && dim == 1) {
    const auto it = params.find("c");
    const double c = it == params.end() ? 1.0 : it->second;
    if (!(c > 0.0)) throw Error("catalog_lookup: multiquadric needs shape parameter c > 0");
    s.shape_c = c;
    s.phi = {RbfKind::multiquadric, c};
    Polynomial f = Polynomial::constant(1, -2.0);
    f.add_term({2}, multiquadric_xi2_coefficient(c));
    s.F_taylor = PowerSeries(f, 2);
    s.G = norm_power(1, 1);
    s.b = -c * c;
    s.G0 = norm_power(1, 1);
    s.m1 = 1;
    s.m0 = 2;
  } else if (name == "thinplate" && dim == 2) {
    s.phi = {RbfKind::thinplate, 0.0};
    s.F_taylor = PowerSeries(Polynomial::constant(2, 8.0 * std::numbers::pi), 4);
    s.G = norm_power(2, 2);
    s.m1 = 2;
    s.m0 = 4;
  } else {
    throw Error("catalog_lookup: unknown symbol '" + name + "' in dimension " +
                std::to_string(dim));
  }
  finish(s);
  return s;
}

DerivedParameters derived_parameters(const RbfSymbol& sym) {
  DerivedParameters d;
  d.m2 = sym.b == 0.0 ? sym.m0 + sym.theta
                      : std::min(sym.m0 + sym.theta, static_cast<double>(sym.n0()));
  d.ell0 = std::min(sym.m0, 2 * sym.m1 - 1);
  d.ell = std::min(sym.m0 - 1, 2 * sym.m1 - 1);
  if (d.m2 != sym.m2 || d.ell0 != sym.ell0 || d.ell != sym.ell)
    throw Error("derived_parameters: stored m2/ell0/ell disagree with (m0, theta, b, n0, m1)");
  if (sym.G.degree() != 2 * sym.m1) throw Error("derived_parameters: deg G != 2 m1");
  // Constant F gives a reciprocal series with no higher terms, so deg P can
  // fall short of m0 + 2 m1 but never exceed it.
  if (sym.P.degree() > sym.m0 + 2 * sym.m1 || sym.P.degree() < 2 * sym.m1)
    throw Error("derived_parameters: deg P exceeds m0 + 2 m1");
  return d;
}

nlohmann::json RbfSymbol::to_json() const {
  nlohmann::json j = {{"name", name},
                      {"dim", dim},
                      {"shape_c", shape_c},
                      {"F_taylor", F_taylor.poly().to_json()},
                      {"F_order", F_taylor.order()},
                      {"G", G.poly().to_json()},
                      {"b", b},
                      {"theta", theta},
                      {"m0", m0},
                      {"m1", m1},
                      {"m2", m2},
                      {"ell0", ell0},
                      {"ell", ell},
                      {"P", P.to_json()}};
  if (G0) j["G0"] = G0->poly().to_json();
  return j;
}

}  // namespace rbfq
