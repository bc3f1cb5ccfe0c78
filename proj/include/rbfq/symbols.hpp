#pragma once

#include <map>
#include <optional>
#include <string>

#include "json.hpp"
#include "rbfq/poly.hpp"

namespace rbfq {

enum class RbfKind { linear, cubic, multiquadric, thinplate };

// Radial profile r -> phi(r).  Profiles that grow like |r| may be split into
// phi = growth + decay, where growth is the piecewise-polynomial part; the
// split keeps far-field stencil sums free of cancellation.
struct RadialProfile {
  RbfKind kind = RbfKind::linear;
  double shape_c = 0.0;

  double operator()(double r) const;
  // True when phi = |r| + decay(r) with decay -> 0.
  bool has_linear_growth_split() const { return kind == RbfKind::multiquadric; }
  double decay_part(double r) const;
};

struct RbfSymbol {
  std::string name;
  int dim = 1;
  RadialProfile phi;
  double shape_c = 0.0;
  PowerSeries F_taylor{Polynomial(1), 0};
  HomogeneousPolynomial G{Polynomial(1), 0};
  double b = 0.0;
  std::optional<HomogeneousPolynomial> G0;
  double theta = 1.0;
  int m0 = 0;
  int m1 = 1;
  double m2 = 0.0;
  int ell0 = 0;
  int ell = 0;
  Polynomial P{1};

  int n0() const { return G0 ? G0->degree() : 0; }
  // Smoothness demanded of the reproducing basis feeding mu.
  int basis_k() const { return 2 * m1 + m0 + 1; }

  nlohmann::json to_json() const;
};

struct DerivedParameters {
  double m2 = 0.0;
  int ell0 = 0;
  int ell = 0;
};

inline constexpr double kEulerGamma = 0.57721566490153286061;

// Catalog entries: ("linear",1), ("cubic",1), ("multiquadric",1; c),
// ("thinplate",2).
RbfSymbol catalog_lookup(const std::string& name, int dim,
                         const std::map<std::string, double>& params = {});

// Recomputes m2, ell0, ell from (m0, theta, b, n0, m1); throws when the
// stored fields disagree.
DerivedParameters derived_parameters(const RbfSymbol& sym);

// Coefficient of xi^2 in the Taylor part of F for the 1-d multiquadric:
// -2 z K_1(z), z = c|xi|, with the c^2 xi^2 log|xi| term split off.
double multiquadric_xi2_coefficient(double c);

}  // namespace rbfq
