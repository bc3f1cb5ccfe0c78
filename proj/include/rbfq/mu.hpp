#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rbfq/centers.hpp"
#include "rbfq/poly.hpp"
#include "rbfq/repro_basis.hpp"
#include "rbfq/symbols.hpp"

namespace rbfq {

// Banded coefficient family mu_{alpha beta}.  Lattice families are stored as
// a translation-invariant stencil mu_{beta - alpha}; scattered families as
// sparse rows.
struct MuCoeffs {
  int dim = 1;
  std::shared_ptr<const CenterSet> centers;
  // Entries vanish for |alpha - beta| >= bandwidth.
  double bandwidth = 0.0;
  // Lattice stencil on [-J, J]^dim, row-major with j0 outermost.
  std::optional<int> stencil_halfwidth;
  std::vector<double> stencil;
  // Scattered rows: row[alpha] = {(beta, value)} sorted by beta.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  // Polynomial degree up to which the moment rule is certified.
  int certified_degree = 0;
  std::string source;

  bool is_lattice() const { return stencil_halfwidth.has_value(); }
  double stencil_at(int j0, int j1 = 0) const;
  // Stencil offsets with nonzero value, with their values.
  std::vector<std::pair<std::array<int, 2>, double>> stencil_entries() const;
  double entry(std::size_t alpha, std::size_t beta) const;
  std::vector<std::pair<std::size_t, double>> row(std::size_t alpha) const;
  // Rows closer than the bandwidth to the window boundary are untrusted.
  bool trusted(std::size_t alpha) const;

  nlohmann::json to_json() const;
};

enum class MuForm { automatic, weak, strong };

struct MuQuadratureOptions {
  MuForm form = MuForm::automatic;
  // Gauss-Legendre nodes per cell = multiplier * (piece degree + 1).
  int node_multiplier = 1;
};

// mu_{alpha beta} = int N_alpha P(iD) N_beta by cellwise Gauss-Legendre.
MuCoeffs compute_mu_quadrature(const ReproBasis& basis, const Polynomial& P,
                               const MuQuadratureOptions& options = {});

// Central difference stencil with symbol T_{m0}(0) G(iD) on a lattice.
MuCoeffs preset_mu_difference(const RbfSymbol& sym, std::shared_ptr<const CenterSet> centers);

struct MuInvariantReport {
  double symmetry = 0.0;
  double bandwidth = 0.0;
  double annihilation = 0.0;
  double moment_rule = 0.0;  // lattice only
  int degree_cap = 0;
  bool symmetry_pass = false;
  bool bandwidth_pass = false;
  bool annihilation_pass = false;
  bool moment_pass = false;
  bool pass() const { return symmetry_pass && bandwidth_pass && annihilation_pass && moment_pass; }
  nlohmann::json to_json() const;
};

// Basis of ker G(D) within polynomials of degree <= cap.
std::vector<Polynomial> kernel_basis(const HomogeneousPolynomial& G, int cap);

MuInvariantReport mu_invariant_report(const MuCoeffs& mu, const RbfSymbol& sym, int degree_cap,
                                      double tol = 1e-8);

// The family used for certified reproduction: preset stencils for the
// second-order symbols, degree-(2 m1 + m0 + 1) quadrature otherwise.
MuCoeffs certified_mu(const RbfSymbol& sym, std::shared_ptr<const CenterSet> centers);

}  // namespace rbfq
