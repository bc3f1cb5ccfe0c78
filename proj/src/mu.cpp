#include "rbfq/mu.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "rbfq/error.hpp"
#include "rbfq/quadrature.hpp"

namespace rbfq {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Real factor i^t for even t; odd t are rejected by the caller.
double i_power_real(int t) { return (t / 2) % 2 == 0 ? 1.0 : -1.0; }

struct FormChoice {
  bool weak = false;
};

FormChoice choose_form(const ReproBasis& basis, const Polynomial& P, MuForm form) {
  const int deg = P.degree();
  const int available = basis.kind() == BasisKind::lattice ? basis.spline_order() - 1 : basis.k();
  const int half = (deg + 1) / 2;
  const bool strong_ok = deg <= basis.k() && deg <= available;
  const bool weak_ok = half <= available && half <= basis.k();
  if (form == MuForm::strong) {
    if (!strong_ok)
      throw Error("compute_mu_quadrature: strong form needs basis smoothness >= deg P = " +
                  std::to_string(deg));
    return {false};
  }
  if (form == MuForm::weak || !strong_ok) {
    if (!weak_ok)
      throw Error("compute_mu_quadrature: basis smoothness k = " + std::to_string(basis.k()) +
                  " is insufficient even in weak form (needs " + std::to_string(half) + ")");
    return {true};
  }
  return {false};
}

void check_real_symbol(const Polynomial& P) {
  for (const auto& [gamma, c] : P.terms())
    if (total_degree(gamma) % 2 != 0)
      throw Error("compute_mu_quadrature: P has odd-degree terms (complex mu not supported)");
}

// E_t[j] = int N(y - j) D^t N(y) dy for the lattice mother N, j = -J..J.
std::vector<double> lattice_table(const ReproBasis& basis, int t, int J, bool weak, int mult) {
  const double r = basis.mother_radius();
  const int nodes = basis.spline_order() * mult;
  const int s = weak ? t / 2 : 0;
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  std::vector<double> out(2 * J + 1, 0.0);
  const QuadratureRule& rule = gauss_legendre(nodes);
  for (int j = -J; j <= J; ++j) {
    const double lo = std::max(-r, j - r), hi = std::min(r, j + r);
    long double acc = 0.0L;
    for (double a = lo; a < hi - 1e-12; a += 1.0) {
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double y = a + 0.5 + 0.5 * rule.nodes[q];
        acc += 0.5L * rule.weights[q] * basis.mother(s, y - j) * basis.mother(t - s, y);
      }
    }
    out[j + J] = sign * static_cast<double>(acc);
  }
  return out;
}

MuCoeffs lattice_quadrature(const ReproBasis& basis, const Polynomial& P, bool weak, int mult) {
  MuCoeffs mu;
  mu.dim = basis.dim();
  mu.centers = basis.centers_ptr();
  mu.bandwidth = basis.M();
  const double r = basis.mother_radius();
  const int J = static_cast<int>(std::ceil(2.0 * r - 1e-12)) - 1;
  mu.stencil_halfwidth = J;
  const int w = 2 * J + 1;
  std::map<int, std::vector<double>> tables;
  auto table = [&](int t) -> const std::vector<double>& {
    auto it = tables.find(t);
    if (it == tables.end()) it = tables.emplace(t, lattice_table(basis, t, J, weak, mult)).first;
    return it->second;
  };
  if (mu.dim == 1) {
    mu.stencil.assign(w, 0.0);
    for (const auto& [gamma, c] : P.terms()) {
      const auto& e = table(gamma[0]);
      for (int i = 0; i < w; ++i) mu.stencil[i] += c * i_power_real(gamma[0]) * e[i];
    }
  } else {
    mu.stencil.assign(static_cast<std::size_t>(w) * w, 0.0);
    for (const auto& [gamma, c] : P.terms()) {
      const auto& e0 = table(gamma[0]);
      const auto& e1 = table(gamma[1]);
      const double f = c * i_power_real(gamma[0] + gamma[1]);
      for (int a = 0; a < w; ++a)
        for (int b = 0; b < w; ++b) mu.stencil[a * w + b] += f * e0[a] * e1[b];
    }
  }
  // Odd factors make each table antisymmetric; E_t[j] is indexed by the
  // shift of the first argument, so mu_{beta - alpha} = stencil[alpha - beta].
  std::vector<double> flipped(mu.stencil.size());
  if (mu.dim == 1) {
    for (int i = 0; i < w; ++i) flipped[i] = mu.stencil[w - 1 - i];
  } else {
    for (int a = 0; a < w; ++a)
      for (int b = 0; b < w; ++b) flipped[a * w + b] = mu.stencil[(w - 1 - a) * w + (w - 1 - b)];
  }
  mu.stencil = std::move(flipped);
  mu.certified_degree = basis.k();
  mu.source = weak ? "quadrature-weak" : "quadrature-strong";
  return mu;
}

MuCoeffs scattered_quadrature(const ReproBasis& basis, const Polynomial& P, bool weak, int mult) {
  MuCoeffs mu;
  mu.dim = 1;
  mu.centers = basis.centers_ptr();
  mu.bandwidth = basis.M();
  const CenterSet& A = basis.centers();
  const std::size_t n = A.size();
  const int nodes = (basis.piece_degree() + 1) * mult;
  mu.rows.resize(n);
  std::vector<std::pair<double, double>> supp(n);
  for (std::size_t a = 0; a < n; ++a) supp[a] = basis.support_1d(a);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double lo = std::max(supp[a].first, supp[b].first);
      const double hi = std::min(supp[a].second, supp[b].second);
      if (hi <= lo) continue;
      std::vector<double> cuts = basis.breakpoints_1d(a);
      const auto bb = basis.breakpoints_1d(b);
      cuts.insert(cuts.end(), bb.begin(), bb.end());
      std::sort(cuts.begin(), cuts.end());
      std::vector<double> mesh{lo};
      for (double c : cuts)
        if (c > mesh.back() + 1e-13 && c < hi - 1e-13) mesh.push_back(c);
      mesh.push_back(hi);
      long double value = 0.0L;
      for (const auto& [gamma, c] : P.terms()) {
        const int t = gamma[0];
        const int s = weak ? t / 2 : 0;
        const double sign = (s % 2 == 0) ? 1.0 : -1.0;
        long double acc = 0.0L;
        for (std::size_t m = 0; m + 1 < mesh.size(); ++m) {
          const QuadratureRule rule = gauss_legendre(nodes, mesh[m], mesh[m + 1]);
          for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const Point y{rule.nodes[q], 0.0};
            acc += rule.weights[q] * basis.eval(a, y, s) * basis.eval(b, y, t - s);
          }
        }
        value += c * i_power_real(t) * sign * acc;
      }
      if (value != 0.0L) mu.rows[a].emplace_back(b, static_cast<double>(value));
    }
  }
  mu.certified_degree = basis.k();
  mu.source = weak ? "quadrature-weak" : "quadrature-strong";
  return mu;
}

}  // namespace

double MuCoeffs::stencil_at(int j0, int j1) const {
  const int J = *stencil_halfwidth;
  if (std::abs(j0) > J || std::abs(j1) > J) return 0.0;
  if (dim == 1) return j1 == 0 ? stencil[j0 + J] : 0.0;
  return stencil[(j0 + J) * (2 * J + 1) + (j1 + J)];
}

std::vector<std::pair<std::array<int, 2>, double>> MuCoeffs::stencil_entries() const {
  std::vector<std::pair<std::array<int, 2>, double>> out;
  const int J = *stencil_halfwidth;
  const int J1 = dim == 2 ? J : 0;
  for (int a = -J; a <= J; ++a)
    for (int b = -J1; b <= J1; ++b) {
      const double v = stencil_at(a, b);
      if (v != 0.0) out.push_back({{a, b}, v});
    }
  return out;
}

double MuCoeffs::entry(std::size_t alpha, std::size_t beta) const {
  if (is_lattice()) {
    const auto& ia = centers->lattice_ids[alpha];
    const auto& ib = centers->lattice_ids[beta];
    return stencil_at(ib[0] - ia[0], ib[1] - ia[1]);
  }
  for (const auto& [b, v] : rows[alpha])
    if (b == beta) return v;
  return 0.0;
}

std::vector<std::pair<std::size_t, double>> MuCoeffs::row(std::size_t alpha) const {
  if (!is_lattice()) return rows[alpha];
  std::vector<std::pair<std::size_t, double>> out;
  const auto& ia = centers->lattice_ids[alpha];
  for (const auto& [j, v] : stencil_entries()) {
    const int idx = centers->index_of_lattice({ia[0] + j[0], ia[1] + j[1]});
    if (idx >= 0) out.emplace_back(static_cast<std::size_t>(idx), v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool MuCoeffs::trusted(std::size_t alpha) const {
  return centers->boundary_distance(centers->points[alpha]) >= bandwidth;
}

nlohmann::json MuCoeffs::to_json() const {
  nlohmann::json j = {{"bandwidth", bandwidth}, {"dim", dim}, {"source", source},
                      {"certified_degree", certified_degree}};
  if (is_lattice()) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& [off, v] : stencil_entries())
      s.push_back(dim == 1 ? nlohmann::json{nlohmann::json{off[0]}, v}
                           : nlohmann::json{nlohmann::json{off[0], off[1]}, v});
    j["lattice_stencil"] = s;
  }
  nlohmann::json e = nlohmann::json::array();
  if (centers) {
    for (std::size_t a = 0; a < centers->size(); ++a)
      for (const auto& [b, v] : row(a)) e.push_back({a, b, v});
  }
  j["entries"] = e;
  return j;
}

MuCoeffs compute_mu_quadrature(const ReproBasis& basis, const Polynomial& P,
                               const MuQuadratureOptions& options) {
  require(P.dim() == basis.dim(), "compute_mu_quadrature: dimension mismatch between P and basis");
  require(options.node_multiplier >= 1, "compute_mu_quadrature: node multiplier must be >= 1");
  check_real_symbol(P);
  const FormChoice f = choose_form(basis, P, options.form);
  if (basis.kind() == BasisKind::lattice)
    return lattice_quadrature(basis, P, f.weak, options.node_multiplier);
  return scattered_quadrature(basis, P, f.weak, options.node_multiplier);
}

MuCoeffs preset_mu_difference(const RbfSymbol& sym, std::shared_ptr<const CenterSet> centers) {
  require(centers != nullptr, "preset_mu_difference: null center set");
  if (centers->kind != CenterKind::lattice)
    throw Error("preset_mu_difference: presets require a lattice center set");
  const double t0 = 1.0 / sym.F_taylor.constant_term();
  const int m1 = sym.m1;
  MuCoeffs mu;
  mu.dim = sym.dim;
  mu.centers = centers;
  mu.stencil_halfwidth = m1;
  mu.certified_degree = 2 * m1 + 1;
  mu.bandwidth = m1 + 1;
  mu.source = "preset";
  const int w = 2 * m1 + 1;
  if (sym.dim == 1) {
    if (!(sym.G.poly().terms().size() == 1 && sym.G.poly().coeff({2 * m1}) == 1.0))
      throw Error("preset_mu_difference: unsupported G shape (need xi^{2 m1})");
    const double sign = m1 % 2 == 0 ? 1.0 : -1.0;
    mu.stencil.assign(w, 0.0);
    for (int j = -m1; j <= m1; ++j) {
      const double s = ((j + m1) % 2 == 0) ? 1.0 : -1.0;
      mu.stencil[j + m1] = t0 * sign * s * binomial(2 * m1, m1 + j);
    }
    return mu;
  }
  Polynomial lap2(2);
  lap2.add_term({4, 0}, 1.0);
  lap2.add_term({2, 2}, 2.0);
  lap2.add_term({0, 4}, 1.0);
  const Polynomial diff = sym.G.poly() - lap2;
  if (m1 != 2 || diff.pruned(1e-15).is_zero() == false)
    throw Error("preset_mu_difference: unsupported G shape (need |xi|^4 in 2-d)");
  mu.stencil.assign(static_cast<std::size_t>(w) * w, 0.0);
  auto set = [&](int a, int b, double v) { mu.stencil[(a + 2) * w + (b + 2)] = t0 * v; };
  set(0, 0, 20.0);
  for (auto [a, b] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
    set(a, b, -8.0);
    set(2 * a, 2 * b, 1.0);
  }
  for (auto [a, b] : {std::pair{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}) set(a, b, 2.0);
  return mu;
}

std::vector<Polynomial> kernel_basis(const HomogeneousPolynomial& G, int cap) {
  const int dim = G.dim();
  const auto in = multi_indices_up_to(dim, cap);
  const auto out = multi_indices_up_to(dim, std::max(0, cap - G.degree()));
  std::map<MultiIndex, int> row_of;
  for (std::size_t i = 0; i < out.size(); ++i) row_of[out[i]] = static_cast<int>(i);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.size()),
                                            static_cast<Eigen::Index>(in.size()));
  for (std::size_t c = 0; c < in.size(); ++c) {
    Polynomial img(dim);
    for (const auto& [gamma, g] : G.poly().terms())
      img += g * Polynomial::monomial(in[c]).derivative(gamma);
    for (const auto& [delta, v] : img.terms()) A(row_of.at(delta), static_cast<Eigen::Index>(c)) = v;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  const Eigen::MatrixXd K = lu.kernel();
  std::vector<Polynomial> basis;
  if (lu.rank() == static_cast<Eigen::Index>(in.size())) return basis;
  for (Eigen::Index c = 0; c < K.cols(); ++c) {
    Polynomial p(dim);
    const double scale = K.col(c).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < in.size(); ++i) p.add_term(in[i], K(static_cast<Eigen::Index>(i), c) / scale);
    basis.push_back(p.pruned(1e-13));
  }
  return basis;
}

nlohmann::json MuInvariantReport::to_json() const {
  return {{"symmetry", symmetry},       {"bandwidth", bandwidth},
          {"annihilation", annihilation}, {"moment_rule", moment_rule},
          {"degree_cap", degree_cap},   {"pass", pass()}};
}

MuInvariantReport mu_invariant_report(const MuCoeffs& mu, const RbfSymbol& sym, int degree_cap,
                                      double tol) {
  MuInvariantReport rep;
  rep.degree_cap = degree_cap;
  const CenterSet& A = *mu.centers;
  auto at = [&](const std::array<int, 2>& p) {
    return std::array<double, 2>{static_cast<double>(p[0]), static_cast<double>(p[1])};
  };
  const auto kernel = kernel_basis(sym.G, degree_cap);

  if (mu.is_lattice()) {
    for (const auto& [j, v] : mu.stencil_entries()) {
      rep.symmetry = std::max(rep.symmetry, std::abs(v - mu.stencil_at(-j[0], -j[1])));
      if (std::hypot(j[0], j[1]) >= mu.bandwidth) rep.bandwidth = std::max(rep.bandwidth, std::abs(v));
    }
    // Translation invariance: checking one interior row suffices; use the
    // center nearest the window midpoint.
    Point mid{0.5 * (A.window.lo[0] + A.window.hi[0]), 0.5 * (A.window.lo[1] + A.window.hi[1])};
    std::array<int, 2> a0{static_cast<int>(std::lround(mid[0])),
                          mu.dim == 2 ? static_cast<int>(std::lround(mid[1])) : 0};
    for (const Polynomial& q : kernel) {
      long double s = 0.0L;
      for (const auto& [j, v] : mu.stencil_entries()) {
        const auto p = at({a0[0] + j[0], a0[1] + j[1]});
        s += static_cast<long double>(v) * q(std::span<const double>(p.data(), mu.dim));
      }
      rep.annihilation = std::max(rep.annihilation, static_cast<double>(std::fabs(s)));
    }
    for (const MultiIndex& g : multi_indices_up_to(mu.dim, degree_cap)) {
      const Polynomial q = Polynomial::monomial(g);
      long double s = 0.0L;
      for (const auto& [j, v] : mu.stencil_entries()) {
        const auto p = at(j);
        s += static_cast<long double>(v) * q(std::span<const double>(p.data(), mu.dim));
      }
      const std::array<double, 2> zero{0.0, 0.0};
      const double target =
          apply_diff_operator(sym.P, PolynomialFunction(q), std::span<const double>(zero.data(), mu.dim)).real;
      rep.moment_rule = std::max(rep.moment_rule, static_cast<double>(std::fabs(s - target)));
    }
  } else {
    for (std::size_t a = 0; a < A.size(); ++a) {
      for (const auto& [b, v] : mu.rows[a]) {
        rep.symmetry = std::max(rep.symmetry, std::abs(v - mu.entry(b, a)));
        if (std::hypot(A.points[a][0] - A.points[b][0], A.points[a][1] - A.points[b][1]) >= mu.bandwidth)
          rep.bandwidth = std::max(rep.bandwidth, std::abs(v));
      }
      if (!mu.trusted(a)) continue;
      for (const Polynomial& q : kernel) {
        long double s = 0.0L;
        for (const auto& [b, v] : mu.rows[a])
          s += static_cast<long double>(v) * q(std::span<const double>(A.points[b].data(), mu.dim));
        rep.annihilation = std::max(rep.annihilation, static_cast<double>(std::fabs(s)));
      }
    }
  }
  rep.symmetry_pass = rep.symmetry <= tol;
  rep.bandwidth_pass = rep.bandwidth <= tol;
  rep.annihilation_pass = rep.annihilation <= tol;
  rep.moment_pass = rep.moment_rule <= tol;
  return rep;
}

MuCoeffs certified_mu(const RbfSymbol& sym, std::shared_ptr<const CenterSet> centers) {
  const bool second_order = sym.m1 == 1;
  if (centers->kind == CenterKind::lattice && second_order) return preset_mu_difference(sym, centers);
  const ReproBasis basis = build_repro_basis(centers, sym.basis_k());
  return compute_mu_quadrature(basis, sym.P);
}

}  // namespace rbfq
