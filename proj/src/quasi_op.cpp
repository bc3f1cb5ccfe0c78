#include "rbfq/quasi_op.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rbfq/error.hpp"
#include "rbfq/quadrature.hpp"

namespace rbfq {

namespace {

double norm(const Point& z, int dim) { return dim == 1 ? std::abs(z[0]) : std::hypot(z[0], z[1]); }

long double profile_decay(const RadialProfile& phi, long double r) {
  switch (phi.kind) {
    case RbfKind::multiquadric: {
      const long double c2 = static_cast<long double>(phi.shape_c) * phi.shape_c;
      return c2 / (r + std::sqrt(r * r + c2));
    }
    case RbfKind::thinplate:
      return r == 0.0L ? 0.0L : r * r * std::log(r);
    default:
      return 0.0L;
  }
}

int growth_power(RbfKind kind) {
  switch (kind) {
    case RbfKind::linear:
    case RbfKind::multiquadric:
      return 1;
    case RbfKind::cubic:
      return 3;
    default:
      return 0;
  }
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double DecayCalibration::envelope_at(double r) const {
  if (envelope.empty()) return C;
  const double cap = 0.75 * envelope.back().first;
  r = std::min(r, cap);
  auto it = std::lower_bound(envelope.begin(), envelope.end(), std::pair{r, -1.0});
  if (it != envelope.begin()) --it;
  return it->second;
}

double default_tail_tol(bool compact) { return compact ? 1e-10 : 1e-8; }

QuasiBasis::QuasiBasis(RbfSymbol sym, MuCoeffs mu, double tail_tol)
    : sym_(std::move(sym)), mu_(std::move(mu)) {
  require(mu_.centers != nullptr, "QuasiBasis: mu has no center set");
  require(mu_.dim == sym_.dim, "QuasiBasis: dimension mismatch between symbol and mu");
  if (mu_.is_lattice()) {
    stencil_ = mu_.stencil_entries();
    for (const auto& [j, v] : stencil_) hull_ = std::max(hull_, std::hypot(j[0], j[1]));
    growth_power_ = growth_power(sym_.phi.kind);
    if (sym_.dim == 1 && growth_power_ > 0) {
      // Outside the stencil hull |r|^p is a polynomial of degree p in r, so
      // its contribution vanishes when mu annihilates degree <= p.
      growth_cancels_ = true;
      for (int t = 0; t <= growth_power_; ++t) {
        long double s = 0.0L, scale = 0.0L;
        for (const auto& [j, v] : stencil_) {
          const long double term = v * std::pow(static_cast<long double>(j[0]), t);
          s += term;
          scale += std::fabs(term);
        }
        if (std::fabs(s) > 1e-12L * std::max(scale, 1.0L)) growth_cancels_ = false;
      }
    }
  }
  calibrate();
  tail_tol_ = tail_tol > 0.0 ? tail_tol : default_tail_tol(decay_.compact);
  if (decay_.compact) {
    R_ = decay_.compact_radius;
  } else {
    double hi = 4.0;
    while (tail_bound(hi) > tail_tol_) hi *= 2.0;
    double lo = hi / 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail_bound(mid) > tail_tol_ ? lo : hi) = mid;
    }
    R_ = std::ceil(hi);
  }
}

double QuasiBasis::tail_bound(double radius) const {
  if (decay_.compact && radius >= decay_.compact_radius) return 0.0;
  const double m2 = sym_.m2;
  const double C = decay_.envelope_at(radius);
  const double density = centers().kind == CenterKind::lattice ? 1.0 : centers().C1;
  if (dim() == 1) {
    return density * 2.0 * C *
           (std::pow(1.0 + radius, -1.0 - m2) + std::pow(1.0 + radius, -m2) / m2);
  }
  if (radius <= 3.0) return std::numeric_limits<double>::infinity();
  return density * 2.0 * std::numbers::pi * C * std::pow(radius - 2.0, -m2) / m2;
}

double QuasiBasis::psi_lattice(const Point& z) const {
  const int d = dim();
  const bool outside = growth_cancels_ && std::abs(z[0]) >= hull_;
  const bool has_decay = sym_.phi.kind == RbfKind::multiquadric || sym_.phi.kind == RbfKind::thinplate;
  long double s = 0.0L;
  for (const auto& [j, v] : stencil_) {
    const long double r = d == 1 ? std::fabs(static_cast<long double>(z[0]) - j[0])
                                 : std::hypot(static_cast<long double>(z[0]) - j[0],
                                              static_cast<long double>(z[1]) - j[1]);
    if (growth_power_ > 0 && !outside) {
      long double g = r;
      for (int t = 1; t < growth_power_; ++t) g *= r;
      s += v * g;
    }
    if (has_decay) s += v * profile_decay(sym_.phi, r);
  }
  return static_cast<double>(s);
}

double QuasiBasis::psi_offset(const Point& z) const {
  require(mu_.is_lattice(), "psi_offset: lattice mu required");
  return psi_lattice(z);
}

double QuasiBasis::psi(std::size_t alpha, const Point& y) const {
  const CenterSet& A = centers();
  if (mu_.is_lattice()) {
    const auto& id = A.lattice_ids[alpha];
    return psi_lattice({y[0] - id[0], y[1] - id[1]});
  }
  long double s = 0.0L;
  for (const auto& [b, v] : mu_.rows[alpha]) {
    const Point& p = A.points[b];
    s += v * static_cast<long double>(sym_.phi(norm({y[0] - p[0], y[1] - p[1]}, dim())));
  }
  return static_cast<double>(s);
}

void QuasiBasis::calibrate() {
  const int d = dim();
  decay_.exponent = d + sym_.m2;
  const bool has_decay = sym_.phi.kind == RbfKind::multiquadric || sym_.phi.kind == RbfKind::thinplate;
  const CenterSet& A = centers();
  std::size_t a0 = 0;
  if (!mu_.is_lattice()) {
    double best = -1e300;
    for (std::size_t i = 0; i < A.size(); ++i)
      if (A.boundary_distance(A.points[i]) > best) {
        best = A.boundary_distance(A.points[i]);
        a0 = i;
      }
  }
  const Point c0 = mu_.is_lattice() ? Point{0.0, 0.0} : A.points[a0];
  auto value = [&](const Point& z) {
    return mu_.is_lattice() ? psi_lattice(z) : psi(a0, {c0[0] + z[0], c0[1] + z[1]});
  };
  if (mu_.is_lattice() && d == 1 && growth_cancels_ && !has_decay) {
    decay_.compact = true;
    decay_.compact_radius = hull_;
  }
  const double rmax = decay_.compact ? hull_ + 1.0 : (d == 1 ? 64.0 : 32.0);
  std::vector<Point> dirs{{1.0, 0.0}};
  if (d == 1) dirs.push_back({-1.0, 0.0});
  if (d == 2) dirs.push_back({std::sqrt(0.5), std::sqrt(0.5)});
  const int steps = static_cast<int>(rmax * 16.0);
  std::vector<double> weighted(steps + 1, 0.0);
  for (const Point& u : dirs)
    for (int i = 0; i <= steps; ++i) {
      const double r = i / 16.0;
      weighted[i] = std::max(weighted[i], 1.1 * std::abs(value({r * u[0], r * u[1]})) *
                                              std::pow(1.0 + r, decay_.exponent));
    }
  decay_.envelope.resize(steps + 1);
  double run = 0.0;
  for (int i = steps; i >= 0; --i) {
    run = std::max(run, weighted[i]);
    decay_.envelope[i] = {i / 16.0, run};
  }
  decay_.C = run;
  if (!decay_.compact) {
    const double lo = d == 1 ? 5.0 : 4.0, hi = d == 1 ? 50.0 : 14.0;
    std::vector<double> lx, ly;
    for (int i = 0; i < 40; ++i) {
      const double r = lo * std::pow(hi / lo, i / 39.0);
      const double v = std::abs(value({r, 0.0}));
      if (v <= 0.0) continue;
      lx.push_back(std::log(r));
      ly.push_back(std::log(v));
    }
    if (lx.size() >= 2) decay_.fitted_exponent = -least_squares_slope(lx, ly);
  }
}

std::vector<std::pair<std::size_t, double>> QuasiBasis::psi_values(const Point& y, double r) const {
  std::vector<std::pair<std::size_t, double>> out;
  const CenterSet& A = centers();
  const int d = dim();
  if (A.kind == CenterKind::lattice) {
    const int lo0 = static_cast<int>(std::ceil(y[0] - r)), hi0 = static_cast<int>(std::floor(y[0] + r));
    const int lo1 = d == 2 ? static_cast<int>(std::ceil(y[1] - r)) : 0;
    const int hi1 = d == 2 ? static_cast<int>(std::floor(y[1] + r)) : 0;
    for (int a = lo0; a <= hi0; ++a)
      for (int b = lo1; b <= hi1; ++b) {
        const Point z{y[0] - a, d == 2 ? y[1] - b : 0.0};
        if (norm(z, d) > r) continue;
        const int idx = A.index_of_lattice({a, b});
        if (idx < 0) continue;
        out.emplace_back(static_cast<std::size_t>(idx), mu_.is_lattice() ? psi_lattice(z) : psi(idx, y));
      }
    std::sort(out.begin(), out.end());
    return out;
  }
  require(d == 1, "psi_values: perturbed centers are 1-d only");
  auto first = std::lower_bound(A.points.begin(), A.points.end(), Point{y[0] - r, -1e300});
  for (auto it = first; it != A.points.end() && (*it)[0] <= y[0] + r; ++it) {
    const std::size_t idx = static_cast<std::size_t>(it - A.points.begin());
    out.emplace_back(idx, psi(idx, y));
  }
  return out;
}

nlohmann::json QuasiBasis::to_json() const {
  return {{"symbol", sym_.name},
          {"decay_C", decay_.C},
          {"decay_exponent", decay_.exponent},
          {"fitted_exponent", std::isinf(decay_.fitted_exponent) ? nlohmann::json("inf")
                                                                 : nlohmann::json(decay_.fitted_exponent)},
          {"compact", decay_.compact},
          {"compact_radius", decay_.compact_radius},
          {"tail_tol", tail_tol_},
          {"tail_radius", R_}};
}

PsiEval eval_psi(const QuasiBasis& basis, std::size_t alpha, const Point& x) {
  return {basis.psi(alpha, x), !basis.interior(alpha)};
}

std::vector<std::pair<std::size_t, double>> qh_terms(const SampledOperator& op, const Point& x) {
  require(op.basis != nullptr, "apply_Qh: operator has no basis");
  require(op.h > 0.0 && op.h <= 1.0, "apply_Qh: h must lie in (0, 1]");
  const QuasiBasis& B = *op.basis;
  const Point y{x[0] / op.h, x[1] / op.h};
  const double R = B.tail_radius();
  const double margin = B.centers().boundary_distance(y);
  if (margin < R)
    throw Error("apply_Qh: center window too small; x/h needs a margin of " + std::to_string(R) +
                " but has " + std::to_string(margin));
  return B.psi_values(y, R);
}

QhResult apply_Qh(const SampledOperator& op, const PointFunction& f, const Point& x) {
  const auto terms = qh_terms(op, x);
  const QuasiBasis& B = *op.basis;
  const CenterSet& A = B.centers();
  const double R = B.tail_radius();
  const Point y{x[0] / op.h, x[1] / op.h};
  long double s = 0.0L;
  double shell = 0.0;
  for (const auto& [idx, v] : terms) {
    const Point& p = A.points[idx];
    const double fv = f({op.h * p[0], op.h * p[1]});
    s += static_cast<long double>(fv) * v;
    if (norm({p[0] - y[0], p[1] - y[1]}, B.dim()) >= R - 1.0) shell = std::max(shell, std::abs(fv));
  }
  return {static_cast<double>(s), B.tail_bound(R) * shell, terms.size()};
}

double lebesgue_sum_diagnostic(const SampledOperator& op, double a, const std::vector<Point>& grid) {
  const QuasiBasis& B = *op.basis;
  if (a < 0.0 || a >= B.symbol().m2)
    throw Error("lebesgue_sum_diagnostic: need 0 <= a < m2 = " + std::to_string(B.symbol().m2));
  const CenterSet& A = B.centers();
  double sup = 0.0;
  for (const Point& x : grid) {
    const Point y{x[0] / op.h, x[1] / op.h};
    long double s = 0.0L;
    for (const auto& [idx, v] : qh_terms(op, x)) {
      const Point& p = A.points[idx];
      s += std::fabs(static_cast<long double>(v)) *
           std::pow(static_cast<long double>(norm({y[0] - p[0], y[1] - p[1]}, B.dim())) + 1.0L, a);
    }
    sup = std::max(sup, static_cast<double>(s));
  }
  return sup;
}

double stability_ratio(const QuasiBasis& basis, const std::vector<std::pair<std::size_t, double>>& coeffs,
                       double p) {
  require(basis.dim() == 1, "stability_ratio: 1-d only");
  require(p >= 1.0, "stability_ratio: p must be >= 1");
  double anorm = 0.0;
  bool any = false;
  for (const auto& [a, v] : coeffs) {
    if (v != 0.0) any = true;
    anorm = std::isinf(p) ? std::max(anorm, std::abs(v)) : anorm + std::pow(std::abs(v), p);
  }
  if (!any) throw Error("stability_ratio: all coefficients are zero");
  if (!std::isinf(p)) anorm = std::pow(anorm, 1.0 / p);
  const CenterSet& A = basis.centers();
  std::vector<std::pair<double, double>> pts;
  for (const auto& [a, v] : coeffs) pts.emplace_back(A.points[a][0], v);
  std::sort(pts.begin(), pts.end());
  const double rho = basis.decay().compact ? basis.decay().compact_radius : basis.tail_radius();
  auto sum_at = [&](double x) {
    long double s = 0.0L;
    auto it = std::lower_bound(pts.begin(), pts.end(), std::pair{x - rho, -1e300});
    for (; it != pts.end() && it->first <= x + rho; ++it) {
      const std::size_t idx = static_cast<std::size_t>(
          std::lower_bound(A.points.begin(), A.points.end(), Point{it->first, -1e300}) - A.points.begin());
      s += it->second * static_cast<long double>(basis.psi(idx, {x, 0.0}));
    }
    return static_cast<double>(s);
  };
  const double lo = std::floor(pts.front().first - rho), hi = std::ceil(pts.back().first + rho);
  const double cell = 0.25;
  const int nodes = 8;
  const QuadratureRule& rule = gauss_legendre(nodes);
  double fnorm = 0.0;
  for (double c = lo; c < hi - 1e-12; c += cell) {
    if (std::isinf(p)) {
      for (int i = 0; i <= 16; ++i) fnorm = std::max(fnorm, std::abs(sum_at(c + cell * i / 16.0)));
      continue;
    }
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = c + 0.5 * cell * (1.0 + rule.nodes[q]);
      fnorm += 0.5 * cell * rule.weights[q] * std::pow(std::abs(sum_at(x)), p);
    }
  }
  if (!std::isinf(p)) fnorm = std::pow(fnorm, 1.0 / p);
  return fnorm / anorm;
}

}  // namespace rbfq
