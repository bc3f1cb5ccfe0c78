#include "rbfq/repro_basis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rbfq/error.hpp"

namespace rbfq {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Symmetric coefficients c_{-K..K} such that N = sum_m c_m B(. - m)
// reproduces polynomials of degree <= 2K + 1 on the integer lattice.
std::vector<double> deconvolution_stencil(int order, int K) {
  const int tmax = 2 * K;
  const std::vector<double> beta = centered_bspline_moments(order, tmax);
  // gamma_t = sum_m c_m m^t is fixed by  sum_u C(t,u) gamma_u beta_{t-u} = delta_{t0}.
  std::vector<double> gamma(tmax + 1, 0.0);
  gamma[0] = 1.0 / beta[0];
  for (int t = 1; t <= tmax; ++t) {
    double acc = 0.0;
    for (int u = 0; u < t; ++u) acc += binomial(t, u) * gamma[u] * beta[t - u];
    gamma[t] = -acc / beta[0];
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(K + 1, K + 1);
  Eigen::VectorXd rhs(K + 1);
  for (int s = 0; s <= K; ++s) {
    const int t = 2 * s;
    A(s, 0) = t == 0 ? 1.0 : 0.0;
    for (int m = 1; m <= K; ++m) A(s, m) = 2.0 * std::pow(static_cast<double>(m), t);
    rhs(s) = gamma[t];
  }
  const Eigen::VectorXd half = A.fullPivLu().solve(rhs);
  std::vector<double> c(2 * K + 1);
  for (int m = -K; m <= K; ++m) c[m + K] = half(std::abs(m));
  return c;
}

}  // namespace

double ReproBasis::mother(int t, double x) const {
  if (t >= order_) return 0.0;
  const double r = 0.5 * order_;
  double sum = 0.0;
  for (int m = -halfwidth_; m <= halfwidth_; ++m) {
    const double y = x - m;
    if (y <= -r || y >= r) continue;
    sum += coeffs_[m + halfwidth_] * centered_bspline_derivative(order_, t, y);
  }
  return sum;
}

double ReproBasis::pu(int cell, int t, double x) const {
  const double width = 2.0 * w_;
  const double u1 = (x - cell + w_) / width;
  const double u2 = (x - cell - 1 + w_) / width;
  return std::pow(width, -t) * (step_->derivative(t, u1) - step_->derivative(t, u2));
}

double ReproBasis::eval_scattered(std::size_t alpha, double x, int t) const {
  double sum = 0.0;
  for (const CellPiece& piece : pieces_[alpha]) {
    if (x <= piece.cell - w_ || x >= piece.cell + 1 + w_) continue;
    const double u = x - (piece.cell + 0.5);
    for (int s = 0; s <= t; ++s) {
      const double rho = pu(piece.cell, s, x);
      if (rho == 0.0) continue;
      const int lt = t - s;
      const double l = lt < static_cast<int>(piece.lagrange_derivs.size())
                           ? piece.lagrange_derivs[lt](u)
                           : 0.0;
      sum += binomial(t, s) * rho * l;
    }
  }
  return sum;
}

double ReproBasis::eval(std::size_t alpha, const Point& x, int g0, int g1) const {
  const Point& a = centers_->points[alpha];
  if (kind_ == BasisKind::scattered) return eval_scattered(alpha, x[0], g0);
  const double r = mother_radius();
  if (std::abs(x[0] - a[0]) >= r) return 0.0;
  double v = mother(g0, x[0] - a[0]);
  if (dim_ == 2) {
    if (std::abs(x[1] - a[1]) >= r) return 0.0;
    v *= mother(g1, x[1] - a[1]);
  }
  return v;
}

std::vector<std::size_t> ReproBasis::active_at(const Point& x) const {
  std::vector<std::size_t> out;
  if (kind_ == BasisKind::lattice) {
    const double r = mother_radius();
    const int lo0 = static_cast<int>(std::floor(x[0] - r)), hi0 = static_cast<int>(std::ceil(x[0] + r));
    const int lo1 = dim_ == 2 ? static_cast<int>(std::floor(x[1] - r)) : 0;
    const int hi1 = dim_ == 2 ? static_cast<int>(std::ceil(x[1] + r)) : 0;
    for (int a = lo0; a <= hi0; ++a) {
      if (std::abs(x[0] - a) >= r) continue;
      for (int b = lo1; b <= hi1; ++b) {
        if (dim_ == 2 && std::abs(x[1] - b) >= r) continue;
        const int idx = centers_->index_of_lattice({a, b});
        if (idx >= 0) out.push_back(static_cast<std::size_t>(idx));
      }
    }
    return out;
  }
  // Scattered: at most two cells overlap x.
  const int c_lo = static_cast<int>(std::floor(x[0] - 1 - w_));
  const int c_hi = static_cast<int>(std::ceil(x[0] + w_));
  // Centers are indexed by lattice id, so candidates lie within the node reach.
  const int reach = k_ + 3;
  for (int c = c_lo; c <= c_hi; ++c) {
    if (x[0] <= c - w_ || x[0] >= c + 1 + w_) continue;
    for (int id = c - reach; id <= c + 1 + reach; ++id) {
      const int idx = centers_->index_of_lattice({id, 0});
      if (idx < 0) continue;
      for (const CellPiece& p : pieces_[idx])
        if (p.cell == c) {
          out.push_back(static_cast<std::size_t>(idx));
          break;
        }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::pair<double, double> ReproBasis::support_1d(std::size_t alpha) const {
  if (kind_ == BasisKind::lattice) {
    const double a = centers_->points[alpha][0];
    return {a - mother_radius(), a + mother_radius()};
  }
  double lo = 1e300, hi = -1e300;
  for (const CellPiece& p : pieces_[alpha]) {
    lo = std::min(lo, p.cell - w_);
    hi = std::max(hi, p.cell + 1 + w_);
  }
  return {lo, hi};
}

std::vector<double> ReproBasis::breakpoints_1d(std::size_t alpha) const {
  std::vector<double> out;
  if (kind_ == BasisKind::lattice) {
    const auto [lo, hi] = support_1d(alpha);
    const int n = static_cast<int>(std::lround(hi - lo));
    for (int i = 0; i <= n; ++i) out.push_back(lo + i);
    return out;
  }
  for (const CellPiece& p : pieces_[alpha])
    for (double b : {p.cell - w_, p.cell + w_, p.cell + 1 - w_, p.cell + 1 + w_}) out.push_back(b);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
            out.end());
  return out;
}

int ReproBasis::piece_degree() const {
  return kind_ == BasisKind::lattice ? order_ - 1 : (2 * k_ + 1) + k_;
}

double ReproBasis::derivative_bound() const {
  double c = 0.0;
  for (int t0 = 0; t0 <= k_; ++t0) {
    if (dim_ == 1) {
      c = std::max(c, deriv_bounds_[t0]);
      continue;
    }
    for (int t1 = 0; t0 + t1 <= k_; ++t1) c = std::max(c, deriv_bounds_[t0] * deriv_bounds_[t1]);
  }
  return c;
}

nlohmann::json ReproBasis::to_json() const {
  nlohmann::json j = {{"dim", dim_},
                      {"k", k_},
                      {"kind", kind_ == BasisKind::lattice ? "lattice" : "scattered"},
                      {"M", M_},
                      {"derivative_bounds", deriv_bounds_}};
  if (kind_ == BasisKind::lattice) {
    j["spline_order"] = order_;
    nlohmann::json c = nlohmann::json::array();
    for (int m = -halfwidth_; m <= halfwidth_; ++m) c.push_back({m, coeffs_[m + halfwidth_]});
    j["mother_coeffs"] = c;
  }
  return j;
}

ReproBasis build_repro_basis(std::shared_ptr<const CenterSet> centers, int k,
                             const BasisOptions& options) {
  require(centers != nullptr, "build_repro_basis: null center set");
  if (k < 1) throw Error("build_repro_basis: k must be >= 1");
  ReproBasis basis;
  basis.dim_ = centers->dim;
  basis.k_ = k;
  basis.centers_ = centers;
  const double sample_step = 1.0 / 256.0;

  if (centers->kind == CenterKind::lattice) {
    basis.kind_ = BasisKind::lattice;
    basis.order_ = options.spline_order > 0 ? options.spline_order : k + 2;
    if (basis.order_ < k + 1)
      throw Error("build_repro_basis: spline order " + std::to_string(basis.order_) +
                  " cannot reproduce degree " + std::to_string(k));
    basis.halfwidth_ = k / 2;
    basis.coeffs_ = deconvolution_stencil(basis.order_, basis.halfwidth_);
    const double r = basis.mother_radius();
    basis.M_ = 2.0 * r * std::sqrt(static_cast<double>(basis.dim_));
    basis.deriv_bounds_.assign(k + 1, 0.0);
    for (double x = -r; x <= r; x += sample_step)
      for (int t = 0; t <= k && t < basis.order_; ++t)
        basis.deriv_bounds_[t] = std::max(basis.deriv_bounds_[t], std::abs(basis.mother(t, x)));
    return basis;
  }

  if (centers->dim != 1) throw Error("build_repro_basis: scattered construction is 1-d only");
  basis.kind_ = BasisKind::scattered;
  basis.w_ = options.transition_halfwidth;
  require(basis.w_ > 0.0 && basis.w_ < 0.5, "build_repro_basis: transition half-width must be in (0, 1/2)");
  basis.step_ = std::make_shared<SmoothStep>(k);
  basis.pieces_.resize(centers->size());
  const auto& pts = centers->points;
  const int n = static_cast<int>(pts.size());
  if (n < k + 1) throw Error("build_repro_basis: fewer centers than k + 1");
  const int cell_lo = static_cast<int>(std::floor(centers->window.lo[0]));
  const int cell_hi = static_cast<int>(std::ceil(centers->window.hi[0])) - 1;
  std::vector<int> order(n);
  for (int c = cell_lo; c <= cell_hi; ++c) {
    const double mid = c + 0.5;
    // k+1 nearest centers to the cell midpoint (ties by index).
    const auto first = std::lower_bound(pts.begin(), pts.end(), Point{mid, 0.0}) - pts.begin();
    const int lo = std::max(0, static_cast<int>(first) - (k + 2));
    const int hi = std::min(n, static_cast<int>(first) + (k + 2));
    std::vector<int> cand;
    for (int i = lo; i < hi; ++i) cand.push_back(i);
    std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
      return std::abs(pts[a][0] - mid) < std::abs(pts[b][0] - mid);
    });
    cand.resize(std::min<std::size_t>(cand.size(), k + 1));
    if (static_cast<int>(cand.size()) < k + 1) continue;
    std::vector<double> u;
    for (int i : cand) u.push_back(pts[i][0] - mid);
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = i + 1; j < u.size(); ++j)
        if (std::abs(u[i] - u[j]) < 1e-9)
          throw NumericalError("build_repro_basis: singular Lagrange system on cell [" +
                               std::to_string(c) + ", " + std::to_string(c + 1) +
                               "] (coalescing centers)");
    for (std::size_t i = 0; i < cand.size(); ++i) {
      Polynomial L = Polynomial::constant(1, 1.0);
      for (std::size_t j = 0; j < cand.size(); ++j) {
        if (j == i) continue;
        Polynomial factor(1);
        factor.add_term({1}, 1.0 / (u[i] - u[j]));
        factor.add_term({0}, -u[j] / (u[i] - u[j]));
        L = L * factor;
      }
      ReproBasis::CellPiece piece;
      piece.cell = c;
      piece.lagrange = L;
      for (int t = 0; t <= k + 1; ++t) piece.lagrange_derivs.push_back(L.derivative({t}));
      basis.pieces_[cand[i]].push_back(std::move(piece));
    }
  }
  double half_m = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    if (basis.pieces_[a].empty()) continue;
    const auto [lo, hi] = basis.support_1d(a);
    half_m = std::max({half_m, pts[a][0] - lo, hi - pts[a][0]});
  }
  basis.M_ = 2.0 * half_m;
  basis.deriv_bounds_.assign(k + 1, 0.0);
  const std::size_t stride = std::max<std::size_t>(1, pts.size() / 200);
  for (std::size_t a = 0; a < pts.size(); a += stride) {
    if (centers->boundary_distance(pts[a]) < half_m) continue;
    const auto [lo, hi] = basis.support_1d(a);
    for (double x = lo; x <= hi; x += sample_step)
      for (int t = 0; t <= k; ++t)
        basis.deriv_bounds_[t] = std::max(basis.deriv_bounds_[t], std::abs(basis.eval_scattered(a, x, t)));
  }
  return basis;
}

double reproduction_residual(const ReproBasis& basis, const Polynomial& q,
                             const std::vector<Point>& grid) {
  require(q.degree() <= basis.k(), "reproduction_residual: deg q exceeds basis degree k");
  const CenterSet& a = basis.centers();
  double worst = 0.0;
  for (const Point& x : grid) {
    if (a.boundary_distance(x) < basis.M() / 2)
      throw Error("reproduction_residual: grid point within M/2 of the window boundary");
    double s = 0.0;
    for (std::size_t idx : basis.active_at(x)) {
      const Point& p = a.points[idx];
      s += q(std::span<const double>(p.data(), a.dim)) * basis.eval(idx, x);
    }
    worst = std::max(worst, std::abs(q(std::span<const double>(x.data(), a.dim)) - s));
  }
  return worst;
}

}  // namespace rbfq
