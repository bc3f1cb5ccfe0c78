#include "rbfq/compress.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rbfq/error.hpp"
#include "rbfq/quadrature.hpp"

namespace rbfq {

double round_to_dyadic(double x) {
  require(x > 0.0, "round_to_dyadic: x must be positive");
  const double k = std::max(0.0, std::round(-std::log2(x)));
  return std::ldexp(1.0, -static_cast<int>(k));
}

double CompressionBudget::beta() const {
  if (beta_override > 0.0) return beta_override;
  return std::min(r - d / p, static_cast<double>(ell + 1));
}

double CompressionBudget::greedy_h() const {
  require(n >= 1, "CompressionBudget: n must be >= 1");
  return round_to_dyadic(std::pow(static_cast<double>(n), -1.0 / (p * beta() + d)));
}

double CompressionBudget::threshold_h() const {
  require(n >= 1, "CompressionBudget: n must be >= 1");
  require(a_decay >= 0.0, "CompressionBudget: a_decay must be >= 0");
  const double e = (a_decay * p + d) / (d * (d + (a_decay + r) * p));
  return round_to_dyadic(std::pow(static_cast<double>(n), -e));
}

Approximant::Approximant(std::shared_ptr<const QuasiBasis> basis, double h,
                         std::vector<std::pair<std::size_t, double>> terms)
    : basis_(std::move(basis)), h_(h), terms_(std::move(terms)) {
  const auto& dc = basis_->decay();
  reach_ = dc.compact ? dc.compact_radius : basis_->tail_radius();
  const auto& pts = basis_->centers().points;
  std::sort(terms_.begin(), terms_.end(),
            [&](const auto& a, const auto& b) { return pts[a.first] < pts[b.first]; });
}

double Approximant::operator()(const Point& x) const {
  const auto& pts = basis_->centers().points;
  const Point y{x[0] / h_, x[1] / h_};
  auto it = std::lower_bound(terms_.begin(), terms_.end(), y[0] - reach_,
                             [&](const auto& t, double v) { return pts[t.first][0] < v; });
  long double s = 0.0L;
  for (; it != terms_.end() && pts[it->first][0] <= y[0] + reach_; ++it) {
    const Point& a = pts[it->first];
    if (std::hypot(a[0] - y[0], a[1] - y[1]) > reach_) continue;
    s += static_cast<long double>(it->second) * basis_->psi(it->first, y);
  }
  return static_cast<double>(s);
}

ErrorReport measure_error(const Approximant& g, const PointFunction& f, double lo, double hi, double p) {
  const double cell = g.h() / 4.0;
  const int cells = std::max(1, static_cast<int>(std::ceil((hi - lo) / cell - 1e-9)));
  const double w = (hi - lo) / cells;
  const QuadratureRule& rule = gauss_legendre(6);
  ErrorReport rep;
  long double acc = 0.0L;
  for (int c = 0; c < cells; ++c) {
    const double a = lo + c * w;
    for (double x : {a, a + w}) rep.sup = std::max(rep.sup, std::abs(f({x, 0.0}) - g({x, 0.0})));
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double x = a + 0.5 * w * (1.0 + rule.nodes[q]);
      const double e = std::abs(f({x, 0.0}) - g({x, 0.0}));
      rep.sup = std::max(rep.sup, e);
      if (!std::isinf(p)) acc += 0.5L * w * rule.weights[q] * std::pow(static_cast<long double>(e), p);
    }
  }
  rep.lp = std::isinf(p) ? rep.sup : static_cast<double>(std::pow(acc, 1.0L / p));
  return rep;
}

nlohmann::json SelectionResult::to_json() const {
  return {{"h", h},
          {"kept", selected.size()},
          {"min_kept", min_kept},
          {"max_discarded", max_discarded},
          {"nonzero_samples", nonzero_samples},
          {"phi_terms", phi_terms}};
}

namespace {

std::size_t stencil_size(const QuasiBasis& B) {
  if (B.mu().is_lattice()) return B.mu().stencil_entries().size();
  std::size_t m = 0;
  for (const auto& r : B.mu().rows) m = std::max(m, r.size());
  return m;
}

void check_probe_margin(const QuasiBasis& B, double h, double lo, double hi) {
  const CenterSet& A = B.centers();
  const double R = B.tail_radius();
  std::vector<Point> corners;
  if (B.dim() == 1) {
    corners = {{lo / h, 0.0}, {hi / h, 0.0}};
  } else {
    corners = {{lo / h, lo / h}, {lo / h, hi / h}, {hi / h, lo / h}, {hi / h, hi / h}};
  }
  for (const Point& c : corners)
    if (A.boundary_distance(c) < R)
      throw Error("greedy_nterm: center window too small for h = " + std::to_string(h) +
                  "; probe points need a margin of " + std::to_string(R) + " lattice units");
}

// Indices sorted by decreasing |value|, ties by index.
std::vector<std::size_t> order_by_magnitude(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(v[a]) > std::abs(v[b]); });
  return idx;
}

SelectionResult greedy_select(std::shared_ptr<const QuasiBasis> basis, const std::vector<std::size_t>& candidates,
                              const std::vector<double>& samples, int n, double h) {
  SelectionResult res;
  res.h = h;
  for (double s : samples)
    if (s != 0.0) ++res.nonzero_samples;
  const auto order = order_by_magnitude(samples);
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(n), res.nonzero_samples);
  std::vector<std::pair<std::size_t, double>> terms;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double v = samples[order[i]];
    if (i < keep) {
      res.selected.push_back(candidates[order[i]]);
      res.coefficients.push_back(v);
      terms.emplace_back(candidates[order[i]], v);
    } else {
      res.max_discarded = std::max(res.max_discarded, std::abs(v));
    }
  }
  res.min_kept = res.coefficients.empty() ? 0.0 : std::abs(res.coefficients.back());
  res.phi_terms = res.selected.size() * stencil_size(*basis);
  res.approximant = std::make_shared<Approximant>(basis, h, std::move(terms));
  return res;
}

}  // namespace

SelectionResult greedy_nterm(std::shared_ptr<const QuasiBasis> basis, const PointFunction& f,
                             const CompressionBudget& budget, double probe_lo, double probe_hi,
                             double h_override) {
  require(basis != nullptr, "greedy_nterm: null basis");
  require(budget.n >= 1, "greedy_nterm: n must be >= 1");
  const double h = h_override > 0.0 ? h_override : budget.greedy_h();
  check_probe_margin(*basis, h, probe_lo, probe_hi);
  const CenterSet& A = basis->centers();
  std::vector<std::size_t> cand(A.size());
  std::iota(cand.begin(), cand.end(), 0);
  std::vector<double> samples(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) samples[i] = f({h * A.points[i][0], h * A.points[i][1]});
  return greedy_select(basis, cand, samples, budget.n, h);
}

SelectionResult threshold_compress(std::shared_ptr<const QuasiBasis> basis,
                                   std::shared_ptr<const LocalFunctional> S, const PointFunction& f,
                                   const CompressionBudget& budget, double h_override) {
  require(basis != nullptr && S != nullptr, "threshold_compress: incomplete operator");
  const double h = h_override > 0.0 ? h_override : budget.threshold_h();
  const ModifiedOperator op{basis, S, h};
  const CenterSet& A = basis->centers();
  const double radius = std::pow(static_cast<double>(budget.n), 1.0 / budget.d);
  const double level = std::pow(h, budget.r);
  // The ball |alpha| <= n^{1/d} must lie inside the window.
  const Point edge{radius, budget.d == 2 ? radius : 0.0};
  if (A.boundary_distance(edge) < 0.0 || A.boundary_distance({-edge[0], -edge[1]}) < 0.0)
    throw Error("threshold_compress: center window does not contain the ball |alpha| <= n^{1/d}");
  SelectionResult res;
  res.h = h;
  std::vector<std::pair<std::size_t, double>> terms;
  for (std::size_t i = 0; i < A.size(); ++i) {
    const Point& a = A.points[i];
    const double c = sample_fh(op, f, i);
    if (c != 0.0) ++res.nonzero_samples;
    const bool in_ball = std::hypot(a[0], a[1]) <= radius;
    if (in_ball || std::abs(c) >= level) {
      res.selected.push_back(i);
      res.coefficients.push_back(c);
      terms.emplace_back(i, c);
    } else {
      res.max_discarded = std::max(res.max_discarded, std::abs(c));
    }
  }
  res.min_kept = 0.0;
  res.phi_terms = res.selected.size() * stencil_size(*basis);
  res.approximant = std::make_shared<Approximant>(basis, h, std::move(terms));
  return res;
}

nlohmann::json StagnationReport::to_json() const {
  nlohmann::json rowsj = nlohmann::json::array();
  for (const auto& r : rows) rowsj.push_back({{"n", r.n}, {"h", r.h}, {"kept", r.kept}, {"sup_error", r.sup_error}});
  return {{"data_radius", data_radius}, {"radii", radii}, {"rows", rowsj}, {"min_error", min_error}};
}

StagnationReport stagnation_probe(std::shared_ptr<const QuasiBasis> basis, const PointFunction& f,
                                  const std::vector<int>& budgets, const std::vector<double>& radii,
                                  const CompressionBudget& params) {
  require(basis != nullptr && basis->dim() == 1, "stagnation_probe: 1-d basis required");
  require(!budgets.empty() && !radii.empty(), "stagnation_probe: empty budget or radius list");
  require(std::is_sorted(budgets.begin(), budgets.end()) && std::is_sorted(radii.begin(), radii.end()),
          "stagnation_probe: budgets and radii must be nondecreasing");
  StagnationReport rep;
  rep.data_radius = radii.front();
  rep.radii = radii;
  rep.min_error = std::numeric_limits<double>::infinity();
  const CenterSet& A = basis->centers();
  for (int n : budgets) {
    CompressionBudget b = params;
    b.n = n;
    const double h = b.greedy_h();
    if (A.boundary_distance({rep.data_radius / h, 0.0}) < 0.0 || A.boundary_distance({-rep.data_radius / h, 0.0}) < 0.0)
      throw Error("stagnation_probe: center window does not cover the data radius at h = " + std::to_string(h));
    std::vector<std::size_t> cand;
    std::vector<double> samples;
    for (std::size_t i = 0; i < A.size(); ++i) {
      const double x = h * A.points[i][0];
      if (std::abs(x) > rep.data_radius) continue;
      cand.push_back(i);
      samples.push_back(f({x, 0.0}));
    }
    const SelectionResult sel = greedy_select(basis, cand, samples, n, h);
    StagnationRow row;
    row.n = n;
    row.h = h;
    row.kept = sel.selected.size();
    for (double R : radii) {
      const double step = h / 8.0;
      const int m = static_cast<int>(std::ceil(2.0 * R / step));
      double err = 0.0;
      for (int i = 0; i <= m; ++i) {
        const double x = -R + 2.0 * R * i / m;
        err = std::max(err, std::abs(f({x, 0.0}) - (*sel.approximant)({x, 0.0})));
      }
      row.sup_error.push_back(err);
    }
    rep.min_error = std::min(rep.min_error, row.sup_error.back());
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace rbfq
