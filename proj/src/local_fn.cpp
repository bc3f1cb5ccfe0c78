#include "rbfq/local_fn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rbfq/error.hpp"
#include "rbfq/quadrature.hpp"

namespace rbfq {

namespace {

using Rule = std::vector<std::pair<Point, double>>;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Composite Gauss-Legendre on [a, b].
std::vector<std::pair<double, double>> line_rule(double a, double b, int nodes, int panels) {
  std::vector<std::pair<double, double>> out;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const QuadratureRule r = gauss_legendre(nodes, a + p * w, a + (p + 1) * w);
    for (std::size_t i = 0; i < r.nodes.size(); ++i) out.emplace_back(r.nodes[i], r.weights[i]);
  }
  return out;
}

// Polar rule on the disk of radius rho: Gauss-Legendre in r, trapezoid in
// the angle (exact for trigonometric degree < angles).
Rule disk_rule(double rho, int nodes, int panels) {
  Rule out;
  const int angles = 2 * nodes * panels + 2;
  for (const auto& [r, w] : line_rule(0.0, rho, nodes, panels))
    for (int k = 0; k < angles; ++k) {
      const double t = 2.0 * std::numbers::pi * k / angles;
      out.push_back({{r * std::cos(t), r * std::sin(t)}, w * r * 2.0 * std::numbers::pi / angles});
    }
  return out;
}

Rule ball_rule(int dim, double rho, int nodes, int panels) {
  if (dim == 2) return disk_rule(rho, nodes, panels);
  Rule out;
  for (const auto& [x, w] : line_rule(-rho, rho, nodes, panels)) out.push_back({{x, 0.0}, w});
  return out;
}

double eval_poly(const Polynomial& p, const Point& x, int dim) {
  return p(std::span<const double>(x.data(), dim));
}

}  // namespace

FunctionalVariant parse_functional_variant(const std::string& name) {
  if (name == "kernel") return FunctionalVariant::kernel;
  if (name == "spline") return FunctionalVariant::spline;
  if (name == "difference") return FunctionalVariant::difference;
  throw Error("unknown functional variant '" + name + "'");
}

std::string to_string(FunctionalVariant v) {
  switch (v) {
    case FunctionalVariant::kernel:
      return "kernel";
    case FunctionalVariant::spline:
      return "spline";
    case FunctionalVariant::difference:
      return "difference";
  }
  return "";
}

double LocalFunctional::eta(double r) const {
  require(variant_ == FunctionalVariant::difference, "eta: difference variant only");
  r = std::abs(r);
  if (r >= eta_radius_) return 0.0;
  return (*step_)(1.0 - r / eta_radius_) / eta_norm_;
}

double LocalFunctional::scaled_spline(const Point& x) const {
  require(variant_ == FunctionalVariant::spline, "scaled_spline: spline variant only");
  double v = c1_ * spline_->mother(0, c1_ * x[0]);
  if (dim_ == 2) v *= c1_ * spline_->mother(0, c1_ * x[1]);
  return v;
}

double LocalFunctional::apply(const PointFunction& g) const {
  long double s = 0.0L;
  for (const auto& [p, w] : rule_) {
    const double v = g(p);
    if (!std::isfinite(v)) throw NumericalError("local functional: non-finite integrand sample");
    s += static_cast<long double>(w) * v;
  }
  return static_cast<double>(s);
}

LocalFunctional build_local_functional(FunctionalVariant variant, int ell, int dim,
                                       const FunctionalOptions& options) {
  if (ell < 0) throw Error("build_local_functional: ell must be >= 0");
  if (dim != 1 && dim != 2) throw Error("build_local_functional: dim must be 1 or 2");
  require(options.panels >= 1, "build_local_functional: panels must be >= 1");
  LocalFunctional S;
  S.variant_ = variant;
  S.dim_ = dim;
  S.ell_ = ell;
  const int nodes = options.nodes > 0 ? options.nodes : 2 * (ell + 2);
  const int panels = options.panels;

  switch (variant) {
    case FunctionalVariant::kernel: {
      // Gram-Schmidt on monomials in L^2(B_1(0)); the Gram rule is exact for
      // products of degree <= 2 ell.
      const Rule gram = ball_rule(dim, 1.0, ell + 2, 1);
      auto inner = [&](const Polynomial& a, const Polynomial& b) {
        long double s = 0.0L;
        for (const auto& [p, w] : gram) s += static_cast<long double>(w) * eval_poly(a, p, dim) * eval_poly(b, p, dim);
        return static_cast<double>(s);
      };
      std::vector<Polynomial> ortho;
      for (const MultiIndex& g : multi_indices_up_to(dim, ell)) {
        Polynomial v = Polynomial::monomial(g);
        for (int pass = 0; pass < 2; ++pass)
          for (const Polynomial& e : ortho) v -= inner(v, e) * e;
        const double n2 = inner(v, v);
        if (!(n2 > 1e-24)) throw NumericalError("build_local_functional: singular Gram matrix");
        ortho.push_back((1.0 / std::sqrt(n2)) * v);
      }
      Polynomial Phi(dim);
      const Point zero{0.0, 0.0};
      for (const Polynomial& e : ortho) Phi += eval_poly(e, zero, dim) * e;
      S.Phi_ = Phi.pruned(1e-15);
      double sup = 0.0;
      for (const auto& [p, w] : ball_rule(dim, 1.0, 16, 1)) sup = std::max(sup, std::abs(eval_poly(S.Phi_, p, dim)));
      sup = std::max(sup, std::abs(eval_poly(S.Phi_, zero, dim)));
      S.C_S_ = sup;
      for (const auto& [p, w] : ball_rule(dim, 1.0, nodes, panels)) S.rule_.push_back({p, w * eval_poly(S.Phi_, p, dim)});
      break;
    }
    case FunctionalVariant::spline: {
      auto line = std::make_shared<CenterSet>(generate_centers(1, CenterKind::lattice, symmetric_window(1, 1.0), 0.0, 0));
      S.spline_ = std::make_shared<ReproBasis>(build_repro_basis(line, 2 * ell + 1));
      const double r = S.spline_->mother_radius();
      S.c1_ = dim == 1 ? r : r * std::sqrt(2.0);
      const int deg = S.spline_->spline_order() - 1;
      const int n1 = std::max(nodes, (deg + ell) / 2 + 1);
      std::vector<std::pair<double, double>> axis;
      const int pieces = static_cast<int>(std::lround(2.0 * r));
      for (int i = 0; i < pieces; ++i)
        for (const auto& q : line_rule((-r + i) / S.c1_, (-r + i + 1) / S.c1_, n1, panels)) axis.push_back(q);
      double sup = 0.0;
      for (double x = -r; x <= r; x += 1.0 / 64.0) sup = std::max(sup, std::abs(S.spline_->mother(0, x)));
      S.C_S_ = std::pow(S.c1_ * sup, dim);
      if (dim == 1) {
        for (const auto& [x, w] : axis) S.rule_.push_back({{x, 0.0}, w * S.scaled_spline({x, 0.0})});
      } else {
        for (const auto& [x, wx] : axis)
          for (const auto& [y, wy] : axis) S.rule_.push_back({{x, y}, wx * wy * S.scaled_spline({x, y})});
      }
      break;
    }
    case FunctionalVariant::difference: {
      const int k = ell + 1;
      S.step_ = std::make_shared<SmoothStep>(k);
      S.eta_radius_ = 1.0 / k;
      // Normalize eta exactly: the profile is a polynomial in |u| per side.
      const int exact = 2 * k + 4;
      double mass = 0.0;
      if (dim == 1) {
        for (const auto& [t, w] : line_rule(0.0, S.eta_radius_, exact, 1)) mass += 2.0 * w * (*S.step_)(1.0 - t / S.eta_radius_);
      } else {
        for (const auto& [t, w] : line_rule(0.0, S.eta_radius_, exact, 1))
          mass += 2.0 * std::numbers::pi * t * w * (*S.step_)(1.0 - t / S.eta_radius_);
      }
      S.eta_norm_ = mass;
      Rule base;
      if (dim == 1) {
        for (const auto& [u, w] : line_rule(-S.eta_radius_, 0.0, nodes, panels)) base.push_back({{u, 0.0}, w});
        for (const auto& [u, w] : line_rule(0.0, S.eta_radius_, nodes, panels)) base.push_back({{u, 0.0}, w});
      } else {
        base = disk_rule(S.eta_radius_, nodes, panels);
      }
      // f(0) - Delta_u^k f(0) = -sum_{j=1}^k (-1)^j C(k, j) f(-j u).
      double C = 0.0;
      for (int j = 1; j <= k; ++j) {
        const double c = -((j % 2 == 0) ? 1.0 : -1.0) * binomial(k, j);
        C += std::abs(c) * std::pow(static_cast<double>(j), -dim);
        for (const auto& [u, w] : base) {
          const double e = S.eta(std::hypot(u[0], u[1]));
          if (e == 0.0) continue;
          S.rule_.push_back({{-j * u[0], -j * u[1]}, c * w * e});
        }
      }
      S.C_S_ = C * S.eta(0.0);
      break;
    }
  }
  return S;
}

double sample_fh(const ModifiedOperator& op, const PointFunction& f, std::size_t alpha) {
  require(op.S != nullptr && op.basis != nullptr, "sample_fh: incomplete operator");
  const Point& a = op.basis->centers().points[alpha];
  const double h = op.h;
  return op.S->apply([&](const Point& y) { return f({h * (y[0] + a[0]), h * (y[1] + a[1])}); });
}

QhResult apply_Qh_tilde(const ModifiedOperator& op, const PointFunction& f, const Point& x,
                        CoefficientCache* cache) {
  const SampledOperator sop{op.basis, op.h, CoefficientSource::functional};
  const auto terms = qh_terms(sop, x);
  const QuasiBasis& B = *op.basis;
  const CenterSet& A = B.centers();
  const double R = B.tail_radius();
  const Point y{x[0] / op.h, x[1] / op.h};
  long double s = 0.0L;
  double shell = 0.0;
  for (const auto& [idx, v] : terms) {
    double c;
    if (cache) {
      auto it = cache->find(idx);
      if (it == cache->end()) it = cache->emplace(idx, sample_fh(op, f, idx)).first;
      c = it->second;
    } else {
      c = sample_fh(op, f, idx);
    }
    s += static_cast<long double>(c) * v;
    const Point& p = A.points[idx];
    if (std::hypot(p[0] - y[0], p[1] - y[1]) >= R - 1.0) shell = std::max(shell, std::abs(c));
  }
  return {static_cast<double>(s), B.tail_bound(R) * shell, terms.size()};
}

}  // namespace rbfq
