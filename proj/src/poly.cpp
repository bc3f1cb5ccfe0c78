#include "rbfq/poly.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "rbfq/error.hpp"

namespace rbfq {

int total_degree(const MultiIndex& gamma) {
  int n = 0;
  for (int g : gamma) n += g;
  return n;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double multi_factorial(const MultiIndex& gamma) {
  double r = 1.0;
  for (int g : gamma) r *= factorial(g);
  return r;
}

std::vector<MultiIndex> multi_indices_up_to(int dim, int max_degree) {
  std::vector<MultiIndex> out;
  if (max_degree < 0) return out;
  MultiIndex cur(dim, 0);
  // Odometer over the box [0, max_degree]^dim, keeping |gamma| <= max_degree.
  while (true) {
    if (total_degree(cur) <= max_degree) out.push_back(cur);
    int i = dim - 1;
    while (i >= 0 && cur[i] == max_degree) {
      cur[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++cur[i];
  }
  std::sort(out.begin(), out.end());
  return out;
}

Polynomial::Polynomial(int dim) : dim_(dim) { require(dim >= 1, "Polynomial: dim must be >= 1"); }

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(MultiIndex(dim, 0), c);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& gamma, double c) {
  Polynomial p(static_cast<int>(gamma.size()));
  p.add_term(gamma, c);
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [g, c] : terms_) d = std::max(d, total_degree(g));
  return d;
}

double Polynomial::coeff(const MultiIndex& gamma) const {
  auto it = terms_.find(gamma);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const MultiIndex& gamma, double c) {
  require(static_cast<int>(gamma.size()) == dim_, "Polynomial: multi-index length != dim");
  for (int g : gamma) require(g >= 0, "Polynomial: negative exponent");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(gamma, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::operator()(std::span<const double> x) const {
  require(static_cast<int>(x.size()) >= dim_, "Polynomial: point has too few coordinates");
  double sum = 0.0;
  for (const auto& [g, c] : terms_) {
    double t = c;
    for (int i = 0; i < dim_; ++i) t *= std::pow(x[i], g[i]);
    sum += t;
  }
  return sum;
}

double Polynomial::operator()(double x) const {
  require(dim_ == 1, "Polynomial: scalar evaluation needs dim 1");
  return (*this)(std::span<const double>(&x, 1));
}

Polynomial Polynomial::derivative(const MultiIndex& gamma) const {
  require(static_cast<int>(gamma.size()) == dim_, "Polynomial::derivative: bad multi-index");
  Polynomial out(dim_);
  for (const auto& [g, c] : terms_) {
    MultiIndex e = g;
    double factor = c;
    bool zero = false;
    for (int i = 0; i < dim_ && !zero; ++i) {
      if (gamma[i] > g[i]) {
        zero = true;
        break;
      }
      for (int k = 0; k < gamma[i]; ++k) factor *= (g[i] - k);
      e[i] = g[i] - gamma[i];
    }
    if (!zero) out.add_term(e, factor);
  }
  return out;
}

Polynomial Polynomial::truncated(int max_degree) const {
  Polynomial out(dim_);
  for (const auto& [g, c] : terms_)
    if (total_degree(g) <= max_degree) out.add_term(g, c);
  return out;
}

Polynomial Polynomial::pruned(double tol) const {
  Polynomial out(dim_);
  for (const auto& [g, c] : terms_)
    if (std::abs(c) > tol) out.add_term(g, c);
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require(other.dim_ == dim_, "Polynomial: dimension mismatch");
  for (const auto& [g, c] : other.terms_) add_term(g, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require(other.dim_ == dim_, "Polynomial: dimension mismatch");
  for (const auto& [g, c] : other.terms_) add_term(g, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [g, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  require(a.dim_ == b.dim_, "Polynomial: dimension mismatch");
  Polynomial out(a.dim_);
  for (const auto& [ga, ca] : a.terms_) {
    for (const auto& [gb, cb] : b.terms_) {
      MultiIndex g(a.dim_);
      for (int i = 0; i < a.dim_; ++i) g[i] = ga[i] + gb[i];
      out.add_term(g, ca * cb);
    }
  }
  return out;
}

double Polynomial::max_abs_coeff(int max_degree) const {
  double m = 0.0;
  for (const auto& [g, c] : terms_)
    if (total_degree(g) <= max_degree) m = std::max(m, std::abs(c));
  return m;
}

nlohmann::json Polynomial::to_json() const {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [g, c] : terms_) terms.push_back({g, c});
  return {{"dim", dim_}, {"terms", terms}};
}

Polynomial Polynomial::from_json(const nlohmann::json& j) {
  Polynomial p(j.at("dim").get<int>());
  for (const auto& t : j.at("terms")) p.add_term(t.at(0).get<MultiIndex>(), t.at(1).get<double>());
  return p;
}

HomogeneousPolynomial::HomogeneousPolynomial(Polynomial p, int degree)
    : poly_(std::move(p)), degree_(degree) {
  require(degree >= 0, "HomogeneousPolynomial: negative degree");
  for (const auto& [g, c] : poly_.terms())
    require(total_degree(g) == degree, "HomogeneousPolynomial: term of wrong degree");
}

PowerSeries::PowerSeries(Polynomial p, int order) : poly_(std::move(p)), order_(order) {
  require(order >= 0, "PowerSeries: negative order");
  require(poly_.degree() <= order, "PowerSeries: term exceeds order");
}

double PowerSeries::constant_term() const { return poly_.coeff(MultiIndex(poly_.dim(), 0)); }

double SmoothFunction::value(std::span<const double> x) const {
  return derivative(MultiIndex(dim(), 0), x);
}

double PolynomialFunction::derivative(const MultiIndex& gamma, std::span<const double> x) const {
  return p_.derivative(gamma)(x);
}

PowerSeries series_reciprocal(const PowerSeries& f, int order) {
  require(order >= 0, "series_reciprocal: negative order");
  const double f0 = f.constant_term();
  if (f0 == 0.0) throw Error("series_reciprocal: F(0) = 0, reciprocal undefined");
  const int dim = f.dim();
  auto indices = multi_indices_up_to(dim, order);
  std::stable_sort(indices.begin(), indices.end(), [](const MultiIndex& a, const MultiIndex& b) {
    return total_degree(a) < total_degree(b);
  });
  std::map<MultiIndex, double> t;
  for (const auto& gamma : indices) {
    if (total_degree(gamma) == 0) {
      t[gamma] = 1.0 / f0;
      continue;
    }
    // Coefficient of y^gamma in F*T must vanish: sum_{beta <= gamma} F_{gamma-beta} T_beta = 0.
    double acc = 0.0;
    for (const auto& [beta, tb] : t) {
      MultiIndex diff(dim);
      bool ok = true;
      for (int i = 0; i < dim; ++i) {
        diff[i] = gamma[i] - beta[i];
        if (diff[i] < 0) {
          ok = false;
          break;
        }
      }
      if (ok) acc += f.poly().coeff(diff) * tb;
    }
    t[gamma] = -acc / f0;
  }
  Polynomial out(dim);
  for (const auto& [g, c] : t) out.add_term(g, c);
  return PowerSeries(std::move(out), order);
}

Polynomial build_symbol_P(const PowerSeries& t, const HomogeneousPolynomial& g) {
  if (t.dim() != g.dim()) throw Error("build_symbol_P: dimension mismatch between T and G");
  require(g.degree() > 0 && g.degree() % 2 == 0, "build_symbol_P: G must have positive even degree");
  return t.poly() * g.poly();
}

DiffOperatorResult apply_diff_operator(const Polynomial& p, const SmoothFunction& f,
                                       std::span<const double> x) {
  require(p.dim() == f.dim(), "apply_diff_operator: dimension mismatch");
  if (p.degree() > f.max_derivative())
    throw Error("apply_diff_operator: function lacks derivatives of order " +
                std::to_string(p.degree()));
  std::complex<double> acc{0.0, 0.0};
  static const std::complex<double> powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (const auto& [g, c] : p.terms()) acc += c * powers[total_degree(g) % 4] * f.derivative(g, x);
  DiffOperatorResult r;
  r.real = acc.real();
  r.imag = acc.imag();
  r.imag_exceeded = std::abs(acc.imag()) > kImagTolerance;
  return r;
}

Polynomial taylor_polynomial(const SmoothFunction& f, std::span<const double> x, int k) {
  if (k < 0) throw Error("taylor_polynomial: k must be >= 0");
  const int dim = f.dim();
  if (k > f.max_derivative())
    throw Error("taylor_polynomial: function lacks derivatives of order " + std::to_string(k));
  Polynomial out(dim);
  for (const auto& gamma : multi_indices_up_to(dim, k)) {
    const double c = f.derivative(gamma, x) / multi_factorial(gamma);
    if (c == 0.0) continue;
    Polynomial term = Polynomial::constant(dim, c);
    for (int i = 0; i < dim; ++i) {
      MultiIndex e(dim, 0);
      e[i] = 1;
      Polynomial shift = Polynomial::monomial(e) - Polynomial::constant(dim, x[i]);
      for (int p = 0; p < gamma[i]; ++p) term = term * shift;
    }
    out += term;
  }
  return out;
}

}  // namespace rbfq
