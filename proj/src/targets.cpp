#include "rbfq/targets.hpp"

#include <cmath>
#include <numbers>

#include "rbfq/error.hpp"

namespace rbfq {

namespace {

Point to_point(std::span<const double> x) { return {x[0], x.size() > 1 ? x[1] : 0.0}; }

class SinTarget final : public Target {
 public:
  explicit SinTarget(int dim) : dim_(dim) {}
  std::string name() const override { return "sin"; }
  int dim() const override { return dim_; }
  int max_derivative() const override { return 1 << 20; }
  double operator()(const Point& x) const override { return std::sin(x[0] + (dim_ == 2 ? x[1] : 0.0)); }
  double derivative(const MultiIndex& g, std::span<const double> x) const override {
    const double s = x[0] + (dim_ == 2 ? x[1] : 0.0);
    return std::sin(s + total_degree(g) * std::numbers::pi / 2.0);
  }

 private:
  int dim_;
};

class ExpTarget final : public Target {
 public:
  explicit ExpTarget(int dim) : dim_(dim) {}
  std::string name() const override { return "exp"; }
  int dim() const override { return dim_; }
  int max_derivative() const override { return 1 << 20; }
  double operator()(const Point& x) const override { return std::exp(x[0] + (dim_ == 2 ? x[1] : 0.0)); }
  double derivative(const MultiIndex&, std::span<const double> x) const override {
    return std::exp(x[0] + (dim_ == 2 ? x[1] : 0.0));
  }

 private:
  int dim_;
};

class PolyTarget final : public Target {
 public:
  PolyTarget(Polynomial p, std::string name) : p_(std::move(p)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  int dim() const override { return p_.dim(); }
  int max_derivative() const override { return 1 << 20; }
  double operator()(const Point& x) const override { return p_(std::span<const double>(x.data(), p_.dim())); }
  double derivative(const MultiIndex& g, std::span<const double> x) const override { return p_.derivative(g)(x); }

 private:
  Polynomial p_;
  std::string name_;
};

// b(t) = exp(1 - 1/(1 - t^2)) on |t| < 1, scaled to the given radius.  The
// n-th derivative is Q_n(t) (1 - t^2)^{-2n} b(t) with
// Q_{n+1} = Q_n' (1-t^2)^2 + 4 n t Q_n (1-t^2) - 2 t Q_n.
class BumpTarget final : public Target {
 public:
  BumpTarget(int dim, double radius) : dim_(dim), radius_(radius) {
    Polynomial q = Polynomial::constant(1, 1.0);
    const Polynomial t = Polynomial::monomial({1});
    const Polynomial s = Polynomial::constant(1, 1.0) - t * t;
    for (int n = 0; n <= kMaxOrder; ++n) {
      q_.push_back(q);
      q = q.derivative({1}) * s * s + (4.0 * n) * t * q * s - 2.0 * t * q;
    }
  }
  std::string name() const override { return "bump"; }
  int dim() const override { return dim_; }
  int max_derivative() const override { return dim_ == 1 ? kMaxOrder : 0; }
  double support_radius() const override { return radius_; }
  double operator()(const Point& x) const override {
    return profile(0, (dim_ == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1])) / radius_);
  }
  double derivative(const MultiIndex& g, std::span<const double> x) const override {
    const int n = total_degree(g);
    if (n == 0) return (*this)(to_point(x));
    if (dim_ != 1 || n > kMaxOrder) throw Error("bump: derivative not available");
    return profile(n, x[0] / radius_) * std::pow(radius_, -n);
  }

 private:
  static constexpr int kMaxOrder = 8;
  double profile(int n, double t) const {
    const double s = 1.0 - t * t;
    if (s <= 0.0) return 0.0;
    const double b = std::exp(1.0 - 1.0 / s);
    if (n == 0) return b;
    return q_[n](t) * std::pow(s, -2 * n) * b;
  }
  int dim_;
  double radius_;
  std::vector<Polynomial> q_;
};

// |x|^gamma (Euclidean norm in 2-d).
class AbsPowTarget final : public Target {
 public:
  AbsPowTarget(int dim, double gamma) : dim_(dim), gamma_(gamma) {}
  std::string name() const override { return "abs_pow"; }
  int dim() const override { return dim_; }
  int max_derivative() const override {
    if (dim_ != 1) return 0;
    const double fl = std::floor(gamma_);
    return fl == gamma_ ? 1 << 20 : static_cast<int>(fl);
  }
  double operator()(const Point& x) const override {
    const double r = dim_ == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
    return std::pow(r, gamma_);
  }
  double derivative(const MultiIndex& g, std::span<const double> x) const override {
    const int n = total_degree(g);
    if (n == 0) return (*this)(to_point(x));
    if (dim_ != 1 || n > max_derivative()) throw Error("abs_pow: derivative not available");
    const double r = std::abs(x[0]);
    if (r == 0.0) return gamma_ - n > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    double c = 1.0;
    for (int i = 0; i < n; ++i) c *= gamma_ - i;
    const double sgn = (x[0] < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    return sgn * c * std::pow(r, gamma_ - n);
  }

 private:
  int dim_;
  double gamma_;
};

double param(const std::map<std::string, double>& p, const std::string& key, double def) {
  auto it = p.find(key);
  return it == p.end() ? def : it->second;
}

}  // namespace

double Target::derivative_norm(int r, const Point& x) const {
  const std::span<const double> xs(x.data(), dim());
  double s = 0.0;
  for (const MultiIndex& g : multi_indices_up_to(dim(), r)) {
    if (total_degree(g) != r) continue;
    const double v = derivative(g, xs);
    s += v * v;
  }
  return std::sqrt(s);
}

PointFunction Target::handle() const {
  return [this](const Point& x) { return (*this)(x); };
}

std::shared_ptr<Target> make_target(const std::string& name, int dim,
                                    const std::map<std::string, double>& params) {
  if (dim != 1 && dim != 2) throw Error("make_target: dim must be 1 or 2");
  if (name == "sin") return std::make_shared<SinTarget>(dim);
  if (name == "exp") return std::make_shared<ExpTarget>(dim);
  if (name == "const1") return std::make_shared<PolyTarget>(Polynomial::constant(dim, 1.0), "const1");
  if (name == "poly") {
    const int deg = static_cast<int>(param(params, "degree", 1.0));
    MultiIndex g(dim, 0);
    g[0] = deg;
    return std::make_shared<PolyTarget>(Polynomial::monomial(g), "poly");
  }
  if (name == "bump") {
    const double radius = param(params, "radius", 1.0);
    if (radius <= 0.0) throw Error("make_target: bump radius must be positive");
    return std::make_shared<BumpTarget>(dim, radius);
  }
  if (name == "abs_pow") return std::make_shared<AbsPowTarget>(dim, param(params, "gamma", 1.5));
  throw Error("make_target: unknown target '" + name + "'");
}

}  // namespace rbfq
