#pragma once

#include <map>
#include <span>
#include <vector>

#include "json.hpp"

namespace rbfq {

using MultiIndex = std::vector<int>;

int total_degree(const MultiIndex& gamma);
double factorial(int n);
double multi_factorial(const MultiIndex& gamma);

// Sparse multivariate polynomial in canonical form: zero coefficients are
// never stored, and keys are ordered lexicographically.
class Polynomial {
 public:
  explicit Polynomial(int dim = 1);

  static Polynomial constant(int dim, double c);
  static Polynomial monomial(const MultiIndex& gamma, double c = 1.0);

  int dim() const { return dim_; }
  // -1 for the zero polynomial.
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const std::map<MultiIndex, double>& terms() const { return terms_; }
  double coeff(const MultiIndex& gamma) const;

  void add_term(const MultiIndex& gamma, double c);

  double operator()(std::span<const double> x) const;
  double operator()(double x) const;
  Polynomial derivative(const MultiIndex& gamma) const;
  Polynomial truncated(int max_degree) const;
  // Drops coefficients with magnitude <= tol.
  Polynomial pruned(double tol) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  // Largest coefficient magnitude among terms of total degree <= max_degree.
  double max_abs_coeff(int max_degree) const;

  nlohmann::json to_json() const;
  static Polynomial from_json(const nlohmann::json& j);

 private:
  int dim_;
  std::map<MultiIndex, double> terms_;
};

// All stored terms share the same total degree.
class HomogeneousPolynomial {
 public:
  HomogeneousPolynomial(Polynomial p, int degree);
  int dim() const { return poly_.dim(); }
  int degree() const { return degree_; }
  const Polynomial& poly() const { return poly_; }

 private:
  Polynomial poly_;
  int degree_;
};

// Truncated power series: no term exceeds total degree `order`.
class PowerSeries {
 public:
  PowerSeries(Polynomial p, int order);
  int dim() const { return poly_.dim(); }
  int order() const { return order_; }
  const Polynomial& poly() const { return poly_; }
  double constant_term() const;

 private:
  Polynomial poly_;
  int order_;
};

// Function that can report partial derivatives D^gamma f(x).
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual int dim() const = 0;
  // Highest total derivative order available; a large value means unlimited.
  virtual int max_derivative() const = 0;
  virtual double derivative(const MultiIndex& gamma, std::span<const double> x) const = 0;
  double value(std::span<const double> x) const;
};

class PolynomialFunction : public SmoothFunction {
 public:
  explicit PolynomialFunction(Polynomial p) : p_(std::move(p)) {}
  int dim() const override { return p_.dim(); }
  int max_derivative() const override { return 1 << 20; }
  double derivative(const MultiIndex& gamma, std::span<const double> x) const override;
  const Polynomial& poly() const { return p_; }

 private:
  Polynomial p_;
};

// Degree-`order` Taylor polynomial of 1/F, by order-by-order elimination.
PowerSeries series_reciprocal(const PowerSeries& f, int order);

Polynomial build_symbol_P(const PowerSeries& t, const HomogeneousPolynomial& g);

struct DiffOperatorResult {
  double real = 0.0;
  double imag = 0.0;
  bool imag_exceeded = false;
};

inline constexpr double kImagTolerance = 1e-10;

// Evaluates P(iD) f (x) = sum_gamma c_gamma i^|gamma| D^gamma f(x).
DiffOperatorResult apply_diff_operator(const Polynomial& p, const SmoothFunction& f,
                                       std::span<const double> x);

// T_x^k f as a polynomial in the global variable y.
Polynomial taylor_polynomial(const SmoothFunction& f, std::span<const double> x, int k);

// All multi-indices of length dim with total degree <= max_degree, in
// lexicographic order.
std::vector<MultiIndex> multi_indices_up_to(int dim, int max_degree);

}  // namespace rbfq
