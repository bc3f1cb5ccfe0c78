#pragma once

#include <memory>
#include <unordered_map>
#include <vector>

#include "rbfq/bspline.hpp"
#include "rbfq/poly.hpp"
#include "rbfq/quasi_op.hpp"
#include "rbfq/repro_basis.hpp"

namespace rbfq {

enum class FunctionalVariant { kernel, spline, difference };

FunctionalVariant parse_functional_variant(const std::string& name);
std::string to_string(FunctionalVariant v);

struct FunctionalOptions {
  // Gauss-Legendre nodes per axis (0 selects 2 (ell + 2)).
  int nodes = 0;
  // Equal sub-panels per axis for rough integrands.
  int panels = 1;
};

// Bounded functional S_0 on L^1(B_1(0)) with S_0 P = P(0) on polynomials of
// degree <= ell.
class LocalFunctional {
 public:
  FunctionalVariant variant() const { return variant_; }
  int dim() const { return dim_; }
  int ell() const { return ell_; }
  // |S_0 f| <= C_S int_{B_1(0)} |f|.
  double bound_constant() const { return C_S_; }
  // Kernel variant: Phi_ell on B_1(0).
  const Polynomial& kernel() const { return Phi_; }
  // Difference variant: mollifier eta(u), supported in B_{1/(ell+1)}(0).
  double eta(double r) const;
  // Spline variant: N_{c'}(x) = c1^d N(c1 x).
  double scaled_spline(const Point& x) const;

  // S_0 g for g defined near the origin.
  double apply(const PointFunction& g) const;
  // Weighted quadrature rule (nodes, weights) realizing S_0; the difference
  // variant folds its difference coefficients into the weights.
  const std::vector<std::pair<Point, double>>& rule() const { return rule_; }

 private:
  friend LocalFunctional build_local_functional(FunctionalVariant, int, int, const FunctionalOptions&);

  FunctionalVariant variant_ = FunctionalVariant::kernel;
  int dim_ = 1;
  int ell_ = 0;
  double C_S_ = 0.0;
  Polynomial Phi_{1};
  std::shared_ptr<const SmoothStep> step_;
  double eta_norm_ = 1.0;
  double eta_radius_ = 1.0;
  std::shared_ptr<const ReproBasis> spline_;
  double c1_ = 1.0;
  std::vector<std::pair<Point, double>> rule_;
};

LocalFunctional build_local_functional(FunctionalVariant variant, int ell, int dim,
                                       const FunctionalOptions& options = {});

struct ModifiedOperator {
  std::shared_ptr<const QuasiBasis> basis;
  std::shared_ptr<const LocalFunctional> S;
  double h = 1.0;
};

// f^h(alpha) = S_alpha(sigma_h f) = S_0(y -> f(h (y + alpha))).
double sample_fh(const ModifiedOperator& op, const PointFunction& f, std::size_t alpha);

using CoefficientCache = std::unordered_map<std::size_t, double>;

// Q~_h f(x) = sum f^h(alpha) psi_alpha(x/h); coefficients are memoized in
// `cache` when given (the cache is tied to one (op, f) pair).
QhResult apply_Qh_tilde(const ModifiedOperator& op, const PointFunction& f, const Point& x,
                        CoefficientCache* cache = nullptr);

}  // namespace rbfq
