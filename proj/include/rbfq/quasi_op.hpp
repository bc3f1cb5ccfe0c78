#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "json.hpp"
#include "rbfq/centers.hpp"
#include "rbfq/mu.hpp"
#include "rbfq/symbols.hpp"

namespace rbfq {

using PointFunction = std::function<double(const Point&)>;

struct DecayCalibration {
  // |psi_0(x)| <= C (1 + |x|)^{-(d + m2)} on the sampled range.
  double C = 0.0;
  double exponent = 0.0;  // d + m2
  // Fitted log-log slope of |psi_0| on the fit range (infinity when compact).
  double fitted_exponent = std::numeric_limits<double>::infinity();
  bool compact = false;
  double compact_radius = 0.0;
  // Far-field envelope: (r, sup_{s >= r} |psi_0(s)| (1 + s)^{d + m2}) on the
  // sampled range; queries beyond 3/4 of the range use the last quarter.
  std::vector<std::pair<double, double>> envelope;
  double envelope_at(double r) const;
};

// psi_alpha = sum_beta mu_{alpha beta} phi(. - beta) plus truncation data for
// the infinite sums of Q_h.
class QuasiBasis {
 public:
  QuasiBasis(RbfSymbol sym, MuCoeffs mu, double tail_tol = 0.0);

  const RbfSymbol& symbol() const { return sym_; }
  const MuCoeffs& mu() const { return mu_; }
  const CenterSet& centers() const { return *mu_.centers; }
  int dim() const { return sym_.dim; }
  const DecayCalibration& decay() const { return decay_; }
  double tail_tol() const { return tail_tol_; }
  // Summation radius (in units of the center spacing).
  double tail_radius() const { return R_; }
  // Bound on the neglected tail per unit sup |f|.
  double tail_bound(double radius) const;

  // psi_alpha(y) by direct finite summation.
  double psi(std::size_t alpha, const Point& y) const;
  // Lattice only: psi_0 evaluated at offset z (translation invariance).
  double psi_offset(const Point& z) const;
  bool interior(std::size_t alpha) const { return mu_.trusted(alpha); }

  // Centers within radius r of y with psi_alpha(y), sorted by index.
  std::vector<std::pair<std::size_t, double>> psi_values(const Point& y, double r) const;

  nlohmann::json to_json() const;

 private:
  double psi_lattice(const Point& z) const;
  void calibrate();

  RbfSymbol sym_;
  MuCoeffs mu_;
  std::vector<std::pair<std::array<int, 2>, double>> stencil_;
  int growth_power_ = 0;
  bool growth_cancels_ = false;
  double hull_ = 0.0;
  DecayCalibration decay_;
  double tail_tol_ = 0.0;
  double R_ = 0.0;
};

struct PsiEval {
  double value = 0.0;
  bool boundary = false;
};

PsiEval eval_psi(const QuasiBasis& basis, std::size_t alpha, const Point& x);

enum class CoefficientSource { point_values, functional };

struct SampledOperator {
  std::shared_ptr<const QuasiBasis> basis;
  double h = 1.0;
  CoefficientSource source = CoefficientSource::point_values;
};

struct QhResult {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

// Terms (alpha, psi_alpha(x/h)) entering Q_h at x; throws when the window
// does not leave a margin of R around x/h.
std::vector<std::pair<std::size_t, double>> qh_terms(const SampledOperator& op, const Point& x);

// Q_h f(x) = sum f(h alpha) psi_alpha(x/h).
QhResult apply_Qh(const SampledOperator& op, const PointFunction& f, const Point& x);

// sup_x h^{-a} sum_alpha |psi_alpha(x/h)| (|x - h alpha| + h)^a.
double lebesgue_sum_diagnostic(const SampledOperator& op, double a, const std::vector<Point>& grid);

// ||sum a_alpha psi_alpha||_p / ||a||_p (p = infinity allowed), 1-d.
double stability_ratio(const QuasiBasis& basis, const std::vector<std::pair<std::size_t, double>>& coeffs,
                       double p);

// Default tail tolerance: tighter for compactly supported psi.
double default_tail_tol(bool compact);

}  // namespace rbfq
