#pragma once

#include <memory>
#include <vector>

#include "json.hpp"
#include "rbfq/local_fn.hpp"
#include "rbfq/quasi_op.hpp"

namespace rbfq {

// Nearest dyadic step 2^{-k} (k >= 0) to x, rounding in log scale.
double round_to_dyadic(double x);

struct CompressionBudget {
  int n = 1;
  double p = 2.0;
  int r = 2;
  int d = 1;
  int ell = 1;
  double a_decay = 0.0;
  // beta = min(r - d/p, ell + 1); nonzero override replaces it.
  double beta_override = 0.0;

  double beta() const;
  // h ~ n^{-1/(p beta + d)}, rounded to the dyadic grid.
  double greedy_h() const;
  // h ~ n^{-(a p + d)/(d (d + (a + r) p))}, rounded to the dyadic grid.
  double threshold_h() const;
};

// Finite combination sum c_alpha psi_alpha(x / h).
class Approximant {
 public:
  Approximant(std::shared_ptr<const QuasiBasis> basis, double h,
              std::vector<std::pair<std::size_t, double>> terms);
  double operator()(const Point& x) const;
  double h() const { return h_; }
  const std::vector<std::pair<std::size_t, double>>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::shared_ptr<const QuasiBasis> basis_;
  double h_;
  double reach_;
  std::vector<std::pair<std::size_t, double>> terms_;  // sorted by center position
};

struct ErrorReport {
  double sup = 0.0;
  double lp = 0.0;
};

// Sup error on the grid and L^p error by composite Gauss-Legendre over
// [lo, hi] (1-d; cells of size h/4).
ErrorReport measure_error(const Approximant& g, const PointFunction& f, double lo, double hi, double p);

struct SelectionResult {
  double h = 1.0;
  std::vector<std::size_t> selected;  // Lambda, in selection order
  std::vector<double> coefficients;
  double min_kept = 0.0;
  double max_discarded = 0.0;
  std::size_t nonzero_samples = 0;
  std::size_t phi_terms = 0;  // |Lambda| times the stencil size
  std::shared_ptr<Approximant> approximant;
  nlohmann::json to_json() const;
};

// G_n f = sum_{alpha in Lambda} f(h alpha) psi_alpha(./h) with Lambda the n
// largest |f(h alpha)| over the window (ties by center order).  The probe
// interval [lo, hi] must keep a margin R around x/h inside the window.
SelectionResult greedy_nterm(std::shared_ptr<const QuasiBasis> basis, const PointFunction& f,
                             const CompressionBudget& budget, double probe_lo, double probe_hi,
                             double h_override = 0.0);

// Lambda = {|alpha| <= n^{1/d}} u {|f^h(alpha)| >= h^r}, coefficients f^h.
SelectionResult threshold_compress(std::shared_ptr<const QuasiBasis> basis,
                                   std::shared_ptr<const LocalFunctional> S, const PointFunction& f,
                                   const CompressionBudget& budget, double h_override = 0.0);

struct StagnationRow {
  int n = 0;
  double h = 0.0;
  std::size_t kept = 0;
  std::vector<double> sup_error;  // per evaluation radius
};

struct StagnationReport {
  double data_radius = 0.0;
  std::vector<double> radii;
  std::vector<StagnationRow> rows;
  // min over n of the error on the largest radius.
  double min_error = 0.0;
  nlohmann::json to_json() const;
};

// Greedy selection from samples with |h alpha| <= radii.front(); sup errors
// over |x| <= R for each R in radii (1-d).
StagnationReport stagnation_probe(std::shared_ptr<const QuasiBasis> basis, const PointFunction& f,
                                  const std::vector<int>& budgets, const std::vector<double>& radii,
                                  const CompressionBudget& params);

}  // namespace rbfq
