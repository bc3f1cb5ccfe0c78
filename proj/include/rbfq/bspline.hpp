#pragma once

#include "rbfq/poly.hpp"

namespace rbfq {

// Centered cardinal B-spline of order n (degree n-1), supported on
// [-n/2, n/2].  Evaluated by the Cox-de Boor recursion.
double centered_bspline(int order, double x);

// t-th derivative of the centered B-spline of order n (t <= n-1).
double centered_bspline_derivative(int order, int t, double x);

// Moments int x^t B_n(x) dx of the centered B-spline, t = 0..max_t.
std::vector<double> centered_bspline_moments(int order, int max_t);

// C^k transition S: S = 0 on t <= 0, S = 1 on t >= 1, and on [0, 1] the
// normalized integral of t^k (1-t)^k.  Polynomial of degree 2k+1, evaluated
// in Bernstein form for stability.
class SmoothStep {
 public:
  explicit SmoothStep(int k);
  int k() const { return k_; }
  double derivative(int order, double t) const;
  double operator()(double t) const { return derivative(0, t); }
  const Polynomial& poly() const { return poly_; }

 private:
  int k_;
  Polynomial poly_;
  std::vector<std::vector<double>> bernstein_;  // per derivative order
};

}  // namespace rbfq
