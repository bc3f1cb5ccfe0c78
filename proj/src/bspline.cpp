#include "rbfq/bspline.hpp"

#include <cmath>

#include "rbfq/error.hpp"

namespace rbfq {

double centered_bspline(int order, double x) {
  require(order >= 1, "centered_bspline: order must be >= 1");
  const double half = 0.5 * order;
  if (x <= -half || x >= half) return 0.0;
  // Values of B_1 shifted, then raise the order by recursion on a local
  // array: b[i] holds B_m(x + (order - m)/2 - i).
  std::vector<double> b(order, 0.0);
  for (int i = 0; i < order; ++i) {
    const double y = x + 0.5 * (order - 1) - i;
    b[i] = (y >= -0.5 && y < 0.5) ? 1.0 : 0.0;
  }
  for (int m = 2; m <= order; ++m) {
    for (int i = 0; i + m - 1 < order; ++i) {
      const double y = x + 0.5 * (order - m) - i;
      // B_m(y) = [(y + m/2) B_{m-1}(y + 1/2) + (m/2 - y) B_{m-1}(y - 1/2)] / (m-1)
      b[i] = ((y + 0.5 * m) * b[i] + (0.5 * m - y) * b[i + 1]) / (m - 1);
    }
  }
  return b[0];
}

double centered_bspline_derivative(int order, int t, double x) {
  require(t >= 0 && t < order, "centered_bspline_derivative: derivative order out of range");
  if (t == 0) return centered_bspline(order, x);
  // D^t B_n(x) = sum_i (-1)^i C(t,i) B_{n-t}(x + t/2 - i)
  double sum = 0.0;
  double binom = 1.0;
  for (int i = 0; i <= t; ++i) {
    sum += ((i % 2) ? -binom : binom) * centered_bspline(order - t, x + 0.5 * t - i);
    binom = binom * (t - i) / (i + 1);
  }
  return sum;
}

std::vector<double> centered_bspline_moments(int order, int max_t) {
  // Moments of the unit box on [-1/2, 1/2], then binomial convolution.
  std::vector<double> box(max_t + 1, 0.0);
  for (int t = 0; t <= max_t; t += 2) box[t] = std::pow(0.5, t) / (t + 1);
  std::vector<double> m = box;
  for (int n = 2; n <= order; ++n) {
    std::vector<double> next(max_t + 1, 0.0);
    for (int t = 0; t <= max_t; ++t) {
      double binom = 1.0;
      for (int u = 0; u <= t; ++u) {
        next[t] += binom * m[u] * box[t - u];
        binom = binom * (t - u) / (u + 1);
      }
    }
    m = std::move(next);
  }
  return m;
}

SmoothStep::SmoothStep(int k) : k_(k), poly_(1) {
  require(k >= 0, "SmoothStep: k must be >= 0");
  // t^k (1-t)^k expanded, integrated termwise, normalized to 1 at t = 1.
  Polynomial kernel = Polynomial::constant(1, 1.0);
  const Polynomial t = Polynomial::monomial({1});
  const Polynomial one_minus_t = Polynomial::constant(1, 1.0) - t;
  for (int i = 0; i < k; ++i) kernel = kernel * t * one_minus_t;
  Polynomial integral(1);
  for (const auto& [g, c] : kernel.terms()) integral.add_term({g[0] + 1}, c / (g[0] + 1));
  poly_ = integral * (1.0 / integral(1.0));
  // Bernstein form of degree n = 2k+1: coefficients 0 (j <= k), 1 (j > k).
  const int n = 2 * k + 1;
  std::vector<double> b(n + 1, 0.0);
  for (int j = k + 1; j <= n; ++j) b[j] = 1.0;
  bernstein_.push_back(b);
  for (int r = 1; r <= n; ++r) {
    std::vector<double> d(b.size() - 1);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (n - r + 1) * (b[i + 1] - b[i]);
    b = d;
    bernstein_.push_back(b);
  }
}

double SmoothStep::derivative(int order, double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return order == 0 ? 1.0 : 0.0;
  if (order > 2 * k_ + 1) return 0.0;
  // de Casteljau on the Bernstein coefficients of the derivative.
  std::vector<double> b = bernstein_[order];
  for (std::size_t r = 1; r < b.size(); ++r)
    for (std::size_t i = 0; i + r < b.size(); ++i) b[i] = (1.0 - t) * b[i] + t * b[i + 1];
  return b[0];
}

}  // namespace rbfq
