#pragma once

#include <functional>
#include <vector>

namespace rbfq {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]; exact for degree 2n-1.
const QuadratureRule& gauss_legendre(int n);

// Rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

// Composite Gauss-Legendre over `panels` equal panels of [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int nodes,
                 int panels = 1);

}  // namespace rbfq
