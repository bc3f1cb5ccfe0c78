#pragma once

#include <limits>
#include <map>
#include <memory>
#include <string>

#include "rbfq/centers.hpp"
#include "rbfq/poly.hpp"
#include "rbfq/quasi_op.hpp"

namespace rbfq {

// Test functions with known smoothness and closed-form derivatives.
class Target : public SmoothFunction {
 public:
  virtual std::string name() const = 0;
  virtual double operator()(const Point& x) const = 0;
  // Radius of a ball containing the support (infinity if not compact).
  virtual double support_radius() const { return std::numeric_limits<double>::infinity(); }
  // Euclidean norm of the tensor of r-th partial derivatives at x.
  double derivative_norm(int r, const Point& x) const;
  PointFunction handle() const;
};

// Catalog: "sin", "exp", "const1", "bump" (radius), "abs_pow" (gamma),
// "poly" (degree: the monomial x^degree in the first coordinate).
std::shared_ptr<Target> make_target(const std::string& name, int dim,
                                    const std::map<std::string, double>& params = {});

}  // namespace rbfq
