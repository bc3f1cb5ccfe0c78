#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rbfq/error.hpp"
#include "rbfq/symbols.hpp"

using namespace rbfq;

TEST_CASE("linear1d") {
  const RbfSymbol s = catalog_lookup("linear", 1);
  CHECK(s.m1 == 1);
  CHECK(s.G.degree() == 2);
  CHECK(s.G.poly().coeff({2}) == 1.0);
  CHECK(s.F_taylor.constant_term() == -2.0);
  CHECK(s.P.coeff({2}) == doctest::Approx(-0.5).epsilon(1e-15));
  const DerivedParameters d = derived_parameters(s);
  CHECK(d.m2 == 4.0);
  CHECK(d.ell0 == 1);
  CHECK(d.ell == 1);
}

TEST_CASE("cubic1d") {
  const RbfSymbol s = catalog_lookup("cubic", 1);
  CHECK(s.P.coeff({4}) == doctest::Approx(1.0 / 12.0));
  const DerivedParameters d = derived_parameters(s);
  CHECK(d.m2 == 5.0);
  CHECK(d.ell0 == 3);
  CHECK(d.ell == 3);
}

TEST_CASE("multiquadric1d") {
  const RbfSymbol s = catalog_lookup("multiquadric", 1, {{"c", 1.0}});
  CHECK(s.b == -1.0);
  CHECK(s.n0() == 2);
  CHECK(s.m2 == 2.0);
  CHECK(s.ell0 == 1);
  CHECK(s.ell == 1);
  CHECK(s.P.degree() == s.m0 + 2 * s.m1);
  CHECK_NOTHROW(derived_parameters(s));
}

TEST_CASE("multiquadric xi^2 coefficient against the Bessel function") {
  // -2 z K_1(z) = -2 + (coefficient) xi^2 - c^2 xi^2 log|xi| + O(xi^4 log xi), z = c xi.
  for (double c : {0.5, 1.0, 2.0}) {
    const double xi = 1e-3;
    const double z = c * xi;
    const double F = -2.0 * z * std::cyl_bessel_k(1.0, z);
    const double oracle = (F + 2.0 + c * c * xi * xi * std::log(xi)) / (xi * xi);
    CHECK(multiquadric_xi2_coefficient(c) == doctest::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("thinplate2d") {
  const RbfSymbol s = catalog_lookup("thinplate", 2);
  const double c = 1.0 / (8.0 * std::numbers::pi);
  CHECK(s.G.degree() == 4);
  CHECK(s.P.coeff({4, 0}) == doctest::Approx(c));
  CHECK(s.P.coeff({2, 2}) == doctest::Approx(2.0 * c));
  CHECK(s.P.coeff({0, 4}) == doctest::Approx(c));
  CHECK(s.P.terms().size() == 3);
  const DerivedParameters d = derived_parameters(s);
  CHECK(d.m2 == 5.0);
  CHECK(d.ell == 3);
}

TEST_CASE("unknown symbols and bad parameters") {
  CHECK_THROWS_AS(catalog_lookup("gaussian", 1), Error);
  CHECK_THROWS_AS(catalog_lookup("thinplate", 1), Error);
  CHECK_THROWS_AS(catalog_lookup("multiquadric", 1, {{"c", 0.0}}), Error);
}

TEST_CASE("derived parameters detect tampering") {
  RbfSymbol s = catalog_lookup("linear", 1);
  s.m2 = 3.0;
  CHECK_THROWS_AS(derived_parameters(s), Error);
}

TEST_CASE("for b = 0 symbols m2 = m0 + theta and ell grows with m0") {
  for (const auto& [name, dim] : {std::pair{"linear", 1}, {"cubic", 1}, {"thinplate", 2}}) {
    const RbfSymbol s = catalog_lookup(name, dim);
    CHECK(s.m2 == s.m0 + s.theta);
    int prev = -1;
    for (int m0 = 1; m0 <= 8; ++m0) {
      const int ell = std::min(m0 - 1, 2 * s.m1 - 1);
      CHECK(ell >= prev);
      prev = ell;
    }
  }
}

TEST_CASE("profiles are even and continuous at 0") {
  for (const auto& [name, dim] : {std::pair{"linear", 1}, {"cubic", 1}, {"multiquadric", 1}, {"thinplate", 2}}) {
    const RbfSymbol s = catalog_lookup(name, dim);
    for (double r : {0.1, 0.7, 3.0}) CHECK(s.phi(r) == s.phi(-r));
    CHECK(std::abs(s.phi(1e-8) - s.phi(0.0)) < 1e-7);
  }
  const RbfSymbol mq = catalog_lookup("multiquadric", 1, {{"c", 1.5}});
  for (double r : {0.0, 2.0, 1e6}) CHECK(mq.phi.decay_part(r) == doctest::Approx(mq.phi(r) - r).epsilon(1e-6));
}
