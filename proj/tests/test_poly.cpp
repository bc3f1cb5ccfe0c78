#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "rbfq/error.hpp"
#include "rbfq/poly.hpp"
#include "rbfq/targets.hpp"

using namespace rbfq;

namespace {

Polynomial poly1(std::initializer_list<double> coeffs) {
  Polynomial p(1);
  int t = 0;
  for (double c : coeffs) p.add_term({t++}, c);
  return p;
}

// Largest coefficient of p of total degree <= m.
double max_low_coeff(const Polynomial& p, int m) { return p.max_abs_coeff(m); }

}  // namespace

TEST_CASE("series_reciprocal of a constant") {
  const PowerSeries r = series_reciprocal(PowerSeries(Polynomial::constant(1, -2.0), 0), 3);
  CHECK(r.order() == 3);
  CHECK(r.poly().coeff({0}) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(r.poly().degree() == 0);
}

TEST_CASE("series_reciprocal of 1 + x is the geometric series") {
  const PowerSeries r = series_reciprocal(PowerSeries(poly1({1.0, 1.0}), 1), 2);
  CHECK(r.poly().coeff({0}) == doctest::Approx(1.0));
  CHECK(r.poly().coeff({1}) == doctest::Approx(-1.0));
  CHECK(r.poly().coeff({2}) == doctest::Approx(1.0));
  CHECK(r.poly().degree() == 2);
}

TEST_CASE("series_reciprocal of 2 + x^2") {
  const PowerSeries r = series_reciprocal(PowerSeries(poly1({2.0, 0.0, 1.0}), 2), 2);
  CHECK(r.poly().coeff({0}) == doctest::Approx(0.5));
  CHECK(r.poly().coeff({1}) == 0.0);
  CHECK(r.poly().coeff({2}) == doctest::Approx(-0.25));
}

TEST_CASE("series_reciprocal rejects F(0) = 0") {
  CHECK_THROWS_AS(series_reciprocal(PowerSeries(poly1({0.0, 1.0}), 1), 2), Error);
}

TEST_CASE("reciprocal property on random series") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int dim = 1; dim <= 2; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      const int m = 2 + trial % 4;
      Polynomial F(dim);
      for (const auto& g : multi_indices_up_to(dim, m)) F.add_term(g, u(rng));
      F.add_term(MultiIndex(dim, 0), 2.0);  // keep F(0) away from 0
      const PowerSeries R = series_reciprocal(PowerSeries(F, m), m);
      const Polynomial prod = F * R.poly() - Polynomial::constant(dim, 1.0);
      CHECK(max_low_coeff(prod, m) < 1e-12);
    }
  }
}

TEST_CASE("build_symbol_P examples") {
  SUBCASE("linear") {
    const Polynomial P = build_symbol_P(PowerSeries(Polynomial::constant(1, -0.5), 0),
                                        HomogeneousPolynomial(Polynomial::monomial({2}), 2));
    CHECK(P.coeff({2}) == doctest::Approx(-0.5));
    CHECK(P.terms().size() == 1);
  }
  SUBCASE("cubic") {
    const Polynomial P = build_symbol_P(PowerSeries(Polynomial::constant(1, 1.0 / 12.0), 0),
                                        HomogeneousPolynomial(Polynomial::monomial({4}), 4));
    CHECK(P.coeff({4}) == doctest::Approx(1.0 / 12.0));
    CHECK(P.terms().size() == 1);
  }
  SUBCASE("thin plate") {
    Polynomial G(2);
    G.add_term({4, 0}, 1.0);
    G.add_term({2, 2}, 2.0);
    G.add_term({0, 4}, 1.0);
    const double c = 1.0 / (8.0 * M_PI);
    const Polynomial P = build_symbol_P(PowerSeries(Polynomial::constant(2, c), 0), HomogeneousPolynomial(G, 4));
    CHECK(P.coeff({4, 0}) == doctest::Approx(c));
    CHECK(P.coeff({2, 2}) == doctest::Approx(2.0 * c));
    CHECK(P.coeff({0, 4}) == doctest::Approx(c));
    CHECK(P.terms().size() == 3);
  }
}

TEST_CASE("apply_diff_operator examples") {
  SUBCASE("-xi^2/2 on x^2") {
    const PolynomialFunction f(Polynomial::monomial({2}));
    for (double x : {-3.0, 0.0, 0.7}) {
      const double pt[1] = {x};
      const auto r = apply_diff_operator(Polynomial::monomial({2}, -0.5), f, pt);
      CHECK(r.real == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(r.imag == 0.0);
      CHECK_FALSE(r.imag_exceeded);
    }
  }
  SUBCASE("xi^4 on x^4") {
    const PolynomialFunction f(Polynomial::monomial({4}));
    const double pt[1] = {1.3};
    CHECK(apply_diff_operator(Polynomial::monomial({4}), f, pt).real == doctest::Approx(24.0));
  }
  SUBCASE("negative Laplacian in 2-d") {
    Polynomial P(2);
    P.add_term({2, 0}, 1.0);
    P.add_term({0, 2}, 1.0);
    const PolynomialFunction f(Polynomial::monomial({2, 0}));
    const double pt[2] = {0.4, -1.1};
    CHECK(apply_diff_operator(P, f, pt).real == doctest::Approx(-2.0));
  }
  SUBCASE("odd symbol leaves an imaginary part") {
    const PolynomialFunction f(Polynomial::monomial({1}));
    const double pt[1] = {0.0};
    const auto r = apply_diff_operator(Polynomial::monomial({1}), f, pt);
    CHECK(r.imag == doctest::Approx(1.0));
    CHECK(r.imag_exceeded);
  }
}

TEST_CASE("apply_diff_operator is linear") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial P(1), f(1), g(1);
    for (int t = 0; t <= 4; t += 2) P.add_term({t}, u(rng));
    for (int t = 0; t <= 6; ++t) {
      f.add_term({t}, u(rng));
      g.add_term({t}, u(rng));
    }
    const double a = u(rng), b = u(rng);
    const double x[1] = {u(rng)};
    const double lhs = apply_diff_operator(P, PolynomialFunction(a * f + b * g), x).real;
    const double rhs =
        a * apply_diff_operator(P, PolynomialFunction(f), x).real + b * apply_diff_operator(P, PolynomialFunction(g), x).real;
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("apply_diff_operator matches term-by-term differentiation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Polynomial P(2), q(2);
    for (const auto& g : multi_indices_up_to(2, 4))
      if (total_degree(g) % 2 == 0 && total_degree(g) > 0) P.add_term(g, u(rng));
    for (const auto& g : multi_indices_up_to(2, 3)) q.add_term(g, u(rng));
    const double x[2] = {u(rng), u(rng)};
    // Oracle: sum c_gamma i^|gamma| D^gamma q(x), real part for even |gamma|.
    double oracle = 0.0;
    for (const auto& [g, c] : P.terms()) {
      const int n = total_degree(g);
      const double sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
      oracle += c * sign * q.derivative(g)(std::span<const double>(x, 2));
    }
    CHECK(apply_diff_operator(P, PolynomialFunction(q), x).real == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("taylor_polynomial examples") {
  SUBCASE("sin at 0, degree 3") {
    const auto f = make_target("sin", 1);
    const double x[1] = {0.0};
    const Polynomial T = taylor_polynomial(*f, x, 3);
    CHECK(T.coeff({1}) == doctest::Approx(1.0));
    CHECK(T.coeff({3}) == doctest::Approx(-1.0 / 6.0));
    CHECK(std::abs(T.coeff({0})) < 1e-15);
    CHECK(std::abs(T.coeff({2})) < 1e-15);
  }
  SUBCASE("exp at 0, degree 2") {
    const auto f = make_target("exp", 1);
    const double x[1] = {0.0};
    const Polynomial T = taylor_polynomial(*f, x, 2);
    CHECK(T.coeff({0}) == doctest::Approx(1.0));
    CHECK(T.coeff({1}) == doctest::Approx(1.0));
    CHECK(T.coeff({2}) == doctest::Approx(0.5));
  }
  SUBCASE("polynomials are their own Taylor polynomials") {
    Polynomial q(2);
    q.add_term({0, 0}, 1.5);
    q.add_term({1, 2}, -2.0);
    q.add_term({3, 0}, 0.25);
    const double x[2] = {0.3, -0.8};
    const Polynomial T = taylor_polynomial(PolynomialFunction(q), x, 3);
    CHECK((T - q).max_abs_coeff(3) < 1e-12);
  }
}

TEST_CASE("polynomial json round trip") {
  Polynomial q(2);
  q.add_term({0, 1}, 0.125);
  q.add_term({2, 0}, -3.0);
  const Polynomial r = Polynomial::from_json(q.to_json());
  CHECK(r.terms() == q.terms());
  CHECK(r.dim() == 2);
}
