#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "rbfq/error.hpp"
#include "rbfq/harness.hpp"
#include "rbfq/local_fn.hpp"

using namespace rbfq;

namespace {

const FunctionalVariant kVariants[] = {FunctionalVariant::kernel, FunctionalVariant::spline,
                                       FunctionalVariant::difference};

std::shared_ptr<const LocalFunctional> functional(FunctionalVariant v, int ell, int dim = 1) {
  return std::make_shared<const LocalFunctional>(build_local_functional(v, ell, dim));
}

}  // namespace

TEST_CASE("kernel ell = 1 is the constant 1/2") {
  const auto S = functional(FunctionalVariant::kernel, 1);
  const Polynomial& Phi = S->kernel();
  CHECK(Phi.degree() == 0);
  CHECK(Phi.coeff({0}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(S->apply([](const Point& y) { return y[0] * y[0]; }) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("every variant reproduces Pi_ell at the origin") {
  for (int dim = 1; dim <= 2; ++dim)
    for (FunctionalVariant v : kVariants)
      for (int ell = 0; ell <= 3; ++ell) {
        const auto S = functional(v, ell, dim);
        for (const MultiIndex& g : multi_indices_up_to(dim, ell)) {
          const Polynomial q = Polynomial::monomial(g, 5.0);
          const double got = S->apply([&](const Point& y) { return q(std::span<const double>(y.data(), dim)); });
          const double want = total_degree(g) == 0 ? 5.0 : 0.0;
          CHECK_MESSAGE(std::abs(got - want) < 1e-12, to_string(v) << " ell=" << ell << " dim=" << dim);
        }
      }
}

TEST_CASE("5y is mapped to 0 by every variant") {
  for (FunctionalVariant v : kVariants) {
    const auto S = functional(v, 1);
    CHECK(std::abs(S->apply([](const Point& y) { return 5.0 * y[0]; })) < 1e-14);
  }
}

TEST_CASE("difference variant stays inside the unit ball") {
  const auto S = functional(FunctionalVariant::difference, 2);
  for (const auto& [p, w] : S->rule()) CHECK(std::abs(p[0]) <= 1.0);
  CHECK(S->eta(0.5) == 0.0);
  CHECK(S->eta(0.0) > 0.0);
}

TEST_CASE("sample_fh examples") {
  const RbfSymbol lin = catalog_lookup("linear", 1);
  const auto B = make_quasi_basis(lin, MuSource::preset, 16.0, 1);
  const CenterSet& A = B->centers();
  const auto i0 = static_cast<std::size_t>(A.index_of_lattice({0, 0}));
  const auto i2 = static_cast<std::size_t>(A.index_of_lattice({2, 0}));
  for (FunctionalVariant v : kVariants) {
    const ModifiedOperator op{B, functional(v, 1), 0.5};
    for (std::size_t a = 0; a < A.size(); a += 3)
      CHECK(sample_fh(op, [](const Point&) { return 1.0; }, a) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(sample_fh(op, [](const Point& x) { return x[0]; }, i2) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const ModifiedOperator k1{B, functional(FunctionalVariant::kernel, 1), 1.0};
  CHECK(sample_fh(k1, [](const Point& x) { return x[0] * x[0]; }, i0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("Q~_h reproduces Pi_ell") {
  for (const char* name : {"linear", "cubic"}) {
    const RbfSymbol s = catalog_lookup(name, 1);
    const auto B = make_quasi_basis(s, MuSource::automatic, 120.0, 1);
    for (FunctionalVariant v : kVariants) {
      const ModifiedOperator op{B, functional(v, s.ell), 0.25};
      for (int t = 0; t <= s.ell; ++t) {
        double worst = 0.0;
        for (double x = -1.0; x <= 1.0; x += 0.125)
          worst = std::max(worst, std::abs(apply_Qh_tilde(op, [t](const Point& p) { return std::pow(p[0], t); }, {x, 0.0}).value -
                                           std::pow(x, t)));
        CHECK_MESSAGE(worst < 1e-8, name << " " << to_string(v) << " t=" << t);
      }
    }
  }
}

TEST_CASE("functional consistency is second order") {
  const RbfSymbol lin = catalog_lookup("linear", 1);
  const auto B = make_quasi_basis(lin, MuSource::preset, 16.0, 1);
  const auto i3 = static_cast<std::size_t>(B->centers().index_of_lattice({3, 0}));
  const auto f = [](const Point& x) { return std::sin(x[0]); };
  for (FunctionalVariant v : {FunctionalVariant::kernel, FunctionalVariant::difference}) {
    const auto S = functional(v, 1);
    double prev = 0.0;
    for (double h : {0.1, 0.05, 0.025}) {
      const double e = std::abs(sample_fh({B, S, h}, f, i3) - std::sin(3.0 * h));
      CHECK(e <= 1.0 * h * h);
      if (prev > 0.0) CHECK(prev / e > 3.0);
      prev = e;
    }
  }
}

TEST_CASE("variants agree up to h^(ell+1)") {
  const RbfSymbol lin = catalog_lookup("linear", 1);
  const auto B = make_quasi_basis(lin, MuSource::preset, 120.0, 1);
  const auto f = [](const Point& x) { return std::cos(2.0 * x[0]); };
  for (double h : {0.125, 0.0625}) {
    std::vector<double> vals;
    for (FunctionalVariant v : kVariants) vals.push_back(apply_Qh_tilde({B, functional(v, 1), h}, f, {0.3, 0.0}).value);
    for (double a : vals) CHECK(std::abs(a - vals.front()) <= 4.0 * h * h);
  }
}

TEST_CASE("invalid inputs") {
  CHECK_THROWS_AS(build_local_functional(FunctionalVariant::kernel, -1, 1), Error);
  CHECK_THROWS_AS(build_local_functional(FunctionalVariant::kernel, 1, 3), Error);
  CHECK_THROWS_AS(parse_functional_variant("hahn-banach"), Error);
  const auto S = functional(FunctionalVariant::kernel, 1);
  CHECK_THROWS_AS(S->eta(0.0), Error);
}
