#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <memory>

#include "rbfq/compress.hpp"
#include "rbfq/error.hpp"
#include "rbfq/harness.hpp"

using namespace rbfq;

namespace {

std::shared_ptr<QuasiBasis> hat_basis(double r) {
  return make_quasi_basis(catalog_lookup("linear", 1), MuSource::preset, r, 1);
}

CompressionBudget greedy_budget(int n) {
  CompressionBudget b;
  b.n = n;
  b.p = 2.0;
  b.r = 3;
  b.d = 1;
  b.ell = 1;
  return b;
}

}  // namespace

TEST_CASE("step size formulas") {
  CompressionBudget b = greedy_budget(32);
  CHECK(b.beta() == 2.0);
  CHECK(b.greedy_h() == 0.5);
  CompressionBudget t;
  t.n = 1024;
  t.a_decay = 1.0;
  t.r = 2;
  t.p = 1.0;
  t.d = 1;
  CHECK(t.threshold_h() == 0.03125);
  CHECK(round_to_dyadic(0.3) == 0.25);
  CHECK(round_to_dyadic(0.36) == 0.5);
  CHECK(round_to_dyadic(3.0) == 1.0);
  CHECK_THROWS_AS(round_to_dyadic(0.0), Error);
}

TEST_CASE("greedy with few nonzero samples equals Q_h") {
  const auto B = hat_basis(64.0);
  const auto bump = make_target("bump", 1, {{"radius", 1.0}});
  // At h = 1/4 the bump on (-1, 1) has seven nonzero samples, fewer than n = 8.
  const SelectionResult s = greedy_nterm(B, bump->handle(), greedy_budget(8), -2.0, 2.0, 0.25);
  CHECK(s.nonzero_samples == 7);
  CHECK(s.selected.size() == 7);
  const SampledOperator op{B, 0.25, CoefficientSource::point_values};
  for (double x = -1.5; x <= 1.5; x += 0.0625)
    CHECK((*s.approximant)({x, 0.0}) == doctest::Approx(apply_Qh(op, bump->handle(), {x, 0.0}).value).epsilon(1e-14));
}

TEST_CASE("greedy keeps the largest magnitudes") {
  const auto B = hat_basis(256.0);
  const auto f = make_target("bump", 1, {{"radius", 2.0}});
  for (int n : {4, 16, 64}) {
    const SelectionResult s = greedy_nterm(B, f->handle(), greedy_budget(n), -3.0, 3.0, 1.0 / 32);
    CHECK(s.selected.size() == static_cast<std::size_t>(n));
    CHECK(s.min_kept >= s.max_discarded);
    // No swap raises the minimum kept magnitude.
    for (double c : s.coefficients) CHECK(std::abs(c) >= s.max_discarded);
  }
}

TEST_CASE("greedy ties are broken by center order") {
  const auto B = hat_basis(64.0);
  // Equal magnitudes at every center in [-2, 2] (h = 1).
  const auto f = [](const Point& x) { return std::abs(x[0]) <= 2.0 ? 1.0 : 0.0; };
  const SelectionResult s = greedy_nterm(B, f, greedy_budget(3), -1.0, 1.0, 1.0);
  REQUIRE(s.selected.size() == 3);
  const CenterSet& A = B->centers();
  CHECK(A.points[s.selected[0]][0] == -2.0);
  CHECK(A.points[s.selected[1]][0] == -1.0);
  CHECK(A.points[s.selected[2]][0] == 0.0);
}

TEST_CASE("greedy error is monotone in n with h pinned") {
  const auto B = hat_basis(256.0);
  const auto f = make_target("bump", 1, {{"radius", 2.0}});
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {4, 8, 16, 32, 64, 128}) {
    const SelectionResult s = greedy_nterm(B, f->handle(), greedy_budget(n), -3.0, 3.0, 1.0 / 32);
    const double e = measure_error(*s.approximant, f->handle(), -3.0, 3.0, std::numeric_limits<double>::infinity()).sup;
    CHECK(e <= prev + B->tail_tol());
    prev = e;
  }
}

TEST_CASE("threshold compression") {
  const auto B = hat_basis(4200.0);
  const auto S = std::make_shared<const LocalFunctional>(build_local_functional(FunctionalVariant::kernel, 1, 1));
  CompressionBudget b;
  b.n = 64;
  b.a_decay = 1.0;
  b.r = 2;
  b.p = 1.0;
  b.d = 1;
  SUBCASE("f = 0 keeps only the ball") {
    const SelectionResult s = threshold_compress(B, S, [](const Point&) { return 0.0; }, b);
    CHECK(s.selected.size() == 129);
    for (double c : s.coefficients) CHECK(c == 0.0);
    CHECK(measure_error(*s.approximant, [](const Point&) { return 0.0; }, -1.0, 1.0, 2.0).lp == 0.0);
  }
  SUBCASE("large coefficients lie within the inflated support") {
    const auto f = make_target("bump", 1, {{"radius", 1.0}});
    b.n = 16;
    const SelectionResult s = threshold_compress(B, S, f->handle(), b);
    const double level = std::pow(s.h, b.r);
    const CenterSet& A = B->centers();
    for (std::size_t i = 0; i < s.selected.size(); ++i) {
      const double a = A.points[s.selected[i]][0];
      if (std::abs(a) <= 16.0) continue;
      CHECK(std::abs(s.coefficients[i]) >= level);
      CHECK(std::abs(a * s.h) <= 1.0 + s.h);
    }
  }
  SUBCASE("cardinality ratio is stable") {
    const auto f = make_target("bump", 1, {{"radius", 1.0}});
    double lo = 1e300, hi = 0.0;
    for (int n : {64, 256, 1024, 4096}) {
      b.n = n;
      const double c = static_cast<double>(threshold_compress(B, S, f->handle(), b).selected.size()) / n;
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    CHECK((hi - lo) / lo < 0.2);
  }
}

TEST_CASE("stagnation of constants and decay of the control") {
  const auto B = hat_basis(600.0);
  const CompressionBudget params = greedy_budget(1);
  const auto one = [](const Point&) { return 1.0; };
  const StagnationReport st = stagnation_probe(B, one, {16, 64, 256, 1024}, {32.0, 64.0, 128.0}, params);
  CHECK(st.min_error >= 0.5);
  for (std::size_t i = 1; i < st.rows.size(); ++i)
    CHECK(std::abs(st.rows[i].sup_error.back() - st.rows[i - 1].sup_error.back()) < 0.01);
  const auto bump = make_target("bump", 1, {{"radius", 2.0}});
  const StagnationReport ctl = stagnation_probe(B, bump->handle(), {16, 256, 4096}, {32.0, 64.0}, params);
  CHECK(ctl.rows.back().sup_error.back() < 0.5 * ctl.rows.front().sup_error.back());
  CHECK_THROWS_AS(stagnation_probe(B, one, {64, 16}, {32.0}, params), Error);
}

TEST_CASE("window checks") {
  const auto B = hat_basis(16.0);
  const auto f = make_target("bump", 1);
  CHECK_THROWS_AS(greedy_nterm(B, f->handle(), greedy_budget(8), -1.0, 1.0, 1.0 / 64), Error);
}
