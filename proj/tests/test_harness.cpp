#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rbfq/error.hpp"
#include "rbfq/harness.hpp"

using namespace rbfq;

namespace {

std::vector<std::pair<double, double>> sample_rate(const std::function<double(double)>& e, int from, int to) {
  std::vector<std::pair<double, double>> pts;
  for (int k = from; k <= to; ++k) {
    const double h = std::ldexp(1.0, -k);
    pts.emplace_back(h, e(h));
  }
  return pts;
}

ExperimentConfig small_converge() {
  ExperimentConfig c = default_config(ExperimentKind::converge);
  c.h_sweep = {0.25, 0.125, 0.0625, 0.03125};
  c.grid = {-0.5, 0.5, 101};
  return c;
}

ExperimentConfig small_nterm() {
  ExperimentConfig c = default_config(ExperimentKind::nterm);
  c.N_sweep = {16, 32, 64};
  c.grid = {-1.5, 1.5, 2};
  c.params["j_min"] = -4;
  c.params["j_max"] = 5;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("fit_rate on exact power laws") {
  const RateReport a = fit_rate(sample_rate([](double h) { return 3.0 * h * h; }, 2, 7));
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(a.r_squared == doctest::Approx(1.0));
  std::vector<std::pair<double, double>> n;
  for (double k : {16.0, 32.0, 64.0, 128.0}) n.emplace_back(k, std::pow(k, -0.4));
  CHECK(fit_rate(n).slope == doctest::Approx(-0.4).epsilon(1e-12));
}

TEST_CASE("fit_rate with a logarithmic factor") {
  const RateReport r = fit_rate(sample_rate([](double h) { return h * h * std::abs(std::log(h)); }, 2, 7));
  // log e = -2u + log u with u = k log 2: slope 2 - cov(u, log u) / var(u).
  double mu = 0.0, ml = 0.0;
  for (int k = 2; k <= 7; ++k) {
    mu += k * std::log(2.0) / 6.0;
    ml += std::log(k * std::log(2.0)) / 6.0;
  }
  double cov = 0.0, var = 0.0;
  for (int k = 2; k <= 7; ++k) {
    const double u = k * std::log(2.0);
    cov += (u - mu) * (std::log(u) - ml);
    var += (u - mu) * (u - mu);
  }
  CHECK(r.slope == doctest::Approx(2.0 - cov / var).epsilon(1e-12));
  CHECK(r.slope < 2.0);
}

TEST_CASE("fit_rate excludes points below the floor") {
  auto pts = sample_rate([](double h) { return h; }, 1, 5);
  pts.emplace_back(1.0 / 64, 1e-20);
  const RateReport r = fit_rate(pts, 1e-15);
  CHECK(r.points.size() == 5);
  CHECK(r.excluded.size() == 1);
  CHECK(r.slope == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_rate({{0.5, 1.0}, {0.25, 0.5}}), Error);
  CHECK_THROWS_AS(fit_rate(pts, 1.0), Error);
}

TEST_CASE("maximal function") {
  const double lo = -4.0, step = 1.0 / 64;
  const int n = 8 * 64 + 1;
  std::vector<double> c(n, -2.5), chi(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * step;
    if (x >= 0.0 && x <= 1.0) chi[i] = 1.0;
  }
  for (double x : {-3.0, 0.0, 2.5}) CHECK(maximal_function(c, lo, step, x) == doctest::Approx(2.5).epsilon(1e-12));
  // Brute force over the same dyadic radii for the exact indicator.
  double oracle = 0.0;
  for (double d = step; d <= 64.0; d *= 2.0) {
    const double len = std::max(0.0, std::min(2.0 + d, 1.0) - std::max(2.0 - d, 0.0));
    oracle = std::max(oracle, len / (2.0 * d));
  }
  CHECK(oracle == 0.25);
  CHECK(maximal_function(chi, lo, step, 2.0) == doctest::Approx(oracle).epsilon(0.02));
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = std::sin(3.0 * (lo + i * step));
  // Interior: the smallest ball already averages to within |f''| step^2 of |f|.
  for (int i = 1; i + 1 < n; i += 17) CHECK(maximal_function(s, lo, step, lo + i * step) >= std::abs(s[i]) - 9.0 * step * step);
  // Off the grid f is zero, so the edge value is about halved.
  CHECK(maximal_function(c, lo, step, 4.0) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK_THROWS_AS(maximal_function(c, lo, step, 4.5), Error);
}

TEST_CASE("error kernels") {
  ErrorKernel psi;
  psi.h = 0.5;
  psi.m2 = 2.0;
  psi.r = 1.0;
  CHECK(psi(1.0) == doctest::Approx(2.0 / 9.0));
  CHECK(psi(-1.0) == psi(1.0));
  ErrorKernel phi;
  phi.kind = ErrorKernel::Kind::Phi_h;
  phi.h = 0.5;
  CHECK(phi(1.0) == doctest::Approx(1.0 / 3.0));
  // int Psi_h = 2 int_0^inf (1 + u)^{-2} du = 2.
  CHECK(kernel_convolution([](double) { return 1.0; }, psi, 0.3) == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("converge reproduces Pi_ell exactly") {
  ExperimentConfig c = small_converge();
  c.target = "poly";
  c.target_params = {{"degree", 1.0}};
  c.expect.clear();
  const ResultSet rs = run_experiment(c);
  for (const char* col : {"sup_error", "l2_error"})
    for (double e : rs.column(col)) CHECK(e < 1e-8);
}

TEST_CASE("report columns and determinism") {
  const ExperimentConfig c = small_converge();
  const ResultSet a = run_experiment(c);
  const std::string csv = format_csv(a);
  CHECK(csv.rfind("scale,sup_error,l2_error", 0) == 0);
  CHECK(a.rows.size() == 4);
  CHECK(a.rates.count("sup_error") == 1);
  CHECK(format_csv(run_experiment(c)) == csv);
  const ExperimentConfig replay = ExperimentConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  CHECK(replay.to_json() == c.to_json());
  CHECK(format_csv(run_experiment(replay)) == csv);

  const ResultSet nt = run_experiment(small_nterm());
  CHECK(format_csv(nt).rfind("N,sum_Nv,error_p,psi_terms\n", 0) == 0);
  for (const auto& row : nt.rows) CHECK(row[1] <= row[0]);
}

TEST_CASE("emit_report writes a replayable manifest") {
  const ExperimentConfig c = small_converge();
  const ResultSet rs = run_experiment(c);
  const auto dir = std::filesystem::temp_directory_path() / "rbfq_test_harness_report";
  std::filesystem::remove_all(dir);
  emit_report(rs, dir.string());
  for (const char* f : {"rates.csv", "manifest.json", "plot.gp"}) CHECK(std::filesystem::exists(dir / f));
  CHECK(slurp(dir / "rates.csv") == format_csv(rs));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["library_version"] == kLibraryVersion);
  CHECK(manifest["passed"].get<bool>() == rs.passed());
  const ExperimentConfig replay = ExperimentConfig::from_json(manifest["config"]);
  CHECK(format_csv(run_experiment(replay)) == format_csv(rs));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(emit_report(ResultSet{}, dir.string()), Error);
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_converge();
  CHECK_NOTHROW(c.validate());
  c.h_sweep = {0.3};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_converge();
  c.h_sweep.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_converge();
  c.norms = {"l7"};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_converge();
  c.expect = {{"sup_error", "median", 1.0, std::nullopt}};
  CHECK_THROWS_AS(c.validate(), Error);
  c = default_config(ExperimentKind::greedy);
  c.n_sweep = {64, 16};
  CHECK_THROWS_AS(c.validate(), Error);
  c = small_converge();
  c.symbol = "linear";
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_THROWS_AS(parse_experiment_kind("nope"), Error);
  CHECK_THROWS_AS(parse_mu_source("nope"), Error);
  for (auto k : {ExperimentKind::converge, ExperimentKind::converge_modified, ExperimentKind::greedy,
                 ExperimentKind::threshold, ExperimentKind::stagnation, ExperimentKind::nterm,
                 ExperimentKind::diagnostics}) {
    CHECK(parse_experiment_kind(to_string(k)) == k);
    CHECK_NOTHROW(default_config(k).validate());
  }
}
