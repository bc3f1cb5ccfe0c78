#include "rbfq/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rbfq/compress.hpp"
#include "rbfq/error.hpp"
#include "rbfq/mu.hpp"
#include "rbfq/nterm.hpp"
#include "rbfq/quadrature.hpp"
#include "rbfq/repro_basis.hpp"
#include "rbfq/wavelet.hpp"

namespace rbfq {

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "converge") return ExperimentKind::converge;
  if (name == "converge_modified") return ExperimentKind::converge_modified;
  if (name == "greedy") return ExperimentKind::greedy;
  if (name == "threshold") return ExperimentKind::threshold;
  if (name == "stagnation") return ExperimentKind::stagnation;
  if (name == "nterm") return ExperimentKind::nterm;
  if (name == "diagnostics" || name == "diagnose") return ExperimentKind::diagnostics;
  throw Error("unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::converge: return "converge";
    case ExperimentKind::converge_modified: return "converge_modified";
    case ExperimentKind::greedy: return "greedy";
    case ExperimentKind::threshold: return "threshold";
    case ExperimentKind::stagnation: return "stagnation";
    case ExperimentKind::nterm: return "nterm";
    case ExperimentKind::diagnostics: return "diagnostics";
  }
  return "?";
}

MuSource parse_mu_source(const std::string& name) {
  if (name == "auto") return MuSource::automatic;
  if (name == "quadrature") return MuSource::quadrature;
  if (name == "preset") return MuSource::preset;
  throw Error("unknown mu source '" + name + "'");
}

std::string to_string(MuSource source) {
  switch (source) {
    case MuSource::automatic: return "auto";
    case MuSource::quadrature: return "quadrature";
    case MuSource::preset: return "preset";
  }
  return "?";
}

std::pair<std::string, int> parse_symbol_name(const std::string& name) {
  if (name.size() > 2 && name.back() == 'd' && std::isdigit(static_cast<unsigned char>(name[name.size() - 2])))
    return {name.substr(0, name.size() - 2), name[name.size() - 2] - '0'};
  throw Error("symbol name '" + name + "' must end in the dimension, e.g. linear1d");
}

std::vector<double> GridSpec::nodes() const {
  std::vector<double> out(points);
  for (int i = 0; i < points; ++i) out[i] = lo + (hi - lo) * i / (points - 1);
  return out;
}

namespace {

bool is_power_of_two(double h) {
  int e = 0;
  return std::frexp(h, &e) == 0.5;
}

template <class T>
bool geometric(const std::vector<T>& v) {
  if (v.size() < 2) return true;
  const double r = static_cast<double>(v[1]) / static_cast<double>(v[0]);
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(static_cast<double>(v[i]) / static_cast<double>(v[i - 1]) - r) > 1e-9 * r) return false;
  return r > 1.0;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

void ExperimentConfig::validate() const {
  parse_symbol_name(symbol);
  require(grid.points >= 2 && grid.hi > grid.lo, "config: grid needs hi > lo and at least 2 points");
  for (const auto& n : norms)
    require(n == "sup" || n == "l1" || n == "l2", "config: unknown norm '" + n + "'");
  require(!norms.empty(), "config: norms must not be empty");
  for (double h : h_sweep)
    require(h > 0.0 && h <= 1.0 && is_power_of_two(h), "config: h sweep entries must be powers of two in (0, 1]");
  require(geometric(n_sweep), "config: n sweep must be geometric and increasing");
  require(geometric(N_sweep), "config: N sweep must be geometric and increasing");
  for (long n : n_sweep) require(n >= 1, "config: n sweep entries must be >= 1");
  for (long n : N_sweep) require(n >= 1, "config: N sweep entries must be >= 1");
  switch (experiment) {
    case ExperimentKind::converge:
    case ExperimentKind::converge_modified:
    case ExperimentKind::diagnostics:
      require(!h_sweep.empty(), "config: " + to_string(experiment) + " needs an h sweep");
      break;
    case ExperimentKind::greedy:
    case ExperimentKind::threshold:
    case ExperimentKind::stagnation:
      require(!n_sweep.empty(), "config: " + to_string(experiment) + " needs an n sweep");
      break;
    case ExperimentKind::nterm:
      require(!N_sweep.empty(), "config: nterm needs an N sweep");
      break;
  }
  for (const auto& e : expect) {
    require(e.stat == "min" || e.stat == "max" || e.stat == "slope" || e.stat == "drift",
            "config: expect stat must be min, max, slope or drift");
    require(e.le || e.ge, "config: expect entry needs le or ge");
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : expect) {
    nlohmann::json o{{"column", e.column}, {"stat", e.stat}};
    if (e.le) o["le"] = *e.le;
    if (e.ge) o["ge"] = *e.ge;
    ex.push_back(o);
  }
  return {{"experiment", to_string(experiment)},
          {"symbol", symbol},
          {"symbol_params", symbol_params},
          {"mu_source", to_string(mu_source)},
          {"functional", to_string(functional)},
          {"target", target},
          {"target_params", target_params},
          {"h_sweep", h_sweep},
          {"n_sweep", n_sweep},
          {"N_sweep", N_sweep},
          {"norms", norms},
          {"grid", {{"lo", grid.lo}, {"hi", grid.hi}, {"points", grid.points}}},
          {"seed", seed},
          {"output", output},
          {"params", params},
          {"expect", ex}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  require(j.is_object(), "config: expected a JSON object");
  require(j.contains("experiment"), "config: missing 'experiment'");
  ExperimentConfig c = default_config(parse_experiment_kind(j.at("experiment").get<std::string>()));
  try {
    if (j.contains("symbol")) c.symbol = j["symbol"].get<std::string>();
    if (j.contains("symbol_params")) c.symbol_params = j["symbol_params"].get<std::map<std::string, double>>();
    if (j.contains("mu_source")) c.mu_source = parse_mu_source(j["mu_source"].get<std::string>());
    if (j.contains("functional")) c.functional = parse_functional_variant(j["functional"].get<std::string>());
    if (j.contains("target")) c.target = j["target"].get<std::string>();
    if (j.contains("target_params")) c.target_params = j["target_params"].get<std::map<std::string, double>>();
    if (j.contains("h_sweep")) c.h_sweep = j["h_sweep"].get<std::vector<double>>();
    if (j.contains("n_sweep")) c.n_sweep = j["n_sweep"].get<std::vector<long>>();
    if (j.contains("N_sweep")) c.N_sweep = j["N_sweep"].get<std::vector<long>>();
    if (j.contains("norms")) c.norms = j["norms"].get<std::vector<std::string>>();
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      c.grid.lo = g.value("lo", c.grid.lo);
      c.grid.hi = g.value("hi", c.grid.hi);
      c.grid.points = g.value("points", c.grid.points);
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("params"))
      for (const auto& [k, v] : j["params"].items()) c.params[k] = v;
    if (j.contains("expect")) {
      c.expect.clear();
      for (const auto& e : j["expect"]) {
        ExpectSpec s;
        s.column = e.at("column").get<std::string>();
        s.stat = e.at("stat").get<std::string>();
        if (e.contains("le")) s.le = e["le"].get<double>();
        if (e.contains("ge")) s.ge = e["ge"].get<double>();
        c.expect.push_back(s);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

std::vector<double> dyadic_sweep(int from, int to) {
  std::vector<double> out;
  for (int e = from; e <= to; ++e) out.push_back(std::ldexp(1.0, -e));
  return out;
}

std::vector<long> doubling(long from, long to, long factor = 2) {
  std::vector<long> out;
  for (long n = from; n <= to; n *= factor) out.push_back(n);
  return out;
}

}  // namespace

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.output = "out/" + to_string(kind);
  switch (kind) {
    case ExperimentKind::converge:
      c.target = "sin";
      c.h_sweep = dyadic_sweep(2, 7);
      c.expect = {{"sup_error", "slope", std::nullopt, 1.75}};
      break;
    case ExperimentKind::converge_modified:
      c.target = "abs_pow";
      c.target_params = {{"gamma", 1.5}};
      c.h_sweep = dyadic_sweep(3, 7);
      c.norms = {"sup"};
      c.expect = {{"sup_error", "slope", 1.3, 0.8}};
      break;
    case ExperimentKind::greedy:
      c.target = "bump";
      c.target_params = {{"radius", 2.0}};
      c.n_sweep = doubling(16, 1024);
      c.grid = {-3.0, 3.0, 2001};
      c.params = {{"p", 2.0}, {"r", 3}};
      c.expect = {{"sup_error", "slope", -0.25, std::nullopt}};
      break;
    case ExperimentKind::threshold:
      c.target = "bump";
      c.target_params = {{"radius", 1.0}};
      c.n_sweep = doubling(64, 4096);
      c.grid = {-2.0, 2.0, 2001};
      c.params = {{"p", 1.0}, {"r", 2}, {"a_decay", 1.0}};
      c.expect = {{"c", "drift", 0.2, std::nullopt}};
      break;
    case ExperimentKind::stagnation:
      c.target = "const1";
      c.n_sweep = doubling(16, 4096, 4);
      c.norms = {"sup"};
      c.params = {{"p", 2.0}, {"r", 3}, {"radii", {32.0, 64.0, 128.0, 256.0}}};
      c.expect = {{"sup_error_r256", "min", std::nullopt, 0.5}};
      break;
    case ExperimentKind::nterm:
      c.target = "bump";
      c.target_params = {{"radius", 1.0}};
      c.N_sweep = doubling(16, 512);
      c.grid = {-1.0, 1.0, 2};
      c.norms = {"l2"};
      c.params = {{"wavelet", "db3"}, {"j_min", -26}, {"j_max", 10}, {"s", 1.0}, {"p", 2.0}};
      c.expect = {{"error_p", "slope", -0.65, std::nullopt}};
      break;
    case ExperimentKind::diagnostics:
      c.symbol = "multiquadric1d";
      c.symbol_params = {{"c", 1.0}};
      c.target = "const1";
      c.h_sweep = dyadic_sweep(2, 6);
      c.grid = {-0.5, 0.5, 65};
      c.norms = {"sup"};
      c.params = {{"a", {0.0, 1.0}}};
      c.expect = {{"lebesgue_a0", "drift", 0.1, std::nullopt}, {"lebesgue_a1", "drift", 0.1, std::nullopt}};
      break;
  }
  return c;
}

nlohmann::json RateReport::to_json() const {
  return {{"slope", slope}, {"intercept", intercept}, {"r_squared", r_squared}, {"points", points},
          {"excluded", excluded}};
}

RateReport fit_rate(const std::vector<std::pair<double, double>>& points, double floor) {
  RateReport rep;
  for (const auto& pt : points) {
    require(pt.first > 0.0, "fit_rate: scales must be positive");
    if (!(pt.second > floor) || !(pt.second > 0.0) || !std::isfinite(pt.second))
      rep.excluded.push_back(pt);
    else
      rep.points.push_back(pt);
  }
  if (rep.points.size() < 3)
    throw Error("fit_rate: " + std::to_string(rep.points.size()) + " usable points, need at least 3");
  const double n = static_cast<double>(rep.points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [s, e] : rep.points) {
    mx += std::log(s);
    my += std::log(e);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [s, e] : rep.points) {
    const double dx = std::log(s) - mx, dy = std::log(e) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, "fit_rate: scales must not all coincide");
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  double ssr = 0.0;
  for (const auto& [s, e] : rep.points) {
    const double r = std::log(e) - (rep.intercept + rep.slope * std::log(s));
    ssr += r * r;
  }
  rep.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return rep;
}

bool ResultSet::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::vector<double> ResultSet::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  require(it != columns.end(), "ResultSet: no column '" + name + "'");
  const std::size_t c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

RbfSymbol make_symbol(const std::string& name, const std::map<std::string, double>& params) {
  const auto [base, dim] = parse_symbol_name(name);
  return catalog_lookup(base, dim, params);
}

std::shared_ptr<QuasiBasis> make_quasi_basis(const RbfSymbol& sym, MuSource source, double window_radius,
                                             std::uint64_t seed, double tail_tol) {
  auto A = std::make_shared<const CenterSet>(
      generate_centers(sym.dim, CenterKind::lattice, symmetric_window(sym.dim, std::ceil(window_radius)), 0.0, seed));
  MuCoeffs mu;
  switch (source) {
    case MuSource::automatic: mu = certified_mu(sym, A); break;
    case MuSource::preset: mu = preset_mu_difference(sym, A); break;
    case MuSource::quadrature: {
      const ReproBasis basis = build_repro_basis(A, sym.basis_k());
      mu = compute_mu_quadrature(basis, sym.P);
      break;
    }
  }
  return std::make_shared<QuasiBasis>(sym, std::move(mu), tail_tol);
}

namespace {

double tail_tol_param(const ExperimentConfig& c) { return c.params.value("tail_tol", 0.0); }

// Lattice window radius that leaves `reach` units of margin around |x| / h.
std::shared_ptr<QuasiBasis> basis_for(const ExperimentConfig& c, const RbfSymbol& sym, double extent) {
  const double tol = tail_tol_param(c);
  // Probe once for the summation radius, then size the real window.
  auto probe = make_quasi_basis(sym, c.mu_source, 32.0, c.seed, tol);
  const double reach = probe->tail_radius() + probe->mu().bandwidth + 8.0;
  return make_quasi_basis(sym, c.mu_source, extent + reach, c.seed, tol);
}

struct NormSet {
  double sup = 0.0, l1 = 0.0, l2 = 0.0;
  double get(const std::string& n) const { return n == "sup" ? sup : n == "l1" ? l1 : l2; }
};

// Trapezoid norms of uniformly spaced samples (tensor in 2-d).
NormSet grid_norms(const std::vector<double>& err, int points, double step, int dim) {
  NormSet out;
  long double a1 = 0.0L, a2 = 0.0L;
  auto w1 = [&](int i) { return (i == 0 || i == points - 1) ? 0.5 * step : step; };
  for (std::size_t idx = 0; idx < err.size(); ++idx) {
    const int i = static_cast<int>(idx % points), j = static_cast<int>(idx / points);
    const double w = dim == 1 ? w1(i) : w1(i) * w1(j);
    const double e = std::abs(err[idx]);
    out.sup = std::max(out.sup, e);
    a1 += w * e;
    a2 += w * static_cast<long double>(e) * e;
  }
  out.l1 = static_cast<double>(a1);
  out.l2 = static_cast<double>(std::sqrt(a2));
  return out;
}

std::vector<Point> grid_points(const GridSpec& g, int dim) {
  const auto xs = g.nodes();
  std::vector<Point> out;
  if (dim == 1) {
    for (double x : xs) out.push_back({x, 0.0});
  } else {
    for (double y : xs)
      for (double x : xs) out.push_back({x, y});
  }
  return out;
}

double max_abs(const GridSpec& g) { return std::max(std::abs(g.lo), std::abs(g.hi)); }

void run_converge(const ExperimentConfig& c, ResultSet& rs, bool modified) {
  const RbfSymbol sym = make_symbol(c.symbol, c.symbol_params);
  const auto f = make_target(c.target, sym.dim, c.target_params);
  const double hmin = *std::min_element(c.h_sweep.begin(), c.h_sweep.end());
  const auto B = basis_for(c, sym, max_abs(c.grid) / hmin);
  const auto pts = grid_points(c.grid, sym.dim);
  const double step = (c.grid.hi - c.grid.lo) / (c.grid.points - 1);
  std::shared_ptr<const LocalFunctional> S;
  if (modified) {
    FunctionalOptions fo;
    fo.panels = c.params.value("panels", 1);
    S = std::make_shared<const LocalFunctional>(build_local_functional(c.functional, sym.ell, sym.dim, fo));
  }
  rs.columns = {"scale"};
  for (const auto& n : c.norms) rs.columns.push_back(n + "_error");
  rs.columns.push_back("tail_bound");
  for (double h : c.h_sweep) {
    std::vector<double> err(pts.size());
    double tail = 0.0;
    if (modified) {
      const ModifiedOperator op{B, S, h};
      CoefficientCache cache;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const QhResult r = apply_Qh_tilde(op, f->handle(), pts[i], &cache);
        err[i] = (*f)(pts[i]) - r.value;
        tail = std::max(tail, r.tail_bound);
      }
    } else {
      const SampledOperator op{B, h, CoefficientSource::point_values};
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const QhResult r = apply_Qh(op, f->handle(), pts[i]);
        err[i] = (*f)(pts[i]) - r.value;
        tail = std::max(tail, r.tail_bound);
      }
    }
    const NormSet ns = grid_norms(err, c.grid.points, step, sym.dim);
    std::vector<double> row{h};
    for (const auto& n : c.norms) row.push_back(ns.get(n));
    row.push_back(tail);
    rs.rows.push_back(row);
  }
  rs.diagnostics["tail_radius"] = B->tail_radius();
  rs.diagnostics["tail_tol"] = B->tail_tol();
  rs.diagnostics["mu_source"] = B->mu().source;
}

void run_greedy(const ExperimentConfig& c, ResultSet& rs) {
  const RbfSymbol sym = make_symbol(c.symbol, c.symbol_params);
  require(sym.dim == 1, "greedy: 1-d symbol required");
  const auto f = make_target(c.target, 1, c.target_params);
  CompressionBudget b;
  b.p = c.params.value("p", 2.0);
  b.r = c.params.value("r", 3);
  b.d = 1;
  b.ell = sym.ell;
  b.beta_override = c.params.value("beta", 0.0);
  double hmin = 1.0;
  for (long n : c.n_sweep) {
    b.n = static_cast<int>(n);
    hmin = std::min(hmin, b.greedy_h());
  }
  const auto B = basis_for(c, sym, max_abs(c.grid) / hmin);
  rs.columns = {"scale", "h", "kept"};
  for (const auto& n : c.norms) rs.columns.push_back(n + "_error");
  nlohmann::json sel = nlohmann::json::array();
  for (long n : c.n_sweep) {
    b.n = static_cast<int>(n);
    const SelectionResult s = greedy_nterm(B, f->handle(), b, c.grid.lo, c.grid.hi);
    std::vector<double> row{static_cast<double>(n), s.h, static_cast<double>(s.selected.size())};
    for (const auto& nm : c.norms) {
      const double p = nm == "sup" ? std::numeric_limits<double>::infinity() : nm == "l1" ? 1.0 : 2.0;
      const ErrorReport e = measure_error(*s.approximant, f->handle(), c.grid.lo, c.grid.hi, p);
      row.push_back(nm == "sup" ? e.sup : e.lp);
    }
    rs.rows.push_back(row);
    sel.push_back(s.to_json());
  }
  rs.diagnostics["selections"] = sel;
  rs.diagnostics["beta"] = b.beta();
}

void run_threshold(const ExperimentConfig& c, ResultSet& rs) {
  const RbfSymbol sym = make_symbol(c.symbol, c.symbol_params);
  require(sym.dim == 1, "threshold: 1-d symbol required");
  const auto f = make_target(c.target, 1, c.target_params);
  CompressionBudget b;
  b.p = c.params.value("p", 1.0);
  b.r = c.params.value("r", 2);
  b.a_decay = c.params.value("a_decay", 1.0);
  b.d = 1;
  b.ell = sym.ell;
  double hmin = 1.0;
  for (long n : c.n_sweep) {
    b.n = static_cast<int>(n);
    hmin = std::min(hmin, b.threshold_h());
  }
  const double nmax = static_cast<double>(c.n_sweep.back());
  const auto B = basis_for(c, sym, std::max(nmax, max_abs(c.grid) / hmin));
  FunctionalOptions fo;
  fo.panels = c.params.value("panels", 1);
  const auto S = std::make_shared<const LocalFunctional>(build_local_functional(c.functional, sym.ell, 1, fo));
  rs.columns = {"scale", "h", "kept", "c"};
  for (const auto& n : c.norms) rs.columns.push_back(n + "_error");
  for (long n : c.n_sweep) {
    b.n = static_cast<int>(n);
    const SelectionResult s = threshold_compress(B, S, f->handle(), b);
    const double kept = static_cast<double>(s.selected.size());
    std::vector<double> row{static_cast<double>(n), s.h, kept, kept / static_cast<double>(n)};
    for (const auto& nm : c.norms) {
      const double p = nm == "sup" ? std::numeric_limits<double>::infinity() : nm == "l1" ? 1.0 : 2.0;
      const ErrorReport e = measure_error(*s.approximant, f->handle(), c.grid.lo, c.grid.hi, p);
      row.push_back(nm == "sup" ? e.sup : e.lp);
    }
    rs.rows.push_back(row);
  }
}

void run_stagnation(const ExperimentConfig& c, ResultSet& rs) {
  const RbfSymbol sym = make_symbol(c.symbol, c.symbol_params);
  require(sym.dim == 1, "stagnation: 1-d symbol required");
  const auto f = make_target(c.target, 1, c.target_params);
  CompressionBudget b;
  b.p = c.params.value("p", 2.0);
  b.r = c.params.value("r", 3);
  b.d = 1;
  b.ell = sym.ell;
  const auto radii = c.params.value("radii", std::vector<double>{32.0, 64.0, 128.0, 256.0});
  require(!radii.empty(), "stagnation: empty radius list");
  double hmin = 1.0;
  std::vector<int> budgets;
  for (long n : c.n_sweep) {
    b.n = static_cast<int>(n);
    hmin = std::min(hmin, b.greedy_h());
    budgets.push_back(static_cast<int>(n));
  }
  const auto B = basis_for(c, sym, radii.front() / hmin);
  const StagnationReport rep = stagnation_probe(B, f->handle(), budgets, radii, b);
  rs.columns = {"scale", "h", "kept"};
  for (double R : radii) rs.columns.push_back("sup_error_r" + format_double(R));
  for (const auto& row : rep.rows) {
    std::vector<double> r{static_cast<double>(row.n), row.h, static_cast<double>(row.kept)};
    r.insert(r.end(), row.sup_error.begin(), row.sup_error.end());
    rs.rows.push_back(r);
  }
  rs.diagnostics["stagnation"] = rep.to_json();
}

void run_nterm(const ExperimentConfig& c, ResultSet& rs) {
  const RbfSymbol sym = make_symbol(c.symbol, c.symbol_params);
  require(sym.dim == 1, "nterm: 1-d symbol required");
  const auto f = make_target(c.target, 1, c.target_params);
  const WaveletSystem W(parse_wavelet_family(c.params.value("wavelet", std::string("db3"))));
  const int j_min = c.params.value("j_min", -26), j_max = c.params.value("j_max", 10);
  const double s = c.params.value("s", 1.0), p = c.params.value("p", 2.0);
  const CoeffField cf = wavelet_analyze(W, f->handle(), j_min, j_max, c.grid.lo, c.grid.hi);
  const auto B = make_quasi_basis(sym, c.mu_source, 64.0, c.seed, tail_tol_param(c));
  const NtermMachinery M{B, c.functional, sym.ell};
  SynthesisOptions so;
  so.p = p;
  rs.columns = {"N", "sum_Nv", "error_p", "psi_terms"};
  nlohmann::json plans = nlohmann::json::array();
  bool certified = false;
  for (long N : c.N_sweep) {
    const AllocationPlan plan = allocate_budget(cf, N, s, p);
    const SynthesisResult r = synthesize_nterm(plan, cf, W, M, f->handle(), so);
    certified = r.report.certified;
    rs.rows.push_back({static_cast<double>(N), static_cast<double>(r.report.sum_Nv), r.report.error_p,
                       static_cast<double>(r.report.psi_terms)});
    rs.checks.push_back({"budget N=" + std::to_string(N), static_cast<double>(plan.total), plan.total <= N});
    if (c.params.value("dump_plans", false))
      plans.push_back(plan.to_json(cf));
    else
      plans.push_back({{"N", N}, {"a", plan.a}, {"norm", plan.norm}, {"sum_Nv", plan.total},
                       {"blocks", r.blocks.size()}});
  }
  rs.diagnostics["plans"] = plans;
  rs.diagnostics["certified"] = certified;
  rs.diagnostics["coefficients"] = cf.size();
  rs.diagnostics["tau"] = nterm_tau(s, p);
  rs.diagnostics["q"] = nterm_q(s);
}

void run_diagnostics(const ExperimentConfig& c, ResultSet& rs) {
  const RbfSymbol sym = make_symbol(c.symbol, c.symbol_params);
  const double hmin = *std::min_element(c.h_sweep.begin(), c.h_sweep.end());
  const auto B = basis_for(c, sym, max_abs(c.grid) / hmin);
  const auto as = c.params.value("a", std::vector<double>{0.0, 1.0});
  const auto pts = grid_points(c.grid, sym.dim);
  rs.columns = {"scale"};
  for (double a : as) rs.columns.push_back("lebesgue_a" + format_double(a));
  for (double h : c.h_sweep) {
    const SampledOperator op{B, h, CoefficientSource::point_values};
    std::vector<double> row{h};
    for (double a : as) row.push_back(lebesgue_sum_diagnostic(op, a, pts));
    rs.rows.push_back(row);
  }
  rs.diagnostics["mu_invariants"] = mu_invariant_report(B->mu(), sym, B->mu().certified_degree).to_json();
  rs.diagnostics["basis"] = B->to_json();
}

double column_stat(const ResultSet& rs, const ExpectSpec& e) {
  if (e.stat == "slope") {
    const auto it = rs.rates.find(e.column);
    return it == rs.rates.end() ? std::numeric_limits<double>::quiet_NaN() : it->second.slope;
  }
  const auto v = rs.column(e.column);
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  if (e.stat == "min") return *mn;
  if (e.stat == "max") return *mx;
  return *mn > 0.0 ? (*mx - *mn) / *mn : std::numeric_limits<double>::infinity();
}

}  // namespace

ResultSet run_experiment(const ExperimentConfig& config) {
  config.validate();
  ResultSet rs;
  rs.config = config;
  switch (config.experiment) {
    case ExperimentKind::converge: run_converge(config, rs, false); break;
    case ExperimentKind::converge_modified: run_converge(config, rs, true); break;
    case ExperimentKind::greedy: run_greedy(config, rs); break;
    case ExperimentKind::threshold: run_threshold(config, rs); break;
    case ExperimentKind::stagnation: run_stagnation(config, rs); break;
    case ExperimentKind::nterm: run_nterm(config, rs); break;
    case ExperimentKind::diagnostics: run_diagnostics(config, rs); break;
  }
  // Rates for every error column against the first column.
  const double floor = 10.0 * (rs.diagnostics.contains("tail_tol") ? rs.diagnostics["tail_tol"].get<double>() : 0.0);
  for (std::size_t col = 1; col < rs.columns.size(); ++col) {
    const std::string& name = rs.columns[col];
    if (name.find("error") == std::string::npos) continue;
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rs.rows) pts.emplace_back(r[0], r[col]);
    try {
      rs.rates[name] = fit_rate(pts, floor);
    } catch (const Error& e) {
      rs.diagnostics["rate_skipped"][name] = e.what();
    }
  }
  for (const auto& e : config.expect) {
    const double v = column_stat(rs, e);
    bool ok = std::isfinite(v);
    if (e.le) ok = ok && v <= *e.le;
    if (e.ge) ok = ok && v >= *e.ge;
    rs.checks.push_back({e.column + " " + e.stat, v, ok});
  }
  return rs;
}

std::string format_csv(const ResultSet& results) {
  std::ostringstream os;
  for (std::size_t i = 0; i < results.columns.size(); ++i) os << (i ? "," : "") << results.columns[i];
  os << "\n";
  for (const auto& r : results.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_double(r[i]);
    os << "\n";
  }
  return os.str();
}

void emit_report(const ResultSet& results, const std::string& dir) {
  require(!results.rows.empty(), "emit_report: empty result set");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("emit_report: cannot create '" + dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("emit_report: cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("emit_report: write failed for '" + path + "'");
  };
  write("rates.csv", format_csv(results));

  nlohmann::json manifest;
  manifest["library_version"] = kLibraryVersion;
  manifest["config"] = results.config.to_json();
  nlohmann::json rates = nlohmann::json::object();
  for (const auto& [k, v] : results.rates) rates[k] = v.to_json();
  manifest["rates"] = rates;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : results.checks) checks.push_back({{"name", c.name}, {"value", c.value}, {"pass", c.pass}});
  manifest["checks"] = checks;
  manifest["passed"] = results.passed();
  manifest["diagnostics"] = results.diagnostics;
  write("manifest.json", manifest.dump(2) + "\n");

  std::ostringstream gp;
  gp << "# gnuplot script: gnuplot plot.gp\n"
     << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set key autotitle columnhead\n"
     << "set xlabel '" << results.columns.front() << "'\n"
     << "set terminal pngcairo size 800,600\n"
     << "set output 'rates.png'\n"
     << "plot ";
  bool first = true;
  for (std::size_t col = 1; col < results.columns.size(); ++col) {
    if (results.columns[col].find("error") == std::string::npos) continue;
    gp << (first ? "" : ", ") << "'rates.csv' using 1:" << col + 1 << " with linespoints";
    first = false;
  }
  if (first) gp << "'rates.csv' using 1:2 with linespoints";
  gp << "\n";
  write("plot.gp", gp.str());
}

double ErrorKernel::operator()(double z) const {
  const double a = std::abs(z);
  const double lead = d == 1 ? 1.0 : std::pow(a, 1.0 - d);
  if (kind == Kind::Psi) {
    const double u = a / h;
    const double ulead = d == 1 ? 1.0 : std::pow(u, 1.0 - d);
    return std::pow(h, -d) * ulead * std::pow(1.0 + u, -1.0 - m2 + r);
  }
  return lead / ((a + h) * (1.0 + a));
}

double kernel_convolution(const std::function<double(double)>& g, const ErrorKernel& K, double x,
                          const std::vector<double>& kinks) {
  // Graded panels in z on each side of 0, split at z = x - kink.
  const double base = K.kind == ErrorKernel::Kind::Psi ? K.h / 16.0 : std::min(K.h, 1.0) / 16.0;
  std::vector<double> bp{0.0};
  for (double z = base; z < 1e12 * std::max(K.h, 1.0); z *= 2.0) {
    bp.push_back(z);
    bp.push_back(-z);
  }
  for (double k : kinks) bp.push_back(x - k);
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  const QuadratureRule& gl = gauss_legendre(16);
  long double acc = 0.0L;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const double a = bp[i], b = bp[i + 1];
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double z = a + 0.5 * (b - a) * (gl.nodes[q] + 1.0);
      acc += 0.5L * (b - a) * gl.weights[q] * g(x - z) * K(z);
    }
  }
  return static_cast<double>(acc);
}

double maximal_function(const std::vector<double>& samples, double lo, double step, double x) {
  require(!samples.empty() && step > 0.0, "maximal_function: empty grid");
  const double hi = lo + step * static_cast<double>(samples.size() - 1);
  if (x < lo - 1e-12 * step || x > hi + 1e-12 * step) throw Error("maximal_function: x outside the grid hull");
  // Integral of the piecewise linear interpolant of |f| over [a, b].
  const std::size_t n = samples.size();
  auto value = [&](double t) {
    const double u = std::clamp((t - lo) / step, 0.0, static_cast<double>(n - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(u), n >= 2 ? n - 2 : 0);
    if (n == 1) return std::abs(samples[0]);
    const double w = u - static_cast<double>(i);
    return (1.0 - w) * std::abs(samples[i]) + w * std::abs(samples[i + 1]);
  };
  auto integral = [&](double a, double b) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b <= a) return 0.0;
    long double acc = 0.0L;
    std::vector<double> pts{a};
    const long i0 = static_cast<long>(std::floor((a - lo) / step)) + 1;
    const long i1 = static_cast<long>(std::ceil((b - lo) / step)) - 1;
    for (long i = i0; i <= i1; ++i) {
      const double t = lo + static_cast<double>(i) * step;
      if (t > a && t < b) pts.push_back(t);
    }
    pts.push_back(b);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      acc += 0.5L * (pts[k + 1] - pts[k]) * (value(pts[k]) + value(pts[k + 1]));
    return static_cast<double>(acc);
  };
  double best = 0.0;
  const double span = hi - lo;
  for (double delta = step;; delta *= 2.0) {
    best = std::max(best, integral(x - delta, x + delta) / (2.0 * delta));
    if (x - delta <= lo && x + delta >= hi) break;
    if (delta > 4.0 * span) break;
  }
  return best;
}

double pointwise_oracle_ratio(const ModifiedOperator& op, const Target& f, int r, const std::vector<double>& probes) {
  require(op.basis != nullptr && op.basis->dim() == 1, "pointwise_oracle_ratio: 1-d operator required");
  ErrorKernel K;
  K.kind = ErrorKernel::Kind::Psi;
  K.r = r;
  K.m2 = op.basis->symbol().m2;
  K.h = op.h;
  const auto g = [&](double t) { return f.derivative_norm(r, {t, 0.0}); };
  CoefficientCache cache;
  double worst = 0.0;
  for (double x : probes) {
    const double err = std::abs(f({x, 0.0}) - apply_Qh_tilde(op, f.handle(), {x, 0.0}, &cache).value);
    const double bound = std::pow(op.h, r) * kernel_convolution(g, K, x, {0.0});
    require(bound > 0.0, "pointwise_oracle_ratio: vanishing kernel bound");
    worst = std::max(worst, err / bound);
  }
  return worst;
}

}  // namespace rbfq
