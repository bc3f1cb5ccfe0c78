// Command-line front end: center sets, mu tables, psi profiles and the
// experiment runners.  Exit codes: 0 pass, 1 usage error, 2 numerical failure.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "rbfq/centers.hpp"
#include "rbfq/error.hpp"
#include "rbfq/harness.hpp"
#include "rbfq/mu.hpp"
#include "rbfq/quasi_op.hpp"

namespace {

using namespace rbfq;

constexpr int kPass = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

struct UsageError : Error {
  using Error::Error;
};

void write_text(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create '" + dir + "': " + ec.message());
  std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
  if (!out) throw Error("cannot write '" + dir + "/" + name + "'");
  out << text;
}

// "a..b" -> 2^{-a}, ..., 2^{-b}.
std::vector<double> parse_h_sweep(const std::string& sweep_text) {
  const auto dots = sweep_text.find("..");
  if (dots == std::string::npos) throw UsageError("--h-sweep expects a..b (exponents of 1/2)");
  int a = 0, b = 0;
  try {
    a = std::stoi(sweep_text.substr(0, dots));
    b = std::stoi(sweep_text.substr(dots + 2));
  } catch (const std::exception&) {
    throw UsageError("--h-sweep expects integer exponents, got '" + sweep_text + "'");
  }
  if (a < 0 || b < a) throw UsageError("--h-sweep needs 0 <= a <= b");
  std::vector<double> out;
  for (int e = a; e <= b; ++e) out.push_back(std::ldexp(1.0, -e));
  return out;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct ExperimentFlags {
  std::string config, out, symbol, h_sweep, norms;
  std::int64_t seed = -1;
  bool modified = false;
};

int run_experiment_command(ExperimentKind kind, const ExperimentFlags& fl) {
  ExperimentConfig cfg = default_config(kind);
  if (!fl.config.empty()) {
    std::ifstream in(fl.config);
    if (!in) throw UsageError("cannot read config '" + fl.config + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.contains("experiment")) j["experiment"] = to_string(kind);
    cfg = ExperimentConfig::from_json(j);
    const bool compatible = cfg.experiment == kind ||
                            (kind == ExperimentKind::converge && cfg.experiment == ExperimentKind::converge_modified);
    if (!compatible) throw UsageError("config experiment '" + to_string(cfg.experiment) + "' does not match command");
  }
  if (fl.modified) cfg.experiment = ExperimentKind::converge_modified;
  if (!fl.symbol.empty()) cfg.symbol = fl.symbol;
  if (fl.seed >= 0) cfg.seed = static_cast<std::uint64_t>(fl.seed);
  if (!fl.h_sweep.empty()) cfg.h_sweep = parse_h_sweep(fl.h_sweep);
  if (!fl.norms.empty()) cfg.norms = split_commas(fl.norms);
  if (!fl.out.empty()) cfg.output = fl.out;
  try {
    cfg.validate();
  } catch (const NumericalError&) {
    throw;
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const ResultSet rs = run_experiment(cfg);
  emit_report(rs, cfg.output);
  std::cout << format_csv(rs);
  for (const auto& [name, rate] : rs.rates)
    std::cout << "rate " << name << ": slope " << rate.slope << " (r^2 " << rate.r_squared << ")\n";
  for (const auto& c : rs.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " = " << c.value << "\n";
  return rs.passed() ? kPass : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized RBF quasi-interpolation: operators, compression and rate experiments"};
  app.require_subcommand(1);

  // centers
  auto* centers = app.add_subcommand("centers", "Generate a center set and check quasi-uniformity");
  int c_dim = 1;
  std::string c_kind = "lattice", c_out = "out/centers";
  double c_radius = 8.0, c_delta = 0.25;
  std::int64_t c_seed = 1;
  centers->add_option("--dim", c_dim, "Dimension (1 or 2)")->check(CLI::Range(1, 2));
  centers->add_option("--kind", c_kind, "lattice or perturbed")->check(CLI::IsMember({"lattice", "perturbed"}));
  centers->add_option("--radius", c_radius, "Window half-width");
  centers->add_option("--delta", c_delta, "Perturbation size (perturbed only)");
  centers->add_option("--seed", c_seed, "Seed for the perturbation");
  centers->add_option("--out", c_out, "Output directory");

  // mu
  auto* mu = app.add_subcommand("mu", "Compute the mu table and its invariants");
  std::string m_symbol = "linear1d", m_source = "auto", m_out = "out/mu";
  double m_radius = 32.0;
  std::int64_t m_seed = 1;
  mu->add_option("--symbol", m_symbol, "Catalog symbol, e.g. linear1d");
  mu->add_option("--source", m_source, "auto, quadrature or preset");
  mu->add_option("--radius", m_radius, "Window half-width");
  mu->add_option("--seed", m_seed, "Seed");
  mu->add_option("--out", m_out, "Output directory");

  // psi
  auto* psi = app.add_subcommand("psi", "Tabulate psi_0 and its decay calibration");
  std::string p_symbol = "linear1d", p_source = "auto", p_out = "out/psi";
  double p_range = 16.0, p_step = 1.0 / 16.0;
  std::int64_t p_seed = 1;
  psi->add_option("--symbol", p_symbol, "Catalog symbol");
  psi->add_option("--source", p_source, "auto, quadrature or preset");
  psi->add_option("--range", p_range, "Tabulate |x| <= range");
  psi->add_option("--step", p_step, "Tabulation step");
  psi->add_option("--seed", p_seed, "Seed");
  psi->add_option("--out", p_out, "Output directory");

  // experiments
  const std::vector<std::pair<std::string, ExperimentKind>> kinds{
      {"converge", ExperimentKind::converge},     {"greedy", ExperimentKind::greedy},
      {"threshold", ExperimentKind::threshold},   {"stagnation", ExperimentKind::stagnation},
      {"nterm", ExperimentKind::nterm},           {"diagnose", ExperimentKind::diagnostics}};
  std::vector<std::pair<CLI::App*, ExperimentKind>> exp_cmds;
  ExperimentFlags flags;
  for (const auto& [name, kind] : kinds) {
    auto* cmd = app.add_subcommand(name, "Run the " + name + " experiment");
    cmd->add_option("--config", flags.config, "JSON experiment config");
    cmd->add_option("--out", flags.out, "Output directory");
    cmd->add_option("--seed", flags.seed, "Seed");
    cmd->add_option("--symbol", flags.symbol, "Catalog symbol");
    cmd->add_option("--h-sweep", flags.h_sweep, "h = 2^-a .. 2^-b, given as a..b");
    cmd->add_option("--norms", flags.norms, "Comma list of sup, l1, l2");
    if (kind == ExperimentKind::converge) cmd->add_flag("--modified", flags.modified, "Use Q~_h (local functionals)");
    exp_cmds.emplace_back(cmd, kind);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (centers->parsed()) {
      const CenterKind kind = c_kind == "lattice" ? CenterKind::lattice : CenterKind::perturbed;
      const CenterSet A = generate_centers(c_dim, kind, symmetric_window(c_dim, c_radius), c_delta,
                                           static_cast<std::uint64_t>(c_seed));
      const QuasiUniformityReport rep = verify_quasi_uniformity(A, 0.05);
      nlohmann::json j = A.to_json();
      j["quasi_uniformity"] = {{"c0_hat", rep.c0_hat}, {"C1_hat", rep.C1_hat}, {"pass", rep.pass}};
      write_text(c_out, "centers.json", j.dump(2) + "\n");
      std::cout << "centers: " << A.size() << " points, c0_hat " << rep.c0_hat << ", C1_hat " << rep.C1_hat
                << (rep.pass ? " (pass)\n" : " (FAIL)\n");
      return rep.pass ? kPass : kNumerical;
    }
    if (mu->parsed()) {
      const RbfSymbol sym = make_symbol(m_symbol, {});
      const auto B = make_quasi_basis(sym, parse_mu_source(m_source), m_radius, static_cast<std::uint64_t>(m_seed));
      const MuInvariantReport rep = mu_invariant_report(B->mu(), sym, B->mu().certified_degree);
      nlohmann::json j{{"mu", B->mu().to_json()}, {"invariants", rep.to_json()}};
      write_text(m_out, "mu.json", j.dump(2) + "\n");
      std::cout << rep.to_json().dump() << "\n";
      return rep.pass() ? kPass : kNumerical;
    }
    if (psi->parsed()) {
      const RbfSymbol sym = make_symbol(p_symbol, {});
      if (sym.dim != 1) throw UsageError("psi: tabulation is 1-d; use a 1-d symbol");
      const auto B = make_quasi_basis(sym, parse_mu_source(p_source), p_range + 64.0,
                                      static_cast<std::uint64_t>(p_seed));
      if (!(p_step > 0.0)) throw UsageError("psi: --step must be positive");
      std::ostringstream csv;
      csv << "x,psi\n";
      const long m = static_cast<long>(std::floor(p_range / p_step));
      for (long i = -m; i <= m; ++i) {
        const double x = i * p_step;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x, B->psi_offset({x, 0.0}));
        csv << buf;
      }
      write_text(p_out, "psi.csv", csv.str());
      write_text(p_out, "basis.json", B->to_json().dump(2) + "\n");
      std::cout << B->to_json().dump() << "\n";
      return kPass;
    }
    for (const auto& [cmd, kind] : exp_cmds)
      if (cmd->parsed()) return run_experiment_command(kind, flags);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
