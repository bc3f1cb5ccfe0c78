#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "rbfq/local_fn.hpp"
#include "rbfq/quasi_op.hpp"
#include "rbfq/symbols.hpp"
#include "rbfq/targets.hpp"

namespace rbfq {

inline constexpr const char* kLibraryVersion = "0.1.0";

enum class ExperimentKind { converge, converge_modified, greedy, threshold, stagnation, nterm, diagnostics };
ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

// "auto" picks the per-symbol certified family.
enum class MuSource { automatic, quadrature, preset };
MuSource parse_mu_source(const std::string& name);
std::string to_string(MuSource source);

// "linear1d" -> ("linear", 1).
std::pair<std::string, int> parse_symbol_name(const std::string& name);

struct GridSpec {
  double lo = -0.5;
  double hi = 0.5;
  int points = 1001;
  std::vector<double> nodes() const;
};

// Acceptance check on one result column: stat in {min, max, slope, drift}
// compared with `le` and/or `ge`.
struct ExpectSpec {
  std::string column;
  std::string stat;
  std::optional<double> le;
  std::optional<double> ge;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::converge;
  std::string symbol = "linear1d";
  std::map<std::string, double> symbol_params;
  MuSource mu_source = MuSource::automatic;
  FunctionalVariant functional = FunctionalVariant::kernel;
  std::string target = "sin";
  std::map<std::string, double> target_params;
  std::vector<double> h_sweep;
  std::vector<long> n_sweep;
  std::vector<long> N_sweep;
  std::vector<std::string> norms{"sup", "l2"};
  GridSpec grid;
  std::uint64_t seed = 1;
  std::string output = "out";
  // Experiment-specific knobs (p, r, beta, a_decay, radii, wavelet, ...).
  nlohmann::json params = nlohmann::json::object();
  std::vector<ExpectSpec> expect;

  // Throws Error on inconsistent settings.
  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

// Defaults reproducing the reference run of each experiment.
ExperimentConfig default_config(ExperimentKind kind);

struct RateReport {
  std::vector<std::pair<double, double>> points;    // used (scale, error)
  std::vector<std::pair<double, double>> excluded;  // below the noise floor
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  nlohmann::json to_json() const;
};

// Least squares through (log scale, log error); errors below `floor` are
// excluded.  Fewer than 3 usable points is an error.
RateReport fit_rate(const std::vector<std::pair<double, double>>& points, double floor = 0.0);

struct CheckResult {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

struct ResultSet {
  ExperimentConfig config;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, RateReport> rates;  // per error column
  std::vector<CheckResult> checks;
  nlohmann::json diagnostics = nlohmann::json::object();

  bool passed() const;
  std::vector<double> column(const std::string& name) const;
};

ResultSet run_experiment(const ExperimentConfig& config);

// Writes rates.csv, manifest.json and plot.gp into `dir`.
void emit_report(const ResultSet& results, const std::string& dir);
std::string format_csv(const ResultSet& results);

// Error kernels of the pointwise estimate (1-d arguments |z|).
struct ErrorKernel {
  enum class Kind { Psi, Phi_h };
  Kind kind = Kind::Psi;
  double r = 1.0;
  double m2 = 1.0;
  double h = 1.0;
  int d = 1;

  // Psi_h(z) = h^{-d} Psi(z / h), Psi(z) = |z|^{1-d} (1 + |z|)^{-1-m2+r};
  // Phi^h(z) = |z|^{1-d} (|z| + h)^{-1} (1 + |z|)^{-1}.
  double operator()(double z) const;
};

// (g * K)(x) in 1-d by graded Gauss-Legendre panels; `kinks` are points
// where g is not smooth.
double kernel_convolution(const std::function<double(double)>& g, const ErrorKernel& K, double x,
                          const std::vector<double>& kinks = {});

// Discrete Hardy-Littlewood maximal function of uniform 1-d samples
// (lo + i step): sup over dyadic radii step 2^t of ball averages of |f|
// (f = 0 off the grid).
double maximal_function(const std::vector<double>& samples, double lo, double step, double x);

// max over probes of |f - Q~_h f|(x) / (h^r (||D^r f|| * Psi_h)(x)).
double pointwise_oracle_ratio(const ModifiedOperator& op, const Target& f, int r,
                              const std::vector<double>& probes);

// Machinery shared by the experiments.
RbfSymbol make_symbol(const std::string& name, const std::map<std::string, double>& params);
std::shared_ptr<QuasiBasis> make_quasi_basis(const RbfSymbol& sym, MuSource source, double window_radius,
                                             std::uint64_t seed, double tail_tol = 0.0);

}  // namespace rbfq
