#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"
#include "rbfq/local_fn.hpp"
#include "rbfq/quasi_op.hpp"
#include "rbfq/wavelet.hpp"

namespace rbfq {

// Dyadic house v = (I_v, e_v) in one dimension: I = 2^{-j}[k, k+1), e = 1.
struct DyadicIndex {
  int j = 0;
  long k = 0;
  int e = 1;

  double length() const;  // l(I) = 2^{-j}
  double left() const;
  double center() const;
  // Support cube I-bar = 2^{-j}[k, k + A0].
  double support_lo() const { return left(); }
  double support_hi(int A0) const;
  // The dyadic interval at level jj <= j containing I.
  DyadicIndex ancestor(int jj) const;

  bool operator==(const DyadicIndex& o) const { return j == o.j && k == o.k && e == o.e; }
};

// Coefficients f_v = |I_v|^{-1} <f, w_v> with w_v(x) = psi(2^j x - k), so
// f = sum f_v w_v.  Indices are ordered by (j, k).
struct CoeffField {
  std::vector<DyadicIndex> index;
  std::vector<double> value;
  int A0 = 0;
  int j_min = 0;
  int j_max = 0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  // Midpoint samples of f on the window, for the L^p part of the norm proxy.
  std::vector<double> samples;

  std::size_t size() const { return index.size(); }
  double signal_norm(double p) const;
  CoeffField scaled(double lambda) const;
  nlohmann::json to_json() const;
};

struct AnalysisOptions {
  // Absolute cascade depth (0 selects j_max + 8).
  int depth = 0;
  // Cap on the relative table depth used at coarse levels.
  int max_relative_depth = 14;
  // Levels whose wavelet support exceeds this multiple of the window width
  // are integrated in x over the window instead (f must vanish outside it).
  double coarse_ratio = 64.0;
  int coarse_panels = 64;
  int signal_samples = 4096;
};

CoeffField wavelet_analyze(const WaveletSystem& sys, const PointFunction& f, int j_min, int j_max,
                           double window_lo, double window_hi, const AnalysisOptions& options = {});

// tau = (1/p + s)^{-1}, q = (1 + s)^{-1} for d = 1.
double nterm_tau(double s, double p);
double nterm_q(double s);

// Delta_{s,q} f(x) = (sum l(v)^{-qs} |f_v|^q chi_{I-bar_v}(x))^{1/q}
// (sup form for q = infinity).
double triebel_delta(const CoeffField& coeffs, double s, double q, double x);
// Discrete L^p norm of Delta_{s,q} f on a sorted grid.
double triebel_seminorm(const CoeffField& coeffs, double s, double q, double p, const std::vector<double>& grid);
// Exact L^p norm of the piecewise constant Delta_{s,q} f.
double triebel_seminorm_exact(const CoeffField& coeffs, double s, double q, double p);

struct AllocationOptions {
  // Replaces the proxy ||f||_p + ||Delta_{s,q} f||_tau.
  std::optional<double> norm_override;
};

struct AllocationPlan {
  long N = 0;
  double a = 0.0;
  double tau = 0.0;
  double q = 0.0;
  double s = 0.0;
  double p = 0.0;
  double norm = 0.0;
  std::vector<double> M;    // M_{q,v}
  std::vector<double> a_v;
  std::vector<long> N_v;
  long total = 0;           // sum N_v

  nlohmann::json to_json(const CoeffField& coeffs) const;
};

AllocationPlan allocate_budget(const CoeffField& coeffs, long N, double s, double p,
                               const AllocationOptions& options = {});

// Lattice quasi-interpolation machinery used for each S_{v,N_v}.
struct NtermMachinery {
  std::shared_ptr<const QuasiBasis> basis;
  FunctionalVariant variant = FunctionalVariant::kernel;
  int ell = 1;
};

// weight * psi_0((x - center) / scale)
struct NtermTerm {
  double center = 0.0;
  double scale = 1.0;
  double weight = 0.0;
};

class NtermApproximant {
 public:
  NtermApproximant() = default;
  NtermApproximant(std::shared_ptr<const QuasiBasis> basis, std::vector<NtermTerm> terms);
  double operator()(double x) const;
  const std::vector<NtermTerm>& terms() const { return terms_; }
  // psi_0 vanishes (or is truncated) beyond this offset.
  double reach() const { return reach_; }
  // Breakpoints of each term at center + m scale, |m| <= reach.
  std::vector<double> knots() const;

 private:
  std::shared_ptr<const QuasiBasis> basis_;
  std::vector<NtermTerm> terms_;
  double reach_ = 0.0;
  double max_scale_ = 0.0;
};

struct SynthesisBlock {
  DyadicIndex v;
  long N_v = 0;
  double h = 0.0;
  std::size_t centers = 0;
};

struct SynthesisOptions {
  double C = 1.0;
  double growth = 1.0905077326652577;  // 2^{1/8}
  double p = 2.0;
  int nodes = 0;
};

struct NtermReport {
  long N = 0;
  long sum_Nv = 0;
  double error_p = 0.0;
  std::size_t psi_terms = 0;
  // l + 1 < vanishing moments of the wavelet.
  bool certified = false;
  nlohmann::json to_json() const;
};

struct SynthesisResult {
  NtermApproximant approximant;
  std::vector<SynthesisBlock> blocks;
  NtermReport report;
};

SynthesisResult synthesize_nterm(const AllocationPlan& plan, const CoeffField& coeffs, const WaveletSystem& sys,
                                 const NtermMachinery& machinery, const PointFunction& f,
                                 const SynthesisOptions& options = {});

// ||f - g||_p on a graded mesh through the approximant's knots, covering the
// coefficient window and every term support.
double nterm_error(const PointFunction& f, const NtermApproximant& g, double lo, double hi, double p);

}  // namespace rbfq
