#include "rbfq/centers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rbfq/error.hpp"

namespace rbfq {

std::uint64_t Lcg64::next() {
  state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
  return state_;
}

double Lcg64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Box symmetric_window(int dim, double r) {
  Box b;
  b.lo = {-r, dim == 2 ? -r : 0.0};
  b.hi = {r, dim == 2 ? r : 0.0};
  return b;
}

double CenterSet::boundary_distance(const Point& p) const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim; ++i) d = std::min({d, p[i] - window.lo[i], window.hi[i] - p[i]});
  return d;
}

int CenterSet::index_of_lattice(std::array<int, 2> id) const {
  // Points are generated in lexicographic lattice order and perturbations
  // stay below 1/2, so sorting preserves lattice order.
  if (lattice_ids.empty()) return -1;
  const int lo0 = lattice_ids.front()[0];
  const int lo1 = lattice_ids.front()[1];
  const int hi0 = lattice_ids.back()[0];
  const int hi1 = lattice_ids.back()[1];
  if (id[0] < lo0 || id[0] > hi0) return -1;
  if (dim == 1) return id[0] - lo0;
  if (id[1] < lo1 || id[1] > hi1) return -1;
  return (id[0] - lo0) * (hi1 - lo1 + 1) + (id[1] - lo1);
}

nlohmann::json CenterSet::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) {
    if (dim == 1)
      pts.push_back({p[0]});
    else
      pts.push_back({p[0], p[1]});
  }
  nlohmann::json win = {{"lo", std::vector<double>(window.lo.begin(), window.lo.begin() + dim)},
                        {"hi", std::vector<double>(window.hi.begin(), window.hi.begin() + dim)}};
  return {{"dim", dim},
          {"kind", kind == CenterKind::lattice ? "lattice" : "perturbed"},
          {"window", win},
          {"delta", delta},
          {"seed", seed},
          {"c0", c0},
          {"C1", C1},
          {"points", pts}};
}

CenterSet generate_centers(int dim, CenterKind kind, const Box& window, double delta,
                           std::uint64_t seed) {
  require(dim == 1 || dim == 2, "generate_centers: dim must be 1 or 2");
  if (kind == CenterKind::perturbed && !(delta >= 0.0 && delta < 0.5))
    throw Error("generate_centers: perturbation delta must lie in [0, 0.5)");
  std::array<int, 2> lo{0, 0}, hi{0, 0};
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<int>(std::ceil(window.lo[i]));
    hi[i] = static_cast<int>(std::floor(window.hi[i]));
    if (hi[i] < lo[i]) throw Error("generate_centers: window contains no lattice point");
  }
  CenterSet out;
  out.dim = dim;
  out.kind = kind;
  out.window = window;
  out.seed = seed;
  out.delta = kind == CenterKind::perturbed ? delta : 0.0;
  Lcg64 rng(seed);
  for (int a = lo[0]; a <= hi[0]; ++a) {
    for (int b = lo[1]; b <= hi[1]; ++b) {
      Point p{static_cast<double>(a), dim == 2 ? static_cast<double>(b) : 0.0};
      if (kind == CenterKind::perturbed)
        for (int i = 0; i < dim; ++i) p[i] += delta * (2.0 * rng.uniform() - 1.0);
      out.points.push_back(p);
      out.lattice_ids.push_back({a, dim == 2 ? b : 0});
    }
  }
  // Lattice order is already lexicographic in the perturbed points as well
  // (delta < 1/2 cannot swap neighbours along the leading coordinate).
  const double half_diag = std::sqrt(static_cast<double>(dim)) / 2.0;
  if (kind == CenterKind::lattice) {
    out.c0 = half_diag;
    out.C1 = (1 << dim) + 1;
  } else {
    out.c0 = half_diag + delta;
    out.C1 = dim == 1 ? 3 : 9;
  }
  return out;
}

QuasiUniformityReport verify_quasi_uniformity(const CenterSet& centers, double probe_spacing) {
  require(probe_spacing > 0.0, "verify_quasi_uniformity: probe spacing must be positive");
  QuasiUniformityReport rep;
  const int dim = centers.dim;
  const double margin = centers.c0;
  std::array<int, 2> steps{1, 1};
  for (int i = 0; i < dim; ++i) {
    const double len = centers.window.hi[i] - centers.window.lo[i] - 2 * margin;
    steps[i] = len > 0 ? static_cast<int>(std::floor(len / probe_spacing)) + 1 : 0;
  }
  if (steps[0] == 0 || steps[1] == 0) return rep;
  // Bucket centers by lattice id for O(1) neighbourhood lookup.
  const int reach = static_cast<int>(std::ceil(centers.c0)) + 1;
  for (int s0 = 0; s0 < steps[0]; ++s0) {
    for (int s1 = 0; s1 < steps[1]; ++s1) {
      Point x{centers.window.lo[0] + margin + s0 * probe_spacing,
              dim == 2 ? centers.window.lo[1] + margin + s1 * probe_spacing : 0.0};
      double nearest = std::numeric_limits<double>::infinity();
      int overlap = 0;
      const int base0 = static_cast<int>(std::lround(x[0]));
      const int base1 = static_cast<int>(std::lround(x[1]));
      for (int a = base0 - reach; a <= base0 + reach; ++a) {
        for (int b = (dim == 2 ? base1 - reach : 0); b <= (dim == 2 ? base1 + reach : 0); ++b) {
          const int idx = centers.index_of_lattice({a, b});
          if (idx < 0) continue;
          const Point& p = centers.points[idx];
          double d2 = 0.0;
          for (int i = 0; i < dim; ++i) d2 += (p[i] - x[i]) * (p[i] - x[i]);
          const double d = std::sqrt(d2);
          nearest = std::min(nearest, d);
          if (d <= centers.c0) ++overlap;
        }
      }
      rep.c0_hat = std::max(rep.c0_hat, nearest);
      rep.C1_hat = std::max(rep.C1_hat, overlap);
    }
  }
  rep.pass = rep.c0_hat <= centers.c0 + 1e-12 && rep.C1_hat <= centers.C1;
  return rep;
}

}  // namespace rbfq
