#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "json.hpp"

namespace rbfq {

// Points carry two coordinates; for dim = 1 the second is 0.
using Point = std::array<double, 2>;

struct Box {
  Point lo{0.0, 0.0};
  Point hi{0.0, 0.0};
};

enum class CenterKind { lattice, perturbed };

// Deterministic 64-bit LCG (Knuth MMIX constants).  The top 53 bits of the
// state give a uniform double in [0, 1).
class Lcg64 {
 public:
  explicit Lcg64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();

 private:
  std::uint64_t state_;
};

struct CenterSet {
  int dim = 1;
  CenterKind kind = CenterKind::lattice;
  Box window;
  std::vector<Point> points;  // lexicographically sorted
  // Lattice index of each point (the integer point it was generated from).
  std::vector<std::array<int, 2>> lattice_ids;
  double c0 = 0.0;
  int C1 = 1;
  std::uint64_t seed = 0;
  double delta = 0.0;

  std::size_t size() const { return points.size(); }
  // Distance from p to the window boundary (negative outside).
  double boundary_distance(const Point& p) const;
  // Index of the center generated from lattice point id, or -1.
  int index_of_lattice(std::array<int, 2> id) const;

  nlohmann::json to_json() const;
};

CenterSet generate_centers(int dim, CenterKind kind, const Box& window, double delta,
                           std::uint64_t seed);

struct QuasiUniformityReport {
  double c0_hat = 0.0;
  int C1_hat = 0;
  bool pass = false;
};

QuasiUniformityReport verify_quasi_uniformity(const CenterSet& centers, double probe_spacing);

// Convenience: symmetric window [-r, r]^dim.
Box symmetric_window(int dim, double r);

}  // namespace rbfq
