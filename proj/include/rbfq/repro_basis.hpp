#pragma once

#include <memory>
#include <vector>

#include "json.hpp"
#include "rbfq/bspline.hpp"
#include "rbfq/centers.hpp"
#include "rbfq/poly.hpp"

namespace rbfq {

enum class BasisKind { lattice, scattered };

struct BasisOptions {
  // B-spline order for lattice bases; 0 selects k + 2 (C^k).
  int spline_order = 0;
  // Half-width of the partition-of-unity transition zones (scattered).
  double transition_halfwidth = 0.25;
};

// Compactly supported functions N_alpha reproducing polynomials of degree
// <= k from their values at the centers.
class ReproBasis {
 public:
  int dim() const { return dim_; }
  int k() const { return k_; }
  BasisKind kind() const { return kind_; }
  // Support diameter: N_alpha vanishes outside B_{M/2}(alpha).
  double M() const { return M_; }
  const CenterSet& centers() const { return *centers_; }
  std::shared_ptr<const CenterSet> centers_ptr() const { return centers_; }

  // Lattice data.
  int spline_order() const { return order_; }
  int stencil_halfwidth() const { return halfwidth_; }
  const std::vector<double>& mother_coeffs() const { return coeffs_; }
  // Half-width of the 1-d mother support.
  double mother_radius() const { return 0.5 * order_ + halfwidth_; }
  // D^t N(x) for the 1-d mother function N.
  double mother(int t, double x) const;

  // D^gamma N_alpha(x), gamma = (g0, g1).
  double eval(std::size_t alpha, const Point& x, int g0 = 0, int g1 = 0) const;
  // Indices of the centers whose support contains x.
  std::vector<std::size_t> active_at(const Point& x) const;

  // 1-d only: support interval and sorted breakpoints of N_alpha.
  std::pair<double, double> support_1d(std::size_t alpha) const;
  std::vector<double> breakpoints_1d(std::size_t alpha) const;
  // Highest polynomial degree of N_alpha on a piece between breakpoints.
  int piece_degree() const;

  // sup |D^t N| recorded per derivative order t <= k (per coordinate for
  // tensor lattices).
  const std::vector<double>& derivative_bounds() const { return deriv_bounds_; }
  // Max over |gamma| <= k of sup |D^gamma N_alpha|.
  double derivative_bound() const;

  nlohmann::json to_json() const;

 private:
  friend ReproBasis build_repro_basis(std::shared_ptr<const CenterSet>, int, const BasisOptions&);

  struct CellPiece {
    int cell = 0;
    Polynomial lagrange{1};  // in local coordinate (x - cell_mid)
    std::vector<Polynomial> lagrange_derivs;
  };

  double eval_scattered(std::size_t alpha, double x, int t) const;
  double pu(int cell, int t, double x) const;

  int dim_ = 1;
  int k_ = 1;
  BasisKind kind_ = BasisKind::lattice;
  double M_ = 0.0;
  std::shared_ptr<const CenterSet> centers_;
  int order_ = 0;
  int halfwidth_ = 0;
  std::vector<double> coeffs_;  // c_{-K..K}
  double w_ = 0.25;
  std::shared_ptr<const SmoothStep> step_;
  std::vector<std::vector<CellPiece>> pieces_;  // per center
  std::vector<double> deriv_bounds_;
};

ReproBasis build_repro_basis(std::shared_ptr<const CenterSet> centers, int k,
                             const BasisOptions& options = {});

// Max over grid of |q(x) - sum_alpha q(alpha) N_alpha(x)|.
double reproduction_residual(const ReproBasis& basis, const Polynomial& q,
                             const std::vector<Point>& grid);

}  // namespace rbfq
