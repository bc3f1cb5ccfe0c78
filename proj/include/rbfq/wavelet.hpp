#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rbfq {

enum class WaveletFamily { db2, db3 };

WaveletFamily parse_wavelet_family(const std::string& name);
std::string to_string(WaveletFamily f);

// Daubechies orthonormal wavelet with scaling function supported on [0, L-1]
// and wavelet psi(x) = sqrt(2) sum_k g_k phi(2x - k), g_k = (-1)^k h_{L-1-k}.
class WaveletSystem {
 public:
  explicit WaveletSystem(WaveletFamily family);

  WaveletFamily family() const { return family_; }
  const std::vector<double>& lowpass() const { return h_; }
  const std::vector<double>& highpass() const { return g_; }
  int length() const { return static_cast<int>(h_.size()); }
  int vanishing_moments() const { return length() / 2; }
  // Support of psi is [0, A0].
  int A0() const { return length() - 1; }

  // Pointwise values by products of the two-scale matrices (exact at
  // dyadic arguments, which every double is).
  double phi(double x) const;
  double psi(double x) const;

  // Cascade values at i 2^{-depth}, i = 0 .. A0 2^depth.
  std::vector<double> phi_table(int depth) const;
  std::vector<double> psi_table(int depth) const;

 private:
  WaveletFamily family_;
  std::vector<double> h_, g_;
  Eigen::MatrixXd T0_, T1_;
  Eigen::VectorXd v0_;  // phi at the integers 0 .. L-2
};

}  // namespace rbfq
