#include "rbfq/wavelet.hpp"

#include <cmath>

#include "rbfq/error.hpp"

namespace rbfq {

WaveletFamily parse_wavelet_family(const std::string& name) {
  if (name == "db2") return WaveletFamily::db2;
  if (name == "db3") return WaveletFamily::db3;
  throw Error("unknown wavelet family '" + name + "'");
}

std::string to_string(WaveletFamily f) { return f == WaveletFamily::db2 ? "db2" : "db3"; }

WaveletSystem::WaveletSystem(WaveletFamily family) : family_(family) {
  const double r2 = std::sqrt(2.0);
  if (family == WaveletFamily::db2) {
    const double s3 = std::sqrt(3.0);
    h_ = {(1 + s3) / (4 * r2), (3 + s3) / (4 * r2), (3 - s3) / (4 * r2), (1 - s3) / (4 * r2)};
  } else {
    const double s10 = std::sqrt(10.0);
    const double t = std::sqrt(5.0 + 2.0 * s10);
    const double c = 16.0 * r2;
    h_ = {(1 + s10 + t) / c,          (5 + s10 + 3 * t) / c, (10 - 2 * s10 + 2 * t) / c,
          (10 - 2 * s10 - 2 * t) / c, (5 + s10 - 3 * t) / c, (1 + s10 - t) / c};
  }
  const int L = length();
  g_.resize(L);
  for (int k = 0; k < L; ++k) g_[k] = ((k % 2 == 0) ? 1.0 : -1.0) * h_[L - 1 - k];
  const int n = L - 1;
  T0_ = Eigen::MatrixXd::Zero(n, n);
  T1_ = Eigen::MatrixXd::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int k0 = 2 * a - b, k1 = 2 * a - b + 1;
      if (k0 >= 0 && k0 < L) T0_(a, b) = r2 * h_[k0];
      if (k1 >= 0 && k1 < L) T1_(a, b) = r2 * h_[k1];
    }
  // phi at the integers: eigenvector of T0 for eigenvalue 1, sum = 1.
  const Eigen::MatrixXd M = T0_ - Eigen::MatrixXd::Identity(n, n);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::MatrixXd K = lu.kernel();
  if (K.cols() != 1) throw NumericalError("WaveletSystem: integer values of phi are not unique");
  v0_ = K.col(0) / K.col(0).sum();
}

double WaveletSystem::phi(double x) const {
  const int n = length() - 1;
  if (!(x > 0.0) || x >= n) return 0.0;
  const double fl = std::floor(x);
  const int cell = static_cast<int>(fl);
  double y = x - fl;
  std::vector<int> digits;
  while (y != 0.0 && digits.size() < 1100) {
    y *= 2.0;
    const int d = y >= 1.0 ? 1 : 0;
    digits.push_back(d);
    y -= d;
  }
  Eigen::VectorXd v = v0_;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) v = (*it ? T1_ : T0_) * v;
  return v(cell);
}

double WaveletSystem::psi(double x) const {
  if (!(x > 0.0) || x >= A0()) return 0.0;
  const double r2 = std::sqrt(2.0);
  double s = 0.0;
  for (int k = 0; k < length(); ++k) s += g_[k] * phi(2.0 * x - k);
  return r2 * s;
}

std::vector<double> WaveletSystem::phi_table(int depth) const {
  require(depth >= 0 && depth <= 24, "phi_table: depth must lie in [0, 24]");
  const int n = length() - 1;
  std::vector<double> cur(n + 1, 0.0);
  for (int i = 0; i < n; ++i) cur[i] = v0_(i);
  const double r2 = std::sqrt(2.0);
  for (int m = 1; m <= depth; ++m) {
    const std::size_t size = static_cast<std::size_t>(n) * (std::size_t{1} << m) + 1;
    std::vector<double> next(size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
      if (i % 2 == 0) {
        next[i] = cur[i / 2];
        continue;
      }
      // phi(i 2^{-m}) = sqrt2 sum_k h_k phi(i 2^{-(m-1)} - k).
      double s = 0.0;
      for (int k = 0; k < length(); ++k) {
        const long idx = static_cast<long>(i) - static_cast<long>(k) * (1L << (m - 1));
        if (idx >= 0 && static_cast<std::size_t>(idx) < cur.size()) s += h_[k] * cur[idx];
      }
      next[i] = r2 * s;
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<double> WaveletSystem::psi_table(int depth) const {
  require(depth >= 1, "psi_table: depth must be >= 1");
  const std::vector<double> ph = phi_table(depth - 1);
  const double r2 = std::sqrt(2.0);
  const std::size_t size = static_cast<std::size_t>(A0()) * (std::size_t{1} << depth) + 1;
  std::vector<double> out(size, 0.0);
  const long unit = 1L << (depth - 1);
  for (std::size_t i = 0; i < size; ++i) {
    // psi(i 2^{-depth}) = sqrt2 sum_k g_k phi(i 2^{-(depth-1)} - k).
    double s = 0.0;
    for (int k = 0; k < length(); ++k) {
      const long idx = static_cast<long>(i) - k * unit;
      if (idx >= 0 && static_cast<std::size_t>(idx) < ph.size()) s += g_[k] * ph[idx];
    }
    out[i] = r2 * s;
  }
  return out;
}

}  // namespace rbfq
