#pragma once
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace pol {

// Frobenius solutions of psi'' = Q(t) psi around the pole at x = 1 (t = x - 1), with
// Q(t) = lambda2 * (1/(x^6 - 1) - eps) = sum_{j >= -1} q_j t^j.
//
//   regular:  psi_a = sum a_k t^(k+1),  a_0 = 1
//   singular: psi_s = psi_a ln|t| + sum b_k t^k,  b_0 = 1/q_{-1}
//
// b_1 is fixed so that for the pure pole equation psi_a and psi_s reduce to
// the Bessel pairs: x<1: psi_1 = -psi_a, psi_2 = psi_s  (J_1, Y_1);
//                   x>1: psi_1 = psi_a,  psi_2 = psi_s  (I_1, K_1).
class EdgeSeries {
 public:
  EdgeSeries() = default;
  EdgeSeries(double lambda2, double eps, int nterms = 80) : n_(nterms) {
    // x^6 - 1 = t P(t)
    const double P[6] = {6, 15, 20, 15, 6, 1};
    std::vector<double> inv(n_ + 2, 0.0);
    inv[0] = 1.0 / 6.0;
    for (int j = 1; j < n_ + 2; ++j) {
      double s = 0;
      for (int k = 1; k <= std::min(j, 5); ++k) s += P[k] * inv[j - k];
      inv[j] = -s / 6.0;
    }
    q_.assign(n_ + 2, 0.0);  // q_[j+1] = q_j
    for (int j = 0; j < n_ + 2; ++j) q_[j] = lambda2 * inv[j];
    q_[1] -= lambda2 * eps;
    u2_ = q_[0];

    a_.assign(n_, 0.0);
    a_[0] = 1;
    for (int m = 1; m < n_; ++m) {
      double s = 0;
      for (int k = 0; k < m; ++k) s += q(m - 2 - k) * a_[k];
      a_[m] = s / ((m + 1.0) * m);
    }
    b_.assign(n_, 0.0);
    b_[0] = 1 / u2_;
    b_[1] = std::log(u2_) + 2 * std::numbers::egamma - 1;
    for (int m = 2; m < n_; ++m) {
      double s = 0;
      for (int k = 0; k < m; ++k) s += q(m - 2 - k) * b_[k];
      b_[m] = (s - (2 * m - 1) * a_[m - 1]) / (m * (m - 1.0));
    }
  }

  double u2() const { return u2_; }

  // psi_a and its t-derivative
  std::pair<double, double> regular(double t) const {
    double v = 0, d = 0;
    for (int k = n_ - 1; k >= 0; --k) {
      v = v * t + a_[k];
      d = d * t + (k + 1) * a_[k];
    }
    return {v * t, d};
  }

  // psi_a / t, finite at t = 0
  double regular_over_t(double t) const {
    double v = 0;
    for (int k = n_ - 1; k >= 0; --k) v = v * t + a_[k];
    return v;
  }

  std::pair<double, double> singular(double t) const {
    auto [pa, da] = regular(t);
    double v = 0, d = 0;
    for (int k = n_ - 1; k >= 0; --k) v = v * t + b_[k];
    for (int k = n_ - 1; k >= 1; --k) d = d * t + k * b_[k];
    const double lg = std::log(std::abs(t));
    return {pa * lg + v, da * lg + regular_over_t(t) + d};
  }

 private:
  double q(int j) const { return q_[j + 1]; }
  int n_ = 0;
  double u2_ = 0;
  std::vector<double> q_, a_, b_;
};

}  // namespace pol
