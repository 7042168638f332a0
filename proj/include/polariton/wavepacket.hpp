#pragma once
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "propagator.hpp"
#include "wkb.hpp"

namespace pol {

struct VariationalSpec {
  int n = 1;
  double sigma = 0;          // frequency width
  double omega_center = 0;
  double half_window = 3.5;  // integration range in units of sigma
  int nodes = 64;
  double r_center = 0;       // R0, center-of-mass position of the packet
};

// K_n(omega) from the quantization condition, or from the closed form if no root is bracketed.
inline double branch_momentum(const PolaritonParams& p, double omega, int n) {
  try {
    return wkb_momentum(p, omega, n);
  } catch (const ConvergenceError&) {
    const double gw = p.g * p.g * blockade_radius(p, omega) / (p.c * p.delta);
    const double kb = 1 - (1 + p.omega_bar(omega)) * n * n / (closed_form_constant() * gw * gw);
    return p.k_from_bar(kb);
  }
}

// Relative profile (-1)^n [1 - cos int_r^{r_b} p] / (1 - (r_b/r)^6) inside r_b(omega), zero outside.
inline double variational_profile(const EffectiveProblem& q, int n, double r) {
  const double x = std::abs(r) / q.rb;
  if (x >= 1) return 0.0;
  const double sign = n % 2 ? -1.0 : 1.0;
  const double t = x - 1;
  const double poly = 6 + t * (15 + t * (20 + t * (15 + t * (6 + t))));  // (x^6 - 1) / t
  if (-t < 1e-9) return -sign * q.lambda2 / 18;                         // limit at the edge
  const double phase = std::sqrt(q.lambda2) * wkb_partial_x(q.eps_energy, x);
  return sign * (1 - std::cos(phase)) * std::pow(x, 6) / (t * poly);
}

struct VariationalResult {
  double carrier_k = 0;  // K_n(omega_center), factored out of the stored amplitude
  std::vector<double> omegas, momenta;
  double dropped_weight = 0;  // Gaussian weight of nodes outside the validity window
};

// SS = N sum_k w_k exp(-(w_k - w_c)^2/sigma^2) exp(i (K_n(w_k) - K0)(R - R0)) profile_k(r); other
// components zero. The field then holds the envelope relative to the carrier exp(i K0 R).
inline VariationalResult variational_ss(const VariationalSpec& spec, const PolaritonParams& p,
                                        TwoExcitationField& f) {
  if (!(spec.sigma > 0)) throw ConfigError("variational width must be positive");
  if (spec.half_window < 2 || spec.nodes < 8) throw ConfigError("variational window too small");
  VariationalResult res;
  res.carrier_k = branch_momentum(p, spec.omega_center, spec.n);
  std::vector<EffectiveProblem> probs;
  std::vector<double> weights;
  double total = 0;
  for (int k = 0; k < spec.nodes; ++k) {
    const double u = -spec.half_window + 2 * spec.half_window * k / (spec.nodes - 1);
    const double w = spec.omega_center + u * spec.sigma;
    const double trap = (k == 0 || k + 1 == spec.nodes) ? 0.5 : 1.0;
    total += trap * std::exp(-u * u);
    try {
      const double bigk = wkb_momentum(p, w, spec.n);
      probs.push_back(effective_mass_energy(p, w, bigk));
      res.omegas.push_back(w);
      res.momenta.push_back(bigk);
      weights.push_back(trap * std::exp(-u * u));
    } catch (const Error&) {
      // no bound branch at this frequency, or outside its validity window
    }
  }
  res.dropped_weight = 1 - std::accumulate(weights.begin(), weights.end(), 0.0) / total;
  if (res.dropped_weight > 0.02)
    throw ValidityError("variational window leaves the branch validity window (" +
                        std::to_string(res.dropped_weight) + " of the weight)");
  for (auto c : {EE, ES, SE, SS}) std::fill(f.data(c).begin(), f.data(c).end(), cplx(0));
  const double h = f.h();
  for (int j = f.jmin(); j <= f.jmax(); ++j) {
    const double r = f.distance(j) * h;
    std::vector<double> prof(probs.size());
    bool any = false;
    for (size_t k = 0; k < probs.size(); ++k) {
      prof[k] = weights[k] * variational_profile(probs[k], spec.n, r);
      any = any || prof[k] != 0;
    }
    if (!any) continue;
    for (int i = 0; i < f.n(); ++i) {
      if (!f.inside(i, j)) continue;
      const double big_r = (i - 0.5 * j) * h - spec.r_center;
      cplx s = 0;
      for (size_t k = 0; k < probs.size(); ++k)
        if (prof[k] != 0) s += prof[k] * std::polar(1.0, (res.momenta[k] - res.carrier_k) * big_r);
      f.at(SS, i, j) = s;
    }
  }
  const double nrm = f.norm2();
  if (!(nrm > 0)) throw ConvergenceError("variational state vanishes on this grid");
  f.scale(1 / std::sqrt(nrm));
  return res;
}

// |EE| in band storage at one time.
struct EeSnapshot {
  double t = 0, h = 0;
  int n = 0, jmin = 0, width = 0;
  bool periodic = false;
  std::vector<float> amp;

  double at(int i, int j) const { return amp[static_cast<size_t>(i) * width + (j - jmin)]; }
  int jmax() const { return jmin + width - 1; }
  bool inside(int i, int j) const { return periodic || (i - j >= 0 && i - j < n); }
};

inline EeSnapshot take_snapshot(const TwoExcitationField& f) {
  EeSnapshot s;
  s.t = f.t;
  s.h = f.h();
  s.n = f.n();
  s.jmin = f.jmin();
  s.width = f.width();
  s.periodic = f.periodic();
  s.amp.reserve(f.data(EE).size());
  for (const auto& v : f.data(EE)) s.amp.push_back(static_cast<float>(std::abs(v)));
  return s;
}

struct TrackPoint {
  double t = 0, r_peak = 0;
};

// Center-of-mass peak position: for each row |r| < r_b the argmax over R with parabolic
// refinement, averaged over rows.
inline double peak_position(const EeSnapshot& s, double rb) {
  double gmax = 0, inner = 0, sum = 0;
  int rows = 0;
  for (float v : s.amp) gmax = std::max<double>(gmax, v);
  for (int j = s.jmin; j <= s.jmax(); ++j) {
    if (std::abs(j) * s.h >= rb) continue;
    int best = -1;
    double bv = -1;
    for (int i = 0; i < s.n; ++i) {
      if (!s.inside(i, j)) continue;
      if (s.at(i, j) > bv) {
        bv = s.at(i, j);
        best = i;
      }
    }
    if (best < 0) continue;
    inner = std::max(inner, bv);
    double d = 0;
    if (best > 0 && best + 1 < s.n && s.inside(best - 1, j) && s.inside(best + 1, j)) {
      const double ym = s.at(best - 1, j), y0 = bv, yp = s.at(best + 1, j);
      const double den = ym - 2 * y0 + yp;
      if (den < 0) d = 0.5 * (ym - yp) / den;
    }
    sum += (best + d - 0.5 * j) * s.h;
    ++rows;
  }
  if (rows == 0 || !(inner > 1e-6 * gmax)) throw ConvergenceError("no EE signal inside the blockade radius");
  return sum / rows;
}

inline std::vector<TrackPoint> track_peaks(const std::vector<EeSnapshot>& snaps, double rb,
                                           double t_transient = 0) {
  std::vector<TrackPoint> out;
  for (const auto& s : snaps) {
    if (s.t < t_transient) continue;
    out.push_back({s.t, peak_position(s, rb)});
  }
  if (out.size() < 3) throw ConvergenceError("fewer than 3 snapshots after the transient");
  return out;
}

struct VelocityFit {
  double slope = 0, stderr_slope = 0, intercept = 0;
  double residual_ratio = 0;  // max |residual| over the range of positions
};

inline VelocityFit extract_velocity(const std::vector<TrackPoint>& track) {
  const size_t n = track.size();
  if (n < 3) throw ConvergenceError("velocity fit needs at least 3 points");
  double mt = 0, mr = 0;
  for (const auto& p : track) {
    mt += p.t;
    mr += p.r_peak;
  }
  mt /= n;
  mr /= n;
  double stt = 0, str = 0;
  for (const auto& p : track) {
    stt += (p.t - mt) * (p.t - mt);
    str += (p.t - mt) * (p.r_peak - mr);
  }
  VelocityFit f;
  f.slope = str / stt;
  f.intercept = mr - f.slope * mt;
  double sse = 0, rmax = 0, lo = track[0].r_peak, hi = lo;
  for (const auto& p : track) {
    const double e = p.r_peak - f.intercept - f.slope * p.t;
    sse += e * e;
    rmax = std::max(rmax, std::abs(e));
    lo = std::min(lo, p.r_peak);
    hi = std::max(hi, p.r_peak);
  }
  f.stderr_slope = std::sqrt(sse / (n - 2) / stt);
  f.residual_ratio = hi > lo ? rmax / (hi - lo) : 0.0;
  if (f.residual_ratio > 0.1) warn("peak track is not linear: residual " + std::to_string(f.residual_ratio));
  return f;
}

struct PeakMetric {
  int maxima = 0;
  std::vector<double> positions;  // relative coordinate of each significant maximum
  double dip_ratio = 1;           // marginal at r = 0 over its maximum
  double top_position = 0;        // relative coordinate of the global maximum
  std::vector<double> r, marginal;
};

// Relative-coordinate marginal of |EE|^2 over |r| <= r_window (0 keeps the whole band) and its
// significant interior local maxima (> 10% of the peak).
inline PeakMetric detect_double_peak(const EeSnapshot& s, double r_window = 0) {
  PeakMetric m;
  for (int j = s.jmin; j <= s.jmax(); ++j) {
    const int jr = s.periodic && j > s.n / 2 ? j - s.n : j;
    if (r_window > 0 && std::abs(jr) * s.h > r_window) continue;
    double acc = 0;
    for (int i = 0; i < s.n; ++i)
      if (s.inside(i, j)) acc += double(s.at(i, j)) * s.at(i, j);
    m.r.push_back(jr * s.h);
    m.marginal.push_back(acc * s.h);
  }
  if (m.r.empty()) throw ConfigError("peak window holds no grid rows");
  if (s.periodic) {
    std::vector<size_t> order(m.r.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return m.r[a] < m.r[b]; });
    std::vector<double> r2, p2;
    for (size_t k : order) {
      r2.push_back(m.r[k]);
      p2.push_back(m.marginal[k]);
    }
    m.r = r2;
    m.marginal = p2;
  }
  const double top = *std::max_element(m.marginal.begin(), m.marginal.end());
  if (!(top > 0)) return m;
  const auto& y = m.marginal;
  m.top_position = m.r[std::max_element(y.begin(), y.end()) - y.begin()];
  for (size_t k = 1; k + 1 < y.size(); ++k) {
    if (y[k] > y[k - 1] && y[k] >= y[k + 1] && y[k] > 0.1 * top) {
      ++m.maxima;
      m.positions.push_back(m.r[k]);
    }
  }
  const size_t k0 = std::min_element(m.r.begin(), m.r.end(), [](double a, double b) {
                      return std::abs(a) < std::abs(b);
                    }) - m.r.begin();
  m.dip_ratio = y[k0] / top;
  return m;
}

}  // namespace pol
