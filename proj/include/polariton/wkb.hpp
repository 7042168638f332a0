#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "model.hpp"

namespace pol {

// [Gamma(2/3) / (Gamma(1/6) sqrt(pi))]^2
inline double closed_form_constant() {
  const double r = std::tgamma(2.0 / 3.0) / (std::tgamma(1.0 / 6.0) * std::sqrt(std::numbers::pi));
  return r * r;
}

enum class WkbVariant { turning_point, no_turning_point };

struct WkbSolution {
  int n = 0;
  double omega = 0, bigK = 0;
  double phase_integral = 0;
  double r0 = 0;
  WkbVariant variant = WkbVariant::turning_point;
};

inline std::complex<double> local_momentum(const EffectiveProblem& q, const PolaritonParams& p, double r) {
  const std::complex<double> d = q.energy - effective_potential(q, p, r).real();
  return std::sqrt(q.mass * d);
}

// Turning point x0 = r0/r_b of eps + 1/(1-x^6); zero when eps >= -1.
inline double turning_point(double eps) { return eps < -1 ? std::pow(1 + 1 / eps, 1.0 / 6.0) : 0.0; }

namespace detail {

inline double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

// eps + 1/(1-x^6) = ((1+eps) - eps x^6) / (1-x^6); the numerator is formed without cancellation.

// x = 1 - s^2 on s in [0, smax], using 1 - x^6 = s^2 P5(x)
inline double edge_piece(double eps, double smax) {
  auto f = [eps](double s) {
    const double x = 1 - s * s;
    const double p5 = 1 + x * (1 + x * (1 + x * (1 + x * (1 + x))));
    return 2 * std::sqrt(std::max(0.0, ((1 + eps) - eps * std::pow(x, 6)) / p5));
  };
  return gk(f, 0.0, smax);
}

// x = x0 + u^2 on u in [umin, umax], using x^6 - x0^6 = u^2 S(x, x0)
inline double turning_piece(double eps, double x0, double umin, double umax) {
  auto f = [eps, x0](double u) {
    const double x = x0 + u * u;
    double sum = 0;
    for (int k = 0; k <= 5; ++k) sum = sum * x0 + std::pow(x, k);  // x^5 + x^4 x0 + ... + x0^5
    return 2 * u * u * std::sqrt(-eps * sum / (1 - std::pow(x, 6)));
  };
  return gk(f, umin, umax);
}

}  // namespace detail

// Integral of sqrt(eps + 1/(1 - x^6)) from max(x, x0) to 1.
inline double wkb_partial_x(double eps, double x) {
  const double x0 = turning_point(eps);
  x = std::max(x, x0);
  if (x >= 1) return 0.0;
  if (x0 == 0) return detail::edge_piece(eps, std::sqrt(1 - x));
  const double xm = 0.5 * (x0 + 1);
  if (x >= xm) return detail::edge_piece(eps, std::sqrt(1 - x));
  return detail::edge_piece(eps, std::sqrt(1 - xm)) +
         detail::turning_piece(eps, x0, std::sqrt(x - x0), std::sqrt(xm - x0));
}

inline double wkb_integral_x(double eps) { return wkb_partial_x(eps, 0.0); }

// Integral of p dr over the classically allowed interior.
inline double quantization_integral(const EffectiveProblem& q) {
  return std::sqrt(q.lambda2) * wkb_integral_x(q.eps_energy);
}

inline double quantization_integral(const PolaritonParams& p, double omega, double bigK) {
  return quantization_integral(effective_mass_energy(p, omega, bigK));
}

inline double wkb_target(int n, WkbVariant v) {
  return std::numbers::pi * (v == WkbVariant::turning_point ? n : n - 0.25);
}

namespace detail {

struct PhaseEval {
  bool ok = false;
  double phase = 0, target = 0;
  WkbVariant variant = WkbVariant::turning_point;
  double eps = 0;
};

inline PhaseEval phase_eval(const PolaritonParams& p, double omega, double bigK, int n) {
  PhaseEval e;
  try {
    const auto q = effective_mass_energy(p, omega, bigK);
    e.variant = q.eps_energy < -1 ? WkbVariant::turning_point : WkbVariant::no_turning_point;
    e.phase = quantization_integral(q);
    e.target = wkb_target(n, e.variant);
    e.eps = q.eps_energy;
    // bound branches lie below the relative-motion continuum (E < 0)
    e.ok = std::isfinite(e.phase) && q.eps_energy < 0;
  } catch (const Error&) {
    e.ok = false;
  }
  return e;
}

// All roots of phase - target along a 1D parameter path, skipping jumps of the target.
template <class Eval>
std::vector<double> scan_roots(Eval&& eval, double lo, double hi, int npts) {
  std::vector<double> roots;
  std::vector<double> ys(npts);
  std::vector<PhaseEval> es(npts);
  for (int i = 0; i < npts; ++i) {
    ys[i] = lo + (hi - lo) * i / (npts - 1);
    es[i] = eval(ys[i]);
  }
  for (int i = 1; i < npts; ++i) {
    if (!es[i - 1].ok || !es[i].ok) continue;
    const double fa = es[i - 1].phase - es[i - 1].target, fb = es[i].phase - es[i].target;
    if (fa == 0) {
      roots.push_back(ys[i - 1]);
      continue;
    }
    if ((fa > 0) == (fb > 0)) continue;
    auto f = [&](double y) {
      auto e = eval(y);
      if (!e.ok) throw ConvergenceError("phase undefined inside bracket");
      return e.phase - e.target;
    };
    boost::uintmax_t it = 200;
    auto tol = [](double a, double b) { return std::abs(a - b) < 1e-13 * std::max(1.0, std::abs(a)); };
    try {
      auto [a, b] = boost::math::tools::toms748_solve(f, ys[i - 1], ys[i], fa, fb, tol, it);
      const double y = 0.5 * (a + b);
      // a sign change produced by the n -> n - 1/4 switch is a jump, not a root
      if (std::abs(f(y)) < 1e-6) roots.push_back(y);
    } catch (const std::exception&) {
    }
  }
  return roots;
}

}  // namespace detail

// Root in omega of the quantization condition at fixed K.
inline WkbSolution wkb_dispersion(const PolaritonParams& p, double bigK, int n, int npts = 400) {
  if (n < 1) throw DomainError("branch index must be >= 1");
  const double w0 = p.light_shift();
  auto eval = [&](double y) { return detail::phase_eval(p, w0 * (std::exp(y) - 1), bigK, n); };
  auto roots = detail::scan_roots(eval, std::log(1e-5), std::log(50.0), npts);
  if (roots.empty()) throw ConvergenceError("no WKB root for n=" + std::to_string(n) + " at this K");
  const double y = *std::max_element(roots.begin(), roots.end());
  WkbSolution s;
  s.n = n;
  s.bigK = bigK;
  s.omega = w0 * (std::exp(y) - 1);
  const auto q = effective_mass_energy(p, s.omega, bigK);
  s.phase_integral = quantization_integral(q);
  s.variant = q.eps_energy < -1 ? WkbVariant::turning_point : WkbVariant::no_turning_point;
  s.r0 = turning_point(q.eps_energy) * q.rb;
  return s;
}

// Root in K of the quantization condition at fixed omega.
inline double wkb_momentum(const PolaritonParams& p, double omega, int n, int npts = 300) {
  const double od = p.omega_c / p.delta;
  const double lo = std::log(od * od * od * 1.0001), hi = std::log(3.0);
  auto eval = [&](double y) { return detail::phase_eval(p, omega, p.k_from_bar(1 - std::exp(y)), n); };
  auto roots = detail::scan_roots(eval, lo, hi, npts);
  if (roots.empty()) throw ConvergenceError("no WKB momentum for n=" + std::to_string(n) + " at this omega");
  const double y = *std::min_element(roots.begin(), roots.end());
  return p.k_from_bar(1 - std::exp(y));
}

// Closed form (1+w)/(1-K) = A G(w)^2 / n^2 solved by damped fixed-point iteration.
inline double closed_form_omega(const PolaritonParams& p, double bigK, int n, double damping = 0.5,
                                int max_iter = 200) {
  const double a = closed_form_constant(), g0 = p.figure_of_merit(), kb = p.k_bar(bigK);
  double y = 1.0;  // 1 + omega_bar
  for (int i = 0; i < max_iter; ++i) {
    const double next = a * g0 * g0 * std::pow(y, -1.0 / 3.0) * (1 - kb) / (n * n);
    const double upd = (1 - damping) * y + damping * next;
    if (std::abs(upd - y) < 1e-14 * y) return p.omega_from_bar(upd - 1);
    y = upd;
  }
  throw ConvergenceError("closed-form iteration did not converge");
}

// Exact K-derivative of the closed form: -(3/4) A G(omega)^2 v_g / n^2.
inline double wkb_group_velocity(const PolaritonParams& p, double omega, int n) {
  const double G = p.g * p.g * blockade_radius(p, omega) / (p.c * p.delta);
  return -0.75 * closed_form_constant() * G * G * p.vg() / (n * n);
}

// Slope d omega / dK along the full quantization-condition branch through omega.
inline double wkb_branch_velocity(const PolaritonParams& p, double omega, int n, double dw_bar = 1e-3) {
  const double dw = p.omega_from_bar(dw_bar);
  const double kp = wkb_momentum(p, omega + dw, n), km = wkb_momentum(p, omega - dw, n);
  return 2 * dw / (kp - km);
}

}  // namespace pol
