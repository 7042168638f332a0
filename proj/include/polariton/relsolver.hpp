#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "edge_series.hpp"
#include "model.hpp"

namespace pol {

struct SolverOptions {
  double step_scale = 1.0;  // < 1 refines the integration grid
  int series_terms = 80;
  double r_max_factor = 3.0;  // minimum exterior extent in units of r_b
  double decay_length = 25.0; // exterior extends at least this many decay lengths
  double delta_in = 0;        // matching window |x-1| in [delta_in, delta_out]; 0 = default
  double delta_out = 0;
  double fit_tol = 1e-4;
};

// psi'' = Q(x) psi in x = r / r_b(omega), with Q = lambda2 (1/(x^6-1) - E/w).
inline double coulomb_q(const EffectiveProblem& q, double x) {
  const double t = x - 1;
  const double p = 6 + t * (15 + t * (20 + t * (15 + t * (6 + t))));
  return q.lambda2 * (1 / (t * p) - q.eps_energy);
}

// Classical RK4 for psi'' = Q psi on a uniform grid. Returns psi and psi' at every node.
inline void rk4_linear(const std::function<double(double)>& Q, double x0, double h, int nsteps,
                       double psi0, double dpsi0, std::vector<double>& psi, std::vector<double>& dpsi) {
  psi.resize(nsteps + 1);
  dpsi.resize(nsteps + 1);
  double y = psi0, v = dpsi0;
  psi[0] = y;
  dpsi[0] = v;
  for (int i = 0; i < nsteps; ++i) {
    const double x = x0 + i * h;
    const double qa = Q(x), qm = Q(x + h / 2), qb = Q(x + h);
    const double k1y = v, k1v = qa * y;
    const double k2y = v + h / 2 * k1v, k2v = qm * (y + h / 2 * k1y);
    const double k3y = v + h / 2 * k2v, k3v = qm * (y + h / 2 * k2y);
    const double k4y = v + h * k3v, k4v = qb * (y + h * k3y);
    y += h / 6 * (k1y + 2 * k2y + 2 * k3y + k4y);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    psi[i + 1] = y;
    dpsi[i + 1] = v;
  }
}

inline std::pair<double, double> hermite(const std::vector<double>& f, const std::vector<double>& df, double x0,
                                         double h, double x) {
  const int n = static_cast<int>(f.size()) - 1;
  int i = static_cast<int>(std::floor((x - x0) / h));
  i = std::clamp(i, 0, n - 1);
  const double s = (x - x0 - i * h) / h;
  const double y0 = f[i], y1 = f[i + 1], m0 = df[i] * h, m1 = df[i + 1] * h;
  const double s2 = s * s, s3 = s2 * s;
  const double v = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
  const double d = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1) / h;
  return {v, d};
}

// Solution of the relative problem at one (omega, K), normalized to psi(0) = 1.
// Interior:  psi = A psi_a + B psi_s,  exterior: psi = B (psi_s + beta psi_a).
// c2 = B multiplies the singular branch, c1 = B beta - A is the derivative jump.
struct RelativeSolution {
  EffectiveProblem prob;
  EdgeSeries series;
  double delta_in = 0, delta_out = 0;
  double h_in = 0, h_out = 0, x_out0 = 0, x_max = 0;
  std::vector<double> psi_in, dpsi_in, psi_out, dpsi_out;
  double A = 0, B = 0, beta = 0;
  double c1 = 0, c2 = 0;
  double fit_residual_in = 0, fit_residual_out = 0;
  bool drop_singular = false;  // evaluate the interior as A psi_a only

  double x_in_end() const { return 1 - delta_in; }

  std::pair<double, double> eval(double x) const {
    const double t = x - 1;
    if (std::abs(t) < delta_out) {
      if (t == 0) return {drop_singular ? 0.0 : B / series.u2(), 0.0};
      auto [pa, da] = series.regular(t);
      if (t < 0 && drop_singular) return {A * pa, A * da};
      auto [ps, ds] = series.singular(t);
      if (t < 0) return {A * pa + B * ps, A * da + B * ds};
      return {B * (ps + beta * pa), B * (ds + beta * da)};
    }
    if (t < 0) return hermite(psi_in, dpsi_in, 0.0, h_in, x);
    if (x >= x_max) return {0.0, 0.0};
    return hermite(psi_out, dpsi_out, x_out0, h_out, x);
  }
  double value(double x) const { return eval(x).first; }
  double deriv(double x) const { return eval(x).second; }
  double edge_value() const { return B / series.u2(); }  // psi(1) = c2 / U^2

  int interior_nodes() const {
    int n = 0;
    for (size_t i = 1; i < psi_in.size(); ++i)
      if ((psi_in[i - 1] > 0) != (psi_in[i] > 0)) ++n;
    return n;
  }
};

namespace detail {

// Least-squares fit of samples to c_s * f_s + c_a * f_a; returns (c_s, c_a, relative residual).
inline std::tuple<double, double, double> fit_two(const std::vector<double>& y, const std::vector<double>& fs,
                                                  const std::vector<double>& fa) {
  double ss = 0, sa = 0, aa = 0, ys = 0, ya = 0, yy = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    ss += fs[i] * fs[i];
    sa += fs[i] * fa[i];
    aa += fa[i] * fa[i];
    ys += y[i] * fs[i];
    ya += y[i] * fa[i];
    yy += y[i] * y[i];
  }
  const double det = ss * aa - sa * sa;
  if (!(std::abs(det) > 1e-300)) throw ConvergenceError("singular matching fit");
  const double cs = (ys * aa - ya * sa) / det, ca = (ya * ss - ys * sa) / det;
  double res = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - cs * fs[i] - ca * fa[i];
    res += r * r;
  }
  return {cs, ca, std::sqrt(res / std::max(yy, 1e-300))};
}

}  // namespace detail

inline RelativeSolution solve_relative(const PolaritonParams& p, double omega, double bigK,
                                       const SolverOptions& opt = {}) {
  RelativeSolution s;
  s.prob = effective_mass_energy(p, omega, bigK);
  const auto& q = s.prob;
  if (!(q.eps_energy < 0)) throw DomainError("E >= 0: exterior solution does not decay");
  s.series = EdgeSeries(q.lambda2, q.eps_energy, opt.series_terms);
  const double u2 = s.series.u2();
  s.delta_out = opt.delta_out > 0 ? opt.delta_out : std::min(0.1, 10 / u2);
  s.delta_in = opt.delta_in > 0 ? opt.delta_in : std::min(0.5 / u2, s.delta_out / 4);
  if (!(s.delta_in < s.delta_out)) throw ConfigError("matching window is empty");

  // >= 50 nodes across the inner edge of the window, >= 20 per pi of bulk WKB phase
  const double pbulk = std::sqrt(q.lambda2 * (std::abs(q.eps_energy) + 1.0));
  double h = std::min({s.delta_in / 50, std::numbers::pi / (20 * pbulk), 1e-3}) * opt.step_scale;

  auto Q = [&q](double x) { return coulomb_q(q, x); };

  const double xin = 1 - s.delta_in;
  const int nin = std::max(8, static_cast<int>(std::ceil(xin / h)));
  s.h_in = xin / nin;
  rk4_linear(Q, 0.0, s.h_in, nin, 1.0, 0.0, s.psi_in, s.dpsi_in);

  const double kappa = std::sqrt(-q.lambda2 * q.eps_energy);
  s.x_out0 = 1 + s.delta_in;
  // keep the inward growth of the decaying solution within double range
  s.x_max = 1 + std::max(opt.decay_length / kappa, std::min(opt.r_max_factor - 1, 300 / kappa));
  const int nout = std::max(8, static_cast<int>(std::ceil((s.x_max - s.x_out0) / h)));
  s.h_out = (s.x_max - s.x_out0) / nout;
  s.x_max = s.x_out0 + nout * s.h_out;
  {
    std::vector<double> y, dy;
    const double qinf = std::max(Q(s.x_max), 0.0);
    rk4_linear(Q, s.x_max, -s.h_out, nout, 1.0, -std::sqrt(qinf), y, dy);
    std::reverse(y.begin(), y.end());
    std::reverse(dy.begin(), dy.end());
    s.psi_out = std::move(y);
    s.dpsi_out = std::move(dy);
  }

  std::vector<double> yi, fsi, fai, yo, fso, fao;
  for (int i = 0; i <= nin; ++i) {
    const double t = i * s.h_in - 1;
    if (-t >= s.delta_in * (1 - 1e-12) && -t <= s.delta_out) {
      yi.push_back(s.psi_in[i]);
      fsi.push_back(s.series.singular(t).first);
      fai.push_back(s.series.regular(t).first);
    }
  }
  for (int i = 0; i <= nout; ++i) {
    const double t = s.x_out0 + i * s.h_out - 1;
    if (t >= s.delta_in * (1 - 1e-12) && t <= s.delta_out) {
      yo.push_back(s.psi_out[i]);
      fso.push_back(s.series.singular(t).first);
      fao.push_back(s.series.regular(t).first);
    }
  }
  if (yi.size() < 3 || yo.size() < 3) throw ConvergenceError("matching window holds too few grid points");
  auto [bi, ai, ri] = detail::fit_two(yi, fsi, fai);
  auto [ps, pa, ro] = detail::fit_two(yo, fso, fao);
  s.fit_residual_in = ri;
  s.fit_residual_out = ro;
  if (ri > opt.fit_tol || ro > opt.fit_tol)
    throw ConvergenceError("matching-window residual " + std::to_string(std::max(ri, ro)) + " exceeds tolerance");
  s.A = ai;
  s.B = bi;
  s.beta = pa / ps;
  const double scale = bi / ps;
  for (auto& v : s.psi_out) v *= scale;
  for (auto& v : s.dpsi_out) v *= scale;
  s.c2 = s.B;
  s.c1 = s.B * s.beta - s.A;
  if (s.c1 == 0 && s.c2 == 0) throw ConvergenceError("trivial solution");
  return s;
}

// Connection data in physical units.
struct Connection {
  double c1 = 0, c2 = 0;
  cplx alpha;           // -(kappa)(c1 - i pi c2)
  cplx alpha_p;         // total delta weight when SS is written with a principal value
  double pole_residue = 0;  // s in SS ~ s/(r - r_b) near the pole
};

inline double alpha_prefactor(const PolaritonParams& p, const EffectiveProblem& q) {
  const double d1 = denom_es(p, q.omega, q.bigK);
  return p.delta * p.c * p.c / (p.g * p.omega_c * q.rb * d1);
}

inline Connection connection(const PolaritonParams& p, const RelativeSolution& s, bool include_imaginary = true) {
  Connection c;
  c.c1 = s.c1;
  c.c2 = s.c2;
  const double k = alpha_prefactor(p, s.prob);
  c.alpha = -k * cplx(s.c1, include_imaginary ? -std::numbers::pi * s.c2 : 0.0);
  c.pole_residue = -k * s.c2;
  // SS = sigma psi/(w - V - i0) + alpha delta  ==  sigma P[psi/(w - V)] + (alpha + i pi s) delta
  c.alpha_p = c.alpha + cplx(0, std::numbers::pi * c.pole_residue);
  return c;
}

// Coupling constants for reconstructing EE, ES-, SS from psi = ES+.
struct ComponentCoeffs {
  double sigma_ee = 0;   // EE = sigma_ee psi
  double es_minus = 0;   // ES- = -i es_minus dpsi/dr
  double sigma_ss = 0;   // SS_regular = sigma_ss psi / (w - V)
  double w = 0;
};

inline ComponentCoeffs component_coeffs(const PolaritonParams& p, double omega, double bigK) {
  ComponentCoeffs k;
  k.sigma_ss = -2 * p.g * p.omega_c / p.delta;
  k.sigma_ee = k.sigma_ss / denom_ee(p, omega, bigK);
  k.es_minus = p.c / denom_es(p, omega, bigK);
  k.w = p.light_shift() + omega;
  return k;
}

struct RelativeEigenstate {
  double omega = 0, bigK = 0;
  RelativeSolution sol;
  Connection conn;
  ComponentCoeffs coeffs;
  double norm = 1;  // multiplies psi

  double rb() const { return sol.prob.rb; }
  double psi(double r) const { return norm * sol.value(r / rb()); }
  double dpsi(double r) const { return norm * sol.deriv(r / rb()) / rb(); }
  double ee(double r) const { return coeffs.sigma_ee * psi(r); }
  cplx es_minus(double r) const { return cplx(0, -coeffs.es_minus * dpsi(r)); }
  // 1/(w - V(r)) with the r^6 - r_b^6 cancellation done analytically
  double inv_w_minus_v(double r) const {
    const double x = r / rb(), t = x - 1;
    const double x6 = std::pow(x, 6);
    return x6 / (coeffs.w * t * (6 + t * (15 + t * (20 + t * (15 + t * (6 + t))))));
  }
  double ss_regular(double r) const { return coeffs.sigma_ss * psi(r) * inv_w_minus_v(r); }
  cplx alpha_p() const { return norm * conn.alpha_p; }
  cplx alpha() const { return norm * conn.alpha; }
  double pole_residue() const { return norm * conn.pole_residue; }
};

inline RelativeEigenstate make_eigenstate(const PolaritonParams& p, double omega, double bigK,
                                          const SolverOptions& opt = {}, bool include_imaginary = true) {
  RelativeEigenstate e;
  e.omega = omega;
  e.bigK = bigK;
  e.sol = solve_relative(p, omega, bigK, opt);
  e.conn = connection(p, e.sol, include_imaginary);
  e.coeffs = component_coeffs(p, omega, bigK);
  return e;
}

struct ComponentSamples {
  std::vector<double> r, ee, es_plus, es_minus_im, ss_regular;
};

inline ComponentSamples reconstruct_components(const RelativeEigenstate& e, double r_max, int n) {
  ComponentSamples c;
  for (int i = 0; i < n; ++i) {
    const double r = r_max * i / (n - 1);
    c.r.push_back(r);
    c.ee.push_back(e.ee(r));
    c.es_plus.push_back(e.psi(r));
    c.es_minus_im.push_back(e.es_minus(r).imag());
    const double x = r / e.rb();
    c.ss_regular.push_back(std::abs(x - 1) < 1e-12 ? std::nan("") : e.ss_regular(r));
  }
  return c;
}

}  // namespace pol
