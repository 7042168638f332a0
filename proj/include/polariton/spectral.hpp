#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "dispersion.hpp"
#include "relsolver.hpp"

namespace pol {

namespace detail {

// Composite 8-point Gauss-Legendre with panels no wider than hmax; the two end panels
// are graded geometrically toward the endpoints, where the edge logarithms sit.
inline double integrate(const std::function<double(double)>& f, double a, double b, double hmax) {
  if (!(b > a)) return 0.0;
  using rule = boost::math::quadrature::gauss<double, 8>;
  auto graded = [&](double x0, double x1) {  // panel [x0, x1] refined toward x0
    double acc = 0, outer = x1 - x0;
    for (int k = 0; k < 12; ++k) {
      const double inner = outer / 4;
      acc += rule::integrate(f, std::min(x0 + inner, x0 + outer), std::max(x0 + inner, x0 + outer));
      outer = inner;
    }
    return acc + rule::integrate(f, std::min(x0, x0 + outer), std::max(x0, x0 + outer));
  };
  const int n = std::max(2, static_cast<int>(std::ceil((b - a) / hmax)));
  const double w = (b - a) / n;
  double s = graded(a, a + w) + graded(b, b - w);
  for (int i = 1; i + 1 < n; ++i) s += rule::integrate(f, a + i * w, a + (i + 1) * w);
  return s;
}

// Integral over [lo, hi] split at the sorted interior break points.
inline double integrate_split(const std::function<double(double)>& f, double lo, double hi,
                              std::vector<double> breaks, double hmax) {
  std::sort(breaks.begin(), breaks.end());
  double s = 0, a = lo;
  for (double b : breaks) {
    if (b <= a || b >= hi) continue;
    s += integrate(f, a, b, hmax);
    a = b;
  }
  return s + integrate(f, a, hi, hmax);
}

// Principal value of F(r)/(r - pole) over [lo, hi] with F regular at the pole.
inline double principal_value(const std::function<double(double)>& F, double lo, double hi, double pole,
                              const std::vector<double>& breaks, double hmax) {
  if (pole <= lo || pole >= hi) {
    auto g = [&](double r) { return F(r) / (r - pole); };
    return integrate_split(g, lo, hi, breaks, hmax);
  }
  const double fp = F(pole);
  auto g = [&](double r) { return (F(r) - fp) / (r - pole); };
  auto b = breaks;
  b.push_back(pole);
  return integrate_split(g, lo, hi, b, hmax) + fp * std::log((hi - pole) / (pole - lo));
}

// Quadrature panel width resolving the finer of the two solution grids.
inline double panel_width(const RelativeEigenstate& e) {
  return e.rb() * std::min(e.sol.h_in, e.sol.h_out);
}
inline double panel_width(const RelativeEigenstate& e1, const RelativeEigenstate& e2) {
  return std::min(panel_width(e1), panel_width(e2));
}

inline double pole_poly(double t) { return 6 + t * (15 + t * (20 + t * (15 + t * (6 + t)))); }

// psi / (w - V) = F(r) / (r - r_b) with this F / psi
inline double pole_factor(const RelativeEigenstate& e, double r) {
  const double x = r / e.rb();
  return std::pow(x, 6) * e.rb() / (e.coeffs.w * pole_poly(x - 1));
}

}  // namespace detail

// Coefficient of delta(omega - omega') in <Psi_omega | Psi_omega'>; equals 1 after energy normalization.
inline double delta_coefficient(const RelativeEigenstate& e) {
  const double s = e.pole_residue();
  const double dadw = e.rb() / (6 * e.coeffs.w);
  return (std::numbers::pi * std::numbers::pi * s * s + std::norm(e.alpha_p())) / dadw;
}

inline void energy_normalize(RelativeEigenstate& e) {
  e.norm = 1;
  e.norm = 1 / std::sqrt(delta_coefficient(e));
}

// Finite part of <Psi_1 | Psi_2> for omega_1 != omega_2 at equal K on the half line r >= 0.
inline cplx overlap_offdiag(const RelativeEigenstate& e1, const RelativeEigenstate& e2) {
  const double a1 = e1.rb(), a2 = e2.rb();
  const double rmax = std::min(e1.sol.x_max * a1, e2.sol.x_max * a2);
  const double dw = e1.omega - e2.omega;
  const std::vector<double> br{a1, a2};
  const double kee = e1.coeffs.sigma_ee * e2.coeffs.sigma_ee + 2;
  const double kes = 2 * e1.coeffs.es_minus * e2.coeffs.es_minus;
  auto f1 = [&](double r) { return kee * e1.psi(r) * e2.psi(r) + kes * e1.dpsi(r) * e2.dpsi(r); };
  const double hq = detail::panel_width(e1, e2);
  const double i1 = detail::integrate_split(f1, 0, rmax, br, hq);

  const double sig = e1.coeffs.sigma_ss;
  auto F2 = [&](double r) { return e1.psi(r) * e2.psi(r) * detail::pole_factor(e2, r); };
  auto F1 = [&](double r) { return e1.psi(r) * e2.psi(r) * detail::pole_factor(e1, r); };
  const double pv2 = detail::principal_value(F2, 0, rmax, a2, br, hq);
  const double pv1 = detail::principal_value(F1, 0, rmax, a1, br, hq);
  const double i2 = sig * sig * (pv2 - pv1) / dw;

  const cplx i3 = sig * (e2.alpha_p() * e1.psi(a2) - std::conj(e1.alpha_p()) * e2.psi(a1)) / dw;
  return i1 + i2 + i3;
}

struct Eigenbasis {
  double bigK = 0;
  double d_omega = 0;
  std::vector<double> omegas;
  std::vector<RelativeEigenstate> states;
};

inline Eigenbasis build_eigenbasis(const PolaritonParams& p, double bigK, const std::vector<double>& omegas,
                                   const SolverOptions& opt = {}, bool include_imaginary = true) {
  Eigenbasis b;
  b.bigK = bigK;
  b.omegas = omegas;
  b.d_omega = omegas.size() > 1 ? (omegas.back() - omegas.front()) / (omegas.size() - 1) : 0.0;
  b.states.resize(omegas.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(omegas.size()); ++i) {
    auto e = make_eigenstate(p, omegas[i], bigK, opt, include_imaginary);
    energy_normalize(e);
    b.states[i] = std::move(e);
  }
  return b;
}

struct OrthogonalityReport {
  double max_leakage = 0;  // max |M_ij| / M_ii over checked pairs
  double mean_leakage = 0;
  int pairs = 0;
};

// Discrete overlap matrix M_ij ~ delta_ij / d_omega; leakage compares off-diagonal
// elements within max_offset neighbours against the diagonal 1/d_omega.
inline OrthogonalityReport orthogonality_check(const Eigenbasis& b, int max_offset = 4, int stride = 1) {
  OrthogonalityReport rep;
  const long n = static_cast<long>(b.states.size());
  std::vector<std::pair<long, long>> pairs;
  for (long i = 0; i < n; i += stride)
    for (long k = 1; k <= max_offset && i + k < n; ++k) pairs.emplace_back(i, i + k);
  std::vector<double> leak(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long j = 0; j < static_cast<long>(pairs.size()); ++j)
    leak[j] = std::abs(overlap_offdiag(b.states[pairs[j].first], b.states[pairs[j].second])) * b.d_omega;
  for (double l : leak) {
    rep.max_leakage = std::max(rep.max_leakage, l);
    rep.mean_leakage += l;
  }
  rep.pairs = static_cast<int>(leak.size());
  if (rep.pairs) rep.mean_leakage /= rep.pairs;
  return rep;
}

// Coulomb state of branch n with the delta contribution removed: psi vanishes outside r_b.
struct CoulombState {
  RelativeEigenstate e;
  double norm2 = 0;  // squared L2 norm of all components before normalization

  double ss(double r) const { return r < e.rb() ? e.ss_regular(r) : 0.0; }
  double psi(double r) const { return r < e.rb() ? e.psi(r) : 0.0; }
  double dpsi(double r) const { return r < e.rb() ? e.dpsi(r) : 0.0; }
};

inline CoulombState make_coulomb_state(const PolaritonParams& p, double bigK, int n, const SolverOptions& opt = {}) {
  auto root = coulomb_root(p, bigK, n, opt);
  CoulombState c;
  c.e.omega = root.omega;
  c.e.bigK = bigK;
  c.e.sol = std::move(root.sol);
  c.e.sol.drop_singular = true;
  c.e.conn = connection(p, c.e.sol);
  c.e.coeffs = component_coeffs(p, root.omega, bigK);
  const double a = c.e.rb();
  const double kee = c.e.coeffs.sigma_ee * c.e.coeffs.sigma_ee + 2;
  const double kes = 2 * c.e.coeffs.es_minus * c.e.coeffs.es_minus;
  auto f = [&](double r) {
    const double s = c.ss(r);
    return kee * c.psi(r) * c.psi(r) + kes * c.dpsi(r) * c.dpsi(r) + s * s;
  };
  c.norm2 = detail::integrate(f, 0, a, detail::panel_width(c.e));
  c.e.norm = 1 / std::sqrt(c.norm2);
  return c;
}

// <Psi_omega | Psi^c> for an energy-normalized eigenstate.
inline cplx coulomb_overlap(const RelativeEigenstate& e, const CoulombState& c) {
  const double ac = c.e.rb(), a = e.rb();
  const double kee = e.coeffs.sigma_ee * c.e.coeffs.sigma_ee + 2;
  const double kes = 2 * e.coeffs.es_minus * c.e.coeffs.es_minus;
  auto f1 = [&](double r) { return kee * e.psi(r) * c.psi(r) + kes * e.dpsi(r) * c.dpsi(r); };
  const double hq = detail::panel_width(e, c.e);
  const double i1 = detail::integrate_split(f1, 0, ac, {a}, hq);
  auto F = [&](double r) { return e.psi(r) * c.ss(r) * detail::pole_factor(e, r); };
  const double i2 = e.coeffs.sigma_ss * detail::principal_value(F, 0, ac, a, {}, hq);
  const cplx i3 = a < ac ? std::conj(e.alpha_p()) * c.ss(a) : cplx(0);
  return i1 + i2 + i3;
}

struct SpectralDensity {
  std::vector<double> omegas, density;
};

inline double spectral_density(const PolaritonParams& p, double bigK, double omega, const CoulombState& c,
                               const SolverOptions& opt = {}) {
  auto e = make_eigenstate(p, omega, bigK, opt);
  energy_normalize(e);
  return std::norm(coulomb_overlap(e, c));
}

inline SpectralDensity decompose(const PolaritonParams& p, double bigK, const CoulombState& c,
                                 const std::vector<double>& omegas, const SolverOptions& opt = {}) {
  SpectralDensity d;
  d.omegas = omegas;
  d.density.assign(omegas.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(omegas.size()); ++i)
    d.density[i] = spectral_density(p, bigK, omegas[i], c, opt);
  return d;
}

// Full width at half maximum of the peak at index k, with linear interpolation.
inline double fwhm_at(const std::vector<double>& x, const std::vector<double>& y, size_t k) {
  const double half = 0.5 * y[k];
  size_t l = k, r = k;
  while (l > 0 && y[l] > half) --l;
  while (r + 1 < y.size() && y[r] > half) ++r;
  if (y[l] > half || y[r] > half) return std::numeric_limits<double>::infinity();
  const double xl = x[l] + (half - y[l]) * (x[l + 1] - x[l]) / (y[l + 1] - y[l]);
  const double xr = x[r - 1] + (half - y[r - 1]) * (x[r] - x[r - 1]) / (y[r] - y[r - 1]);
  return xr - xl;
}

struct DecompositionReport {
  int n = 0;
  double omega_n = 0;
  double peak_omega = 0;
  double fwhm = 0;
  double spacing = 0;  // distance to the nearest neighbouring branch at the same K
  double d_omega = 0;
  double total_weight = 0;  // sum(density) * d_omega before normalization
  SpectralDensity density;  // normalized to unit sum * d_omega
};

// Spectral decomposition of the n-th Coulomb state on a grid of spacing/cells, offset by half a
// cell from omega_n, spanning +-window adjacent spacings. Grid points outside the bound domain are skipped.
inline DecompositionReport decomposition_report(const PolaritonParams& p, double bigK, int n,
                                                const SolverOptions& opt = {}, int cells = 100,
                                                double window = 1.0) {
  DecompositionReport rep;
  rep.n = n;
  const auto c = make_coulomb_state(p, bigK, n, opt);
  rep.omega_n = c.e.omega;
  rep.spacing = std::numeric_limits<double>::infinity();
  for (int m : {n - 1, n + 1}) {
    if (m < 1) continue;
    try {
      rep.spacing = std::min(rep.spacing, std::abs(coulomb_dispersion(p, bigK, m, opt) - rep.omega_n));
    } catch (const Error&) {
    }
  }
  if (!std::isfinite(rep.spacing)) throw ConvergenceError("no neighbouring branch to set the spacing");
  rep.d_omega = rep.spacing / cells;
  const int half = static_cast<int>(std::ceil(window * cells));
  std::vector<double> grid;
  for (int k = -half; k < half; ++k) grid.push_back(rep.omega_n + (k + 0.5) * rep.d_omega);

  std::vector<double> rho(grid.size(), std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(grid.size()); ++i) {
    try {
      rho[i] = spectral_density(p, bigK, grid[i], c, opt);
    } catch (const Error&) {
    }
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(rho[i])) continue;
    rep.density.omegas.push_back(grid[i]);
    rep.density.density.push_back(rho[i]);
  }
  if (rep.density.omegas.size() < 3) throw ConvergenceError("decomposition grid lies outside the bound domain");
  for (double v : rep.density.density) rep.total_weight += v * rep.d_omega;
  for (double& v : rep.density.density) v /= rep.total_weight;
  const auto& y = rep.density.density;
  const size_t k = std::max_element(y.begin(), y.end()) - y.begin();
  rep.peak_omega = rep.density.omegas[k];
  rep.fwhm = fwhm_at(rep.density.omegas, y, k);
  return rep;
}

// Hellmann-Feynman velocity <dH/dK> over a relative-coordinate norm that counts the
// delta part through |alpha|^2 and excludes the pole layer |r - r_b| < r_b/U^2 from |SS|^2.
inline double hf_group_velocity(const PolaritonParams& p, const RelativeEigenstate& e) {
  const double a = e.rb();
  const double rmax = e.sol.x_max * a;
  const double eta = a / e.sol.series.u2();
  auto ee2 = [&](double r) { return e.ee(r) * e.ee(r); };
  auto es2 = [&](double r) { return e.psi(r) * e.psi(r) + std::norm(e.es_minus(r)); };
  auto ss2 = [&](double r) {
    const double s = e.ss_regular(r);
    return s * s;
  };
  const double hq = detail::panel_width(e);
  const double nee = detail::integrate_split(ee2, 0, rmax, {a}, hq);
  const double nes = 2 * detail::integrate_split(es2, 0, rmax, {a}, hq);
  const double nss = detail::integrate(ss2, 0, std::max(0.0, a - eta), hq) + detail::integrate(ss2, a + eta, rmax, hq);
  const double norm = nee + nes + nss + std::norm(e.alpha_p());
  return (p.c * nee + 0.5 * p.c * nes) / norm;
}

// Same for the Coulomb state (no delta part, psi confined inside r_b).
inline double hf_group_velocity(const PolaritonParams& p, const CoulombState& c) {
  const double a = c.e.rb();
  auto ee2 = [&](double r) { return std::pow(c.e.coeffs.sigma_ee * c.psi(r), 2); };
  auto es2 = [&](double r) { return c.psi(r) * c.psi(r) + std::pow(c.e.coeffs.es_minus * c.dpsi(r), 2); };
  const double hq = detail::panel_width(c.e);
  const double nee = detail::integrate(ee2, 0, a, hq), nes = 2 * detail::integrate(es2, 0, a, hq);
  return p.c * nee + 0.5 * p.c * nes;  // state is unit normalized
}

}  // namespace pol
