#pragma once
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "errors.hpp"

namespace pol {

using cplx = std::complex<double>;

// Medium constants in hbar = 1 units. All frequencies are angular.
struct PolaritonParams {
  double g = 0;        // collective coupling
  double omega_c = 0;  // control Rabi frequency
  double delta = 0;    // single-photon detuning
  double gamma = 0;    // intermediate-state linewidth
  double gamma_r = 0;  // Rydberg linewidth
  double c6 = 0;       // van der Waals coefficient
  double c = 0;        // photon speed

  void validate() const {
    if (!(delta > 0)) throw ValidityError("detuning must be positive");
    if (!(g > 0) || !(omega_c > 0) || !(c > 0))
      throw ValidityError("g, Omega and c must be positive");
    if (!(c6 * delta > 0)) throw ValidityError("C6*Delta must be positive");
    if (gamma < 0 || gamma_r < 0) throw ValidityError("decay rates must be non-negative");
    const double od = omega_c / delta, og = omega_c / g;
    if (od > 0.5 || og > 0.5) {
      std::ostringstream s;
      s << "Omega/Delta=" << od << ", Omega/g=" << og << " outside adiabatic window (limit 0.5)";
      throw ValidityError(s.str());
    }
    if (od > 0.1) warn("Omega/Delta = " + std::to_string(od) + " exceeds 0.1");
    if (og > 0.1) warn("Omega/g = " + std::to_string(og) + " exceeds 0.1");
  }

  double light_shift() const { return 2 * omega_c * omega_c / delta; }  // 2 Omega^2 / Delta
  double k_unit() const { return 2 * g * g / (c * delta); }             // 2 g^2 / (c Delta)
  double vg() const { return c * omega_c * omega_c / (g * g); }
  double e_ratio() const { return omega_c * omega_c / (g * g); }  // Omega^2 / g^2

  double omega_bar(double omega) const { return omega / light_shift(); }
  double k_bar(double bigK) const { return bigK / k_unit(); }
  double omega_from_bar(double wb) const { return wb * light_shift(); }
  double k_from_bar(double kb) const { return kb * k_unit(); }

  double rb0() const { return std::pow(c6 / light_shift(), 1.0 / 6.0); }
  // g^2 r_b / (c Delta) with r_b taken at omega = 0.
  double figure_of_merit() const { return g * g * rb0() / (c * delta); }
};

// Builds parameters from the dimensionless groups used to specify regimes.
// Delta and r_b(0) set the unit system.
inline PolaritonParams params_from_groups(double fom, double omega_over_g, double omega_over_delta,
                                          double gamma_over_delta = 0, double gamma_r_over_delta = 0,
                                          double delta = 1, double rb = 1) {
  if (!(fom > 0) || !(omega_over_g > 0) || !(omega_over_delta > 0))
    throw ValidityError("dimensionless groups must be positive");
  PolaritonParams p;
  p.delta = delta;
  p.omega_c = omega_over_delta * delta;
  p.g = p.omega_c / omega_over_g;
  p.gamma = gamma_over_delta * delta;
  p.gamma_r = gamma_r_over_delta * delta;
  p.c6 = std::pow(rb, 6) * p.light_shift();
  p.c = p.g * p.g * rb / (fom * delta);
  p.validate();
  return p;
}

inline double blockade_radius(const PolaritonParams& p, double omega) {
  const double w = p.light_shift() + omega;
  if (!(w > 0)) throw DomainError("2 Omega^2/Delta + omega <= 0: no blockade resonance");
  return std::pow(p.c6 / w, 1.0 / 6.0);
}

// Denominators of the EE and ES- elimination.
inline double denom_es(const PolaritonParams& p, double omega, double bigK) {
  return (p.g * p.g + p.omega_c * p.omega_c) / p.delta + omega - p.c * bigK / 2;
}
inline double denom_ee(const PolaritonParams& p, double omega, double bigK) {
  return 2 * p.g * p.g / p.delta + omega - p.c * bigK;
}

struct EffectiveProblem {
  double omega = 0, bigK = 0;
  double omega_bar = 0, k_bar = 0;
  double mass = 0;
  double energy = 0;
  double rb = 0;
  double w = 0;          // 2 Omega^2/Delta + omega, equal to -V_eff(0)
  double u = 0;          // quoted interaction strength
  double u_loc = 0;      // exact coefficient of the 1/(x-1) pole
  double lambda2 = 0;    // m w rb^2
  double eps_energy = 0; // E / w
  double epsilon = 1e-8;
};

inline double energy_bracket(double wb, double kb, double e) {
  return 1 - kb + e * (1 + 2 * wb) - e / (1 - kb + wb * e) - 1 / (1 + wb);
}

inline EffectiveProblem effective_mass_energy(const PolaritonParams& p, double omega, double bigK,
                                              double epsilon = 1e-8) {
  EffectiveProblem q;
  q.omega = omega;
  q.bigK = bigK;
  q.omega_bar = p.omega_bar(omega);
  q.k_bar = p.k_bar(bigK);
  q.epsilon = epsilon;
  const double od = p.omega_c / p.delta;
  if (1 - q.k_bar < od * od * od) {
    std::ostringstream s;
    s << "1 - K_bar = " << 1 - q.k_bar << " below (Omega/Delta)^3 = " << od * od * od;
    throw ValidityError(s.str());
  }
  q.rb = blockade_radius(p, omega);
  q.w = p.light_shift() + omega;
  const double e = p.e_ratio(), wb = q.omega_bar, kb = q.k_bar;
  const double mb = 1 - kb + e * (1 + 2 * wb);
  if (!(mb > 0)) throw ValidityError("effective mass is not positive");
  if (std::abs(1 - kb + wb * e) < 1e-14) throw ValidityError("effective energy has a pole here");
  q.energy = p.light_shift() * (1 + wb) * (1 + wb) * energy_bracket(wb, kb, e);
  q.mass = std::pow(p.g, 4) / (2 * p.omega_c * p.omega_c * p.delta * p.c * p.c) * mb / ((1 + wb) * (1 + wb));
  q.lambda2 = q.mass * q.w * q.rb * q.rb;
  q.u_loc = std::sqrt(q.lambda2 / 6);
  q.eps_energy = q.energy / q.w;
  q.u = p.g * p.g * q.rb / (std::sqrt(6.0) * p.delta * p.c) * std::sqrt((1 - kb) / (1 + wb));
  return q;
}

// C6 / (r^6 - r_b^6 + i eps r_b^6)
inline cplx effective_potential(const EffectiveProblem& q, const PolaritonParams& p, double r) {
  if (r < 0) throw DomainError("negative relative coordinate");
  const double rb6 = std::pow(q.rb, 6);
  return p.c6 / cplx(std::pow(r, 6) - rb6, q.epsilon * rb6);
}

inline bool repulsive_core_predicate(const PolaritonParams& p, double omega, double bigK) {
  const auto q = effective_mass_energy(p, omega, bigK);
  return q.energy + q.w < 0;  // E - V_eff(0) < 0
}

}  // namespace pol
