#pragma once
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "relsolver.hpp"
#include "wkb.hpp"

namespace pol {

enum class Method { exact, wkb, closed_form };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::exact: return "exact";
    case Method::wkb: return "wkb";
    case Method::closed_form: return "closed_form";
  }
  return "";
}

struct DispersionSample {
  double bigK = 0, omega = 0;
};

struct DispersionBranch {
  int n = 0;
  Method method = Method::exact;
  std::vector<DispersionSample> samples;
};

struct CoulombRoot {
  double omega = 0;
  RelativeSolution sol;
};

// Coulomb state of branch n at fixed K: root of c2(omega) = 0 whose interior
// wavefunction has n - 1 nodes, searched within +-30% of the WKB seed in 1 + omega_bar.
inline CoulombRoot coulomb_root(const PolaritonParams& p, double bigK, int n, const SolverOptions& opt = {},
                                double seed_omega = std::numeric_limits<double>::quiet_NaN(), int nscan = 48) {
  if (std::isnan(seed_omega)) {
    try {
      seed_omega = wkb_dispersion(p, bigK, n).omega;
    } catch (const ConvergenceError&) {
      seed_omega = closed_form_omega(p, bigK, n);
    }
  }
  const double y0 = 1 + p.omega_bar(seed_omega);
  auto omega_of = [&](double y) { return p.omega_from_bar(y - 1); };
  auto c2 = [&](double y) { return solve_relative(p, omega_of(y), bigK, opt).c2; };

  std::vector<double> ys, fs;
  for (int i = 0; i < nscan; ++i) {
    const double y = y0 * (0.7 + 0.6 * i / (nscan - 1));
    try {
      fs.push_back(c2(y));
      ys.push_back(y);
    } catch (const Error&) {
    }
  }
  CoulombRoot best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < ys.size(); ++i) {
    if ((fs[i - 1] > 0) == (fs[i] > 0)) continue;
    boost::uintmax_t it = 200;
    auto tol = [](double a, double b) { return std::abs(a - b) < 1e-12 * std::abs(a); };
    double y;
    try {
      auto [a, b] = boost::math::tools::toms748_solve(c2, ys[i - 1], ys[i], fs[i - 1], fs[i], tol, it);
      y = 0.5 * (a + b);
    } catch (const std::exception&) {
      continue;
    }
    auto sol = solve_relative(p, omega_of(y), bigK, opt);
    if (sol.interior_nodes() != n - 1) continue;
    if (std::abs(y - y0) < best_dist) {
      best_dist = std::abs(y - y0);
      best.omega = omega_of(y);
      best.sol = std::move(sol);
    }
  }
  if (!std::isfinite(best_dist))
    throw ConvergenceError("no Coulomb root for n=" + std::to_string(n) + " near the WKB seed");
  return best;
}

inline double coulomb_dispersion(const PolaritonParams& p, double bigK, int n, const SolverOptions& opt = {}) {
  return coulomb_root(p, bigK, n, opt).omega;
}

}  // namespace pol
