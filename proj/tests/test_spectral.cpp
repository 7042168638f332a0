#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <polariton/spectral.hpp>

using namespace pol;

namespace {

const PolaritonParams& medium() {
  static const auto p = params_from_groups(40, 0.01, 0.05);
  return p;
}

std::vector<double> grid(const PolaritonParams& p, double lo, double hi, int n) {
  std::vector<double> w;
  for (int i = 0; i < n; ++i) w.push_back(p.omega_from_bar(lo + (hi - lo) * i / (n - 1)));
  return w;
}

}  // namespace

TEST(Quadrature, PrincipalValue) {
  auto one = [](double) { return 1.0; };
  EXPECT_NEAR(detail::principal_value(one, 0, 1, 0.3, {}, 0.05), std::log(0.7 / 0.3), 1e-12);
  auto lin = [](double r) { return r; };
  EXPECT_NEAR(detail::principal_value(lin, 0, 1, 0.3, {}, 0.05), 1 + 0.3 * std::log(0.7 / 0.3), 1e-12);
}

TEST(Quadrature, GradedPanels) {
  EXPECT_NEAR(detail::integrate([](double x) { return std::sqrt(x); }, 0, 1, 0.1), 2.0 / 3, 1e-11);
  EXPECT_NEAR(detail::integrate([](double x) { return 1 / std::sqrt(x); }, 0, 1, 0.1), 2.0, 1e-5);
  EXPECT_NEAR(detail::integrate_split([](double x) { return std::abs(x - 0.4); }, 0, 1, {0.4}, 0.1), 0.26, 1e-14);
}

TEST(Spectral, FwhmOfSampledGaussian) {
  std::vector<double> x, y;
  for (int i = -200; i <= 200; ++i) {
    x.push_back(i * 0.01);
    y.push_back(std::exp(-x.back() * x.back() / (2 * 0.3 * 0.3)));
  }
  EXPECT_NEAR(fwhm_at(x, y, 200), 2 * std::sqrt(2 * std::log(2.0)) * 0.3, 1e-4);
  y.back() = 0.9;
  EXPECT_TRUE(std::isinf(fwhm_at(x, y, y.size() - 1)));
}

TEST(Spectral, EnergyNormalization) {
  const auto& p = medium();
  const double K = p.k_from_bar(0.95);
  for (double wb : {-0.6, -0.2}) {
    auto e = make_eigenstate(p, p.omega_from_bar(wb), K);
    energy_normalize(e);
    EXPECT_NEAR(delta_coefficient(e), 1.0, 1e-12);
    EXPECT_NEAR(e.pole_residue(), -alpha_prefactor(p, e.sol.prob) * e.sol.c2 * e.norm, 1e-12);
  }
}

// Distinct-omega eigenstates are orthogonal only when alpha keeps its i pi c2 part.
TEST(Spectral, OrthogonalityNeedsImaginaryAlpha) {
  const auto& p = medium();
  const double K = p.k_from_bar(0.95);
  const auto w = grid(p, -0.62, -0.58, 6);
  const auto good = orthogonality_check(build_eigenbasis(p, K, w), 2);
  const auto bad = orthogonality_check(build_eigenbasis(p, K, w, {}, false), 2);
  EXPECT_LT(good.max_leakage, 1e-8);
  EXPECT_GT(bad.max_leakage, 1e-3);
}

TEST(Spectral, CoulombStateIsUnitNormalized) {
  const auto& p = medium();
  const auto c = make_coulomb_state(p, p.k_from_bar(0.95), 3);
  const double a = c.e.rb();
  auto f = [&](double r) {
    const double ee = c.e.coeffs.sigma_ee * c.psi(r), esm = c.e.coeffs.es_minus * c.dpsi(r), ss = c.ss(r);
    return ee * ee + 2 * (c.psi(r) * c.psi(r) + esm * esm) + ss * ss;
  };
  EXPECT_NEAR(detail::integrate(f, 0, a, 1e-3), 1.0, 1e-8);
  EXPECT_EQ(c.psi(1.01 * a), 0.0);
  EXPECT_EQ(c.ss(1.01 * a), 0.0);
}

TEST(Spectral, HellmannFeynmanNonNegative) {
  const auto& p = medium();
  const double K = p.k_from_bar(0.95);
  const auto b = build_eigenbasis(p, K, grid(p, -0.9, 0.5, 8));
  for (const auto& e : b.states) {
    const double v = hf_group_velocity(p, e);
    EXPECT_GE(v, -1e-10 * p.c);
    EXPECT_LE(v, p.c);
  }
  const auto c = make_coulomb_state(p, K, 2);
  EXPECT_GT(hf_group_velocity(p, c), 0);
}

TEST(Spectral, DecompositionPeaksAtBranch) {
  const auto& p = medium();
  const auto r = decomposition_report(p, p.k_from_bar(0.95), 4, {}, 20, 0.5);
  EXPECT_LE(std::abs(r.peak_omega - r.omega_n), r.d_omega);
  EXPECT_NEAR(r.d_omega * 20, r.spacing, 1e-12 * r.spacing);
  double sum = 0;
  for (double v : r.density.density) sum += v * r.d_omega;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}
