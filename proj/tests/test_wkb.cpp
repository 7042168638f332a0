#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <polariton/wkb.hpp>

using namespace pol;

namespace {

double sum_powers(double x, double y) {  // (x^6 - y^6) / (x - y)
  double s = 0;
  for (int k = 0; k < 6; ++k) s += std::pow(x, k) * std::pow(y, 5 - k);
  return s;
}

// Direct tanh-sinh quadrature of int_a^1 sqrt(1/(1-x^6) + eps) dx, with both endpoint
// factors taken from the quadrature's complement argument.
double phase_oracle(double eps, double a = 0) {
  const double x0 = eps < -1 ? std::pow(1 + 1 / eps, 1.0 / 6.0) : 0.0;
  a = std::max(a, x0);
  const double mid = 0.5 * (a + 1);
  auto f = [&](double x, double xc) {
    const double to_edge = x > mid ? std::abs(xc) : 1 - x;
    const double from_a = x > mid ? x - a : std::abs(xc);
    const double num = (x0 > 0 && a == x0) ? -eps * from_a * sum_powers(x, x0) : 1 + eps - eps * std::pow(x, 6);
    return std::sqrt(std::max(0.0, num / (to_edge * sum_powers(x, 1.0))));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, 1.0, 1e-14);
}

}  // namespace

TEST(Wkb, ClosedFormConstant) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [](double x, double xc) {
    const double to_edge = x > 0.5 ? xc : 1 - x;
    return x * x * x / std::sqrt(to_edge * sum_powers(x, 1.0));
  };
  const double A = std::pow(ts.integrate(f, 0.0, 1.0, 1e-14) / std::numbers::pi, 2);
  EXPECT_NEAR(closed_form_constant(), A, 1e-14);
  EXPECT_NEAR(closed_form_constant(), 0.0188376791326425214, 1e-15);
}

TEST(Wkb, PhaseIntegralMatchesQuadrature) {
  for (double eps : {-0.2, -0.6, -0.95, -1.05, -1.5, -3.0})
    EXPECT_NEAR(wkb_integral_x(eps), phase_oracle(eps), 1e-11) << eps;
  // 30-digit references
  EXPECT_NEAR(wkb_integral_x(-1.05), 0.376175079907967975, 1e-13);
  EXPECT_NEAR(wkb_partial_x(-2.0, 0.5 * (1 + std::pow(0.5, 1.0 / 6.0))), 0.172840838560047466, 1e-13);
}

TEST(Wkb, PartialIntegralIsAdditive) {
  for (double eps : {-0.5, -2.0}) {
    const double x = 0.5 * (1 + turning_point(eps));
    EXPECT_NEAR(wkb_partial_x(eps, x), phase_oracle(eps, x), 1e-11);
    EXPECT_NEAR(wkb_partial_x(eps, 0.0), wkb_integral_x(eps), 1e-15);
  }
}

TEST(Wkb, LightLineLimitGivesConstant) {
  EXPECT_NEAR(wkb_integral_x(-1 - 1e-8) / (std::numbers::pi * std::sqrt(closed_form_constant())), 1.0, 1e-4);
}

TEST(Wkb, TurningPoint) {
  EXPECT_EQ(turning_point(-0.5), 0.0);
  EXPECT_NEAR(std::pow(turning_point(-2.0), 6), 0.5, 1e-14);
  EXPECT_NEAR(wkb_target(3, WkbVariant::turning_point), 3 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(wkb_target(3, WkbVariant::no_turning_point), 2.75 * std::numbers::pi, 1e-15);
}

TEST(Wkb, PhaseDecreasesTowardLightLine) {
  const auto p = params_from_groups(40, 0.05, 0.05);
  double prev = std::numeric_limits<double>::infinity();
  for (double kb : {0.9, 0.95, 0.98, 0.995}) {
    const double ph = quantization_integral(p, 0.0, p.k_from_bar(kb));
    EXPECT_LT(ph, prev);
    prev = ph;
  }
}

TEST(Wkb, DispersionSatisfiesQuantization) {
  const auto p = params_from_groups(40, 0.05, 0.05);
  for (int n = 1; n <= 4; ++n) {
    const auto s = wkb_dispersion(p, p.k_from_bar(0.98), n);
    EXPECT_NEAR(s.phase_integral, wkb_target(n, s.variant), 1e-8);
    const auto q = effective_mass_energy(p, s.omega, s.bigK);
    EXPECT_LT(q.eps_energy, 0);
  }
  EXPECT_THROW(wkb_dispersion(p, p.k_from_bar(0.98), 0), DomainError);
}

TEST(Wkb, MomentumInvertsDispersion) {
  const auto p = params_from_groups(40, 0.05, 0.25);
  for (int n = 1; n <= 3; ++n) {
    const double K = p.k_from_bar(0.96);
    const auto s = wkb_dispersion(p, K, n);
    EXPECT_NEAR(p.k_bar(wkb_momentum(p, s.omega, n)), 0.96, 1e-8) << n;
  }
}

TEST(Wkb, ClosedFormSolvesItsEquation) {
  const auto p = params_from_groups(40, 0.05, 0.05);
  const double A = closed_form_constant();
  for (int n = 1; n <= 4; ++n) {
    const double kb = 0.99, y = 1 + p.omega_bar(closed_form_omega(p, p.k_from_bar(kb), n));
    EXPECT_NEAR(y / (1 - kb), A * 1600 * std::pow(y, -1.0 / 3.0) / (n * n), 1e-9 * y / (1 - kb));
  }
}

TEST(Wkb, ClosedFormApproachesWkbNearLightLine) {
  const auto p = params_from_groups(40, 0.01, 0.05);
  for (int n = 2; n <= 4; ++n) {
    const double K = p.k_from_bar(0.995);
    const double ww = 1 + p.omega_bar(wkb_dispersion(p, K, n).omega);
    const double wc = 1 + p.omega_bar(closed_form_omega(p, K, n));
    EXPECT_NEAR(wc / ww, 1.0, 0.05) << n;
  }
}

// The closed-form velocity is the exact K-derivative of the closed-form branch.
TEST(Wkb, GroupVelocityIsClosedFormSlope) {
  const auto p = params_from_groups(40, 0.05, 0.05);
  for (int n = 1; n <= 3; ++n) {
    const double K = p.k_from_bar(0.99), dK = p.k_from_bar(1e-6);
    const double w = closed_form_omega(p, K, n);
    const double fd = (closed_form_omega(p, K + dK, n) - closed_form_omega(p, K - dK, n)) / (2 * dK);
    EXPECT_NEAR(wkb_group_velocity(p, w, n) / fd, 1.0, 1e-5) << n;
    EXPECT_LT(wkb_group_velocity(p, w, n), 0);
  }
}

TEST(Wkb, BranchVelocityMatchesDispersionSlope) {
  const auto p = params_from_groups(40, 0.05, 0.25);
  const double K = p.k_from_bar(0.95), dK = p.k_from_bar(1e-4);
  const int n = 2;
  const double w = wkb_dispersion(p, K, n).omega;
  const double fd = (wkb_dispersion(p, K + dK, n).omega - wkb_dispersion(p, K - dK, n).omega) / (2 * dK);
  EXPECT_NEAR(wkb_branch_velocity(p, w, n) / fd, 1.0, 1e-3);
  EXPECT_LT(fd, 0);
}
