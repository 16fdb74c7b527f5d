#pragma once

// Independent numerical oracles used by the test suites. These never call
// into the solver paths they check.

#include <cmath>
#include <functional>
#include <numbers>

namespace confdr::testing {

/// Adaptive-free composite Simpson on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

inline double sphere_area(int n) {  // area of S^{n-1}
  if (n == 2) return 2.0 * std::numbers::pi;
  if (n == 3) return 4.0 * std::numbers::pi;
  return 0.0;
}

/// Conformal capacity of the round condenser (ball r, ball R) in R^n by
/// 1-D quadrature of the radial extremal u(rho) = log(R/rho)/log(R/r):
/// integral of |u'|^n over the shell. Agrees with the closed form
/// sphere_area(n) * log(R/r)^{1-n}.
inline double radial_capacity_oracle(int n, double r, double R, int panels = 4096) {
  const double logRr = std::log(R / r);
  auto integrand = [&](double rho) {
    const double du = 1.0 / (rho * logRr);
    return std::pow(du, n) * std::pow(rho, n - 1) * sphere_area(n);
  };
  return simpson(integrand, r, R, panels);
}

/// L^n norm of d(log log 1/rho) over the shell [eps, r0] in R^n by 1-D
/// quadrature (the degree-1 torsion probe oracle).
inline double loglog_gradient_norm_oracle(int n, double eps, double r0, int panels = 8192) {
  auto integrand = [&](double t) {
    // substitute rho = exp(t): |du| = 1/(rho log(1/rho)), dvol = rho^{n-1} drho
    const double rho = std::exp(t);
    const double du = 1.0 / (rho * std::log(1.0 / rho));
    return std::pow(du, n) * std::pow(rho, n - 1) * sphere_area(n) * rho;
  };
  const double value = simpson(integrand, std::log(eps), std::log(r0), panels);
  return std::pow(value, 1.0 / n);
}

}  // namespace confdr::testing
