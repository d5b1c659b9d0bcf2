#pragma once

#include <functional>
#include <vector>

namespace mare {

/// Gauss-Legendre rule on [-1, 1]; nodes/weights built by Newton iteration on
/// the Legendre recurrence (no tabulated constants).
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

GaussRule gauss_legendre(int points);

/// Fixed-order Gauss integral of f over [a, b].
double integrate_gauss(const GaussRule& rule, const std::function<double(double)>& f,
                       double a, double b);

/// Adaptive Simpson with Richardson acceptance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol = 1e-13, double abs_tol = 0.0, int max_depth = 48);

/// Least-squares line fit y ~ intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace mare
