#pragma once

#include <cmath>
#include <vector>

#include "ceq/numerics.hpp"

namespace ceq {

/// p(t) = offset + amplitude * sin^2(omega t / 2 + phase)
struct FloppingFit {
  double omega = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double phase = 0.0;
  double residual = 0.0;  // RMS
  bool oscillating = false;
};

struct FloppingFitOptions {
  double min_contrast = 0.02;  // peak-to-peak below this counts as no oscillation
  double min_periods = 3.0;
  double max_residual = 0.05;
};

/// Least-squares fit of a uniformly sampled population trace. The frequency
/// is seeded from the zero-padded periodogram peak and refined by 1-D
/// minimization of the linear least-squares residual. Throws FitError (with
/// the trace) when fewer than min_periods are covered or the residual is
/// above max_residual.
FloppingFit fit_flopping(const std::vector<double>& t, const std::vector<double>& p,
                         const FloppingFitOptions& options = {});

/// Ordinary least squares y = a + b x; returns (a, b, R^2).
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Golden-section minimization of a unimodal function on [a, b].
template <typename F>
double golden_minimize(F&& f, double a, double b, double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (std::abs(b - a) > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace ceq
