#include "ceq/fit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace ceq {

namespace {

struct Harmonic {
  double c0, c1, c2, sse;
};

// Linear least squares on [1, cos wt, sin wt].
Harmonic harmonic_lsq(const RVector& t, const RVector& p, double w) {
  RMatrix a(t.size(), 3);
  a.col(0).setOnes();
  a.col(1) = (w * t.array()).cos().matrix();
  a.col(2) = (w * t.array()).sin().matrix();
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(p);
  const double sse = (a * c - p).squaredNorm();
  return {c(0), c(1), c(2), sse};
}

}  // namespace

FloppingFit fit_flopping(const std::vector<double>& tv, const std::vector<double>& pv,
                         const FloppingFitOptions& options) {
  const Index n = static_cast<Index>(tv.size());
  if (n < 16 || pv.size() != tv.size()) throw ValidationError("fit_flopping: need at least 16 matching samples");
  const RVector t = Eigen::Map<const RVector>(tv.data(), n);
  const RVector p = Eigen::Map<const RVector>(pv.data(), n);
  const double span = t(n - 1) - t(0);
  if (!(span > 0.0)) throw ValidationError("fit_flopping: times must increase");

  FloppingFit out;
  const double mean = p.mean();
  const double range = p.maxCoeff() - p.minCoeff();
  if (range < options.min_contrast) {
    out.amplitude = range;
    out.offset = mean;
    out.residual = std::sqrt((p.array() - mean).square().mean());
    return out;
  }

  // periodogram seed, zero padded 8x
  const Index padded = 8 * n;
  std::vector<double> buf(static_cast<std::size_t>(padded), 0.0);
  for (Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(i)] = p(i) - mean;
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, buf);
  const double dt = span / static_cast<double>(n - 1);
  Index best = 1;
  for (Index k = 1; k < padded / 2; ++k)
    if (std::abs(spec[static_cast<std::size_t>(k)]) > std::abs(spec[static_cast<std::size_t>(best)])) best = k;
  const double bin = kTwoPi / (static_cast<double>(padded) * dt);
  const double seed = bin * static_cast<double>(best);

  const double lo = std::max(seed - 2.0 * bin, 0.25 * seed);
  const double hi = seed + 2.0 * bin;
  const double w = golden_minimize([&](double x) { return harmonic_lsq(t, p, x).sse; }, lo, hi, 1e-10 * hi);
  const Harmonic h = harmonic_lsq(t, p, w);

  // c0 + c1 cos + c2 sin = B + A/2 - (A/2) cos(wt + 2 phase)
  const double half = std::hypot(h.c1, h.c2);
  out.omega = w;
  out.amplitude = 2.0 * half;
  out.offset = h.c0 - half;
  out.phase = 0.5 * std::atan2(h.c2, -h.c1);
  out.residual = std::sqrt(h.sse / static_cast<double>(n));
  out.oscillating = true;

  const double periods = w * span / kTwoPi;
  if (periods < options.min_periods) {
    std::ostringstream msg;
    msg << "fit_flopping: only " << periods << " periods in the trace";
    throw FitError(msg.str(), tv, pv);
  }
  if (out.residual > options.max_residual) {
    std::ostringstream msg;
    msg << "fit_flopping: residual " << out.residual << " above " << options.max_residual;
    throw FitError(msg.str(), tv, pv);
  }
  return out;
}

LineFit fit_line(const std::vector<double>& xv, const std::vector<double>& yv) {
  const Index n = static_cast<Index>(xv.size());
  if (n < 2 || yv.size() != xv.size()) throw ValidationError("fit_line: need at least two matching points");
  const RVector x = Eigen::Map<const RVector>(xv.data(), n);
  const RVector y = Eigen::Map<const RVector>(yv.data(), n);
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double syy = (y.array() - my).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  if (!(sxx > 0.0)) throw ValidationError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  if (n > 2) {
    const double sse = ((y.array() - f.intercept - f.slope * x.array()).square()).sum();
    f.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

}  // namespace ceq
