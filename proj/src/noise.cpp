#include "ceq/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "ceq/fit.hpp"
#include "ceq/seeds.hpp"
#include "ceq/spin.hpp"

namespace ceq {

void NoiseParams::validate() const {
  if (num_spins != 2 && num_spins != 3) throw ValidationError("NoiseParams: L must be 2 or 3");
  if (!(gamma_y_s >= 0.0) || !(gamma_z_s >= 0.0)) throw ValidationError("NoiseParams: rates must be >= 0");
  if (!(t_phi > 0.0)) throw ValidationError("NoiseParams: T_phi must be positive");
  if (!(kt_eff > 0.0)) throw ValidationError("NoiseParams: kT_eff must be positive");
}

double thermal_rate(const NoiseParams& p, const SpinModel& m) {
  p.validate();
  if (!(m.kappa > 0.0)) throw ValidationError("thermal_rate: kappa must be positive");
  const double gap = p.c_L() * m.J;
  return p.num_spins * p.gamma_y_s * gap / (2.0 * m.kappa) * std::exp(-gap / p.kt_eff);
}

LowEnergyRates low_energy_rates(const NoiseParams& p, const SpinModel& m) {
  p.validate();
  if (!(m.kappa > 0.0)) throw ValidationError("low_energy_rates: kappa must be positive");
  if (!(m.h > 0.0)) throw ValidationError("low_energy_rates: h must be positive");
  const double z = m.omega0 / m.h;
  const double y = m.omega0 / m.kappa;
  return {4.0 * p.num_spins * p.gamma_z_s * z * z, p.num_spins * p.gamma_y_s * y * y};
}

RateWithWarnings one_over_f_rate(const NoiseParams& p, double omega_ac) {
  p.validate();
  if (!(omega_ac > 0.0)) throw ValidationError("one_over_f_rate: omega_ac must be positive");
  RateWithWarnings out;
  out.rate = p.num_spins / (5.0 * p.t_phi * p.t_phi * omega_ac);
  if (!(omega_ac * p.t_phi > 1.0)) out.warnings.push_back("one_over_f_rate: omega_ac T_phi <= 1, formula outside its range");
  return out;
}

SpinModel budget_model(double kappa, double J, int num_spins, double h_over_omega0) {
  SpinModel m;
  m.kappa = kappa;
  m.J = J;
  m.num_spins = num_spins;
  m.coupling_sign = num_spins == 2 ? +1 : -1;
  m.omega0 = perturbative_omega0(kappa, J, num_spins);
  m.h = h_over_omega0 * m.omega0;
  return m;
}

LifetimeBudget lifetime(const NoiseParams& p, const SpinModel& m) {
  LifetimeBudget b;
  b.gamma_th = thermal_rate(p, m);
  const auto le = low_energy_rates(p, m);
  b.gamma_z_le = le.gamma_z_le;
  b.gamma_y_le = le.gamma_y_le;
  auto f = one_over_f_rate(p, 0.6 * m.omega0);
  b.gamma_z_1f = f.rate;
  b.warnings = std::move(f.warnings);
  const double total = b.total_rate();
  if (total > 0.0) b.t_L = 1.0 / total;
  return b;
}

std::vector<double> kappa_grid(double J, int points) {
  if (!(J > 0.0) || points < 2) throw ValidationError("kappa_grid: need J > 0 and at least two points");
  std::vector<double> k;
  const double lo = std::log(J / 1000.0);
  const double hi = std::log(J / 2.0);
  for (int i = 0; i < points; ++i) k.push_back(std::exp(lo + (hi - lo) * i / (points - 1)));
  return k;
}

LifetimeBudget optimize_kappa(const NoiseParams& p, double J, KappaRange range, int grid_points,
                              double h_over_omega0) {
  p.validate();
  if (!(range.lo > 0.0) || !(range.hi > range.lo) || !(range.hi < J))
    throw ValidationError("optimize_kappa: kappa range must lie inside (0, J)");
  if (grid_points < 3) throw ValidationError("optimize_kappa: need at least three grid points");
  // minimize the total rate; unbounded T_L only when every rate vanishes
  const auto rate = [&](double logk) { return lifetime(p, budget_model(std::exp(logk), J, p.num_spins, h_over_omega0)).total_rate(); };
  const double a = std::log(range.lo);
  const double b = std::log(range.hi);
  const double step = (b - a) / (grid_points - 1);
  int best = 0;
  double best_rate = rate(a);
  for (int i = 1; i < grid_points; ++i) {
    const double r = rate(a + step * i);
    if (r < best_rate) {
      best_rate = r;
      best = i;
    }
  }
  double logk = a + step * best;
  const bool at_boundary = best == 0 || best == grid_points - 1;
  if (!at_boundary) logk = golden_minimize(rate, logk - step, logk + step, 1e-10);

  LifetimeBudget out = lifetime(p, budget_model(std::exp(logk), J, p.num_spins, h_over_omega0));
  out.kappa_opt = std::exp(logk);
  if (at_boundary) {
    std::ostringstream msg;
    msg << "optimize_kappa: optimum at the " << (best == 0 ? "lower" : "upper") << " end of the kappa range";
    out.warnings.push_back(msg.str());
  }
  return out;
}

OneOverFTrace generate_1f_trace(double amplitude, double f_min, double f_max, double dt, double duration,
                                std::uint64_t seed) {
  if (!(dt > 0.0) || !(duration >= dt)) throw ValidationError("generate_1f_trace: need 0 < dt <= duration");
  if (!(f_min > 0.0) || !(f_max > f_min) || f_max > 0.5 / dt * (1.0 + 1e-12))
    throw ValidationError("generate_1f_trace: need 0 < f_min < f_max <= 1/(2 dt)");
  if (!(amplitude >= 0.0)) throw ValidationError("generate_1f_trace: amplitude must be >= 0");

  const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  std::size_t m = 2;
  const double needed = std::max(static_cast<double>(n), 1.0 / (f_min * dt));
  while (static_cast<double>(m) < needed) m *= 2;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double df = 1.0 / (static_cast<double>(m) * dt);
  std::vector<std::complex<double>> spec(m / 2 + 1, 0.0);
  for (std::size_t k = 1; k < m / 2; ++k) {
    const double a = gauss(rng);
    const double b = gauss(rng);
    const double f = df * static_cast<double>(k);
    if (f < f_min || f > f_max) continue;
    // x_n = sum_k a_k cos + b_k sin with a_k, b_k ~ N(0, S df)
    const double sigma = amplitude * std::sqrt(df / f);
    spec[k] = 0.5 * static_cast<double>(m) * sigma * std::complex<double>(a, -b);
  }
  std::vector<double> x(m);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.inv(x.data(), spec.data(), static_cast<Eigen::Index>(m));

  OneOverFTrace tr;
  tr.dt = dt;
  tr.f_min = f_min;
  tr.f_max = f_max;
  tr.amplitude = amplitude;
  tr.samples.resize(n);
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n), tr.samples.begin());
  return tr;
}

double psd_slope(const OneOverFTrace& tr, double lo, double hi) {
  const std::size_t n = tr.samples.size();
  if (n < 64) throw ValidationError("psd_slope: trace too short");
  if (!(lo > 0.0) || !(hi > lo)) throw ValidationError("psd_slope: need 0 < lo < hi");
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, tr.samples);
  const double df = 1.0 / (static_cast<double>(n) * tr.dt);
  // log bins, 8 per decade
  const int per_decade = 8;
  const int bins = static_cast<int>(std::ceil(per_decade * std::log10(hi / lo)));
  std::vector<double> power(static_cast<std::size_t>(bins), 0.0), fsum(power.size(), 0.0);
  std::vector<int> count(power.size(), 0);
  for (std::size_t k = 1; k < n / 2; ++k) {
    const double f = df * static_cast<double>(k);
    if (f < lo || f >= hi) continue;
    const auto b = static_cast<std::size_t>(per_decade * std::log10(f / lo));
    if (b >= power.size()) continue;
    power[b] += std::norm(spec[k]);
    fsum[b] += f;
    ++count[b];
  }
  std::vector<double> x, y;
  for (std::size_t b = 0; b < power.size(); ++b) {
    if (count[b] == 0) continue;
    x.push_back(std::log(fsum[b] / count[b]));
    y.push_back(std::log(power[b] / count[b]));
  }
  if (x.size() < 3) throw ValidationError("psd_slope: band holds too few frequency bins");
  return fit_line(x, y).slope;
}

double amplitude_for_tphi(double t_phi, double f_min, double f_max) {
  if (!(t_phi > 0.0) || !(f_min > 0.0) || !(f_max > f_min)) throw ValidationError("amplitude_for_tphi: bad arguments");
  // phase variance per unit amplitude: 4 int (1/f) sin^2(pi f t)/(pi f)^2 df, in log f
  const int nodes = 4000;
  const double a = std::log(f_min);
  const double b = std::log(f_max);
  const double h = (b - a) / nodes;
  double var = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    const double f = std::exp(a + h * i);
    const double s = std::sin(kPi * f * t_phi) / (kPi * f);
    var += (i == 0 || i == nodes ? 0.5 : 1.0) * 4.0 * s * s;
  }
  var *= h;
  // coherence exp(-var A^2 / 2) = 1/e
  return std::sqrt(2.0 / var);
}

std::vector<double> logical_z_projections(const SpinModel& model) {
  model.validate();
  const int n = model.num_spins;
  std::vector<double> s(static_cast<std::size_t>(n), 1.0);
  if (n == 2) s[1] = -1.0;
  if (model.h > 0.0) {
    const auto ls = logical_subspace(build_spin_hamiltonian(model), model);
    for (int j = 0; j < n; ++j) {
      const HermitianOperator z(pauli(Axis::z, j, n));
      s[static_cast<std::size_t>(j)] = 0.5 * (ls.zero_L.expectation(z) - ls.one_L.expectation(z));
    }
  }
  return s;
}

namespace {

struct Sums {
  std::vector<std::complex<double>> ramsey;
  std::vector<std::complex<double>> driven;
};

struct Sampling {
  std::size_t steps = 0;
  std::size_t ramsey_steps = 0;
  std::size_t stride = 1;
  std::size_t ramsey_stride = 1;
  double dt = 0.0;
};

void accumulate(const std::vector<const OneOverFTrace*>& traces, const std::vector<double>& s, double omega,
                const Sampling& sp, Sums& sums) {
  // single-qubit Ramsey, phase 2 int delta h
  const auto& q0 = traces.front()->samples;
  double phase = 0.0;
  for (std::size_t k = 0; k <= sp.ramsey_steps; ++k) {
    if (k % sp.ramsey_stride == 0) sums.ramsey[k / sp.ramsey_stride] += std::polar(1.0, -phase);
    if (k < sp.ramsey_steps) phase += 2.0 * q0[k] * sp.dt;
  }
  // driven logical qubit, exact 2x2 steps with the field held over each step
  std::complex<double> a(1.0, 0.0), b(0.0, 0.0);
  for (std::size_t k = 0; k <= sp.steps; ++k) {
    if (k % sp.stride == 0) {
      const double t = static_cast<double>(k) * sp.dt;
      const std::complex<double> ab = std::conj(a) * b;
      const std::complex<double> w(std::norm(a) - std::norm(b), 2.0 * ab.imag());
      sums.driven[k / sp.stride] += w * std::polar(1.0, 2.0 * omega * t);
    }
    if (k == sp.steps) break;
    double dz = 0.0;
    for (std::size_t j = 0; j < traces.size(); ++j) dz += s[j] * traces[j]->samples[k];
    const double mag = std::hypot(omega, dz);
    if (mag == 0.0) continue;
    const double c = std::cos(mag * sp.dt);
    const double sn = std::sin(mag * sp.dt) / mag;
    // exp(-i dt (omega tau_x + dz tau_z))
    const std::complex<double> minus_i(0.0, -1.0);
    const std::complex<double> na = c * a + minus_i * sn * (dz * a + omega * b);
    const std::complex<double> nb = c * b + minus_i * sn * (omega * a - dz * b);
    a = na;
    b = nb;
  }
}

std::size_t fit_window(const std::vector<double>& c, double floor) {
  std::size_t end = 0;
  while (end < c.size() && c[end] > floor) ++end;
  return end;
}

DephasingResult finish(const SpinModel& model, double omega, const Sums& sums, const Sampling& sp, double count) {
  DephasingResult out;
  for (std::size_t i = 0; i < sums.ramsey.size(); ++i) {
    out.ramsey_times.push_back(static_cast<double>(i * sp.ramsey_stride) * sp.dt);
    out.ramsey_coherence.push_back(std::abs(sums.ramsey[i]) / count);
  }
  for (std::size_t i = 0; i < sums.driven.size(); ++i) {
    out.times.push_back(static_cast<double>(i * sp.stride) * sp.dt);
    out.coherence.push_back(std::abs(sums.driven[i]) / count);
  }

  // fits stop well above the ensemble noise floor 1/sqrt(count)
  const double floor = std::max(0.3, 3.0 / std::sqrt(count));
  // Gaussian: ln C = a + b t^2
  {
    const std::size_t end = fit_window(out.ramsey_coherence, floor);
    if (end < 8) throw FitError("simulate_dephasing: Ramsey decay unresolved", out.ramsey_times, out.ramsey_coherence);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < end; ++i) {
      x.push_back(out.ramsey_times[i] * out.ramsey_times[i]);
      y.push_back(std::log(out.ramsey_coherence[i]));
    }
    const LineFit f = fit_line(x, y);
    out.t_phi = f.slope < 0.0 ? 1.0 / std::sqrt(-f.slope) : std::numeric_limits<double>::infinity();
    double sse = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
      const double d = out.ramsey_coherence[i] - std::exp(f.intercept + f.slope * x[i]);
      sse += d * d;
    }
    out.ramsey_residual = std::sqrt(sse / static_cast<double>(end));
    if (out.ramsey_residual > 0.1) throw FitError("simulate_dephasing: Ramsey decay is not Gaussian", out.ramsey_times, out.ramsey_coherence);
  }
  // exponential: ln C = a - rate t
  {
    const std::size_t end = fit_window(out.coherence, floor);
    if (end < 8) throw FitError("simulate_dephasing: driven decay unresolved", out.times, out.coherence);
    std::vector<double> x(out.times.begin(), out.times.begin() + static_cast<std::ptrdiff_t>(end)), y;
    for (std::size_t i = 0; i < end; ++i) y.push_back(std::log(out.coherence[i]));
    const LineFit f = fit_line(x, y);
    out.rate = -f.slope;
    double sse = 0.0;
    for (std::size_t i = 0; i < end; ++i) {
      const double d = out.coherence[i] - std::exp(f.intercept + f.slope * x[i]);
      sse += d * d;
    }
    out.driven_residual = std::sqrt(sse / static_cast<double>(end));
    if (out.driven_residual > 0.1) throw FitError("simulate_dephasing: driven decay is not exponential", out.times, out.coherence);
  }
  out.fitted_constant = out.rate > 0.0 && std::isfinite(out.t_phi) ? model.num_spins / (out.rate * out.t_phi * out.t_phi * omega) : 0.0;
  return out;
}

Sampling make_sampling(double dt, std::size_t samples, double ramsey_duration) {
  Sampling sp;
  sp.dt = dt;
  sp.steps = samples - 1;
  sp.ramsey_steps = std::min(sp.steps, static_cast<std::size_t>(std::llround(ramsey_duration / dt)));
  sp.stride = std::max<std::size_t>(1, sp.steps / 1000);
  sp.ramsey_stride = std::max<std::size_t>(1, sp.ramsey_steps / 1000);
  return sp;
}

Sums make_sums(const Sampling& sp) {
  Sums s;
  s.ramsey.assign(sp.ramsey_steps / sp.ramsey_stride + 1, 0.0);
  s.driven.assign(sp.steps / sp.stride + 1, 0.0);
  return s;
}

}  // namespace

DephasingResult simulate_dephasing(const SpinModel& model, double omega_ac,
                                   const std::vector<std::vector<OneOverFTrace>>& traces, double ramsey_duration) {
  if (!(omega_ac > 0.0)) throw ValidationError("simulate_dephasing: omega_ac must be positive");
  if (traces.empty()) throw ValidationError("simulate_dephasing: no realizations");
  const auto s = logical_z_projections(model);
  const OneOverFTrace& first = traces.front().front();
  for (const auto& real : traces) {
    if (real.size() != s.size()) throw ValidationError("simulate_dephasing: need one trace per qubit");
    for (const auto& tr : real)
      if (tr.samples.size() != first.samples.size() || tr.dt != first.dt)
        throw ValidationError("simulate_dephasing: traces must share length and dt");
  }
  const double span = first.dt * static_cast<double>(first.samples.size() - 1);
  const Sampling sp = make_sampling(first.dt, first.samples.size(), ramsey_duration > 0.0 ? ramsey_duration : span);
  Sums sums = make_sums(sp);
  for (const auto& real : traces) {
    std::vector<const OneOverFTrace*> ptr;
    for (const auto& tr : real) ptr.push_back(&tr);
    accumulate(ptr, s, omega_ac, sp, sums);
  }
  return finish(model, omega_ac, sums, sp, static_cast<double>(traces.size()));
}

DephasingResult simulate_dephasing(const SpinModel& model, double omega_ac, const DephasingOptions& o) {
  if (!(omega_ac > 0.0)) throw ValidationError("simulate_dephasing: omega_ac must be positive");
  if (o.realizations < 1) throw ValidationError("simulate_dephasing: need at least one realization");
  if (!(o.dt > 0.0) || !(o.duration > o.dt)) throw ValidationError("simulate_dephasing: need 0 < dt < duration");
  if (!(o.dt * omega_ac < 0.1)) throw ValidationError("simulate_dephasing: dt must resolve the Rabi period");
  const double f_min = o.f_min > 0.0 ? o.f_min : 0.1 / o.duration;
  const double f_max = o.f_max > 0.0 ? o.f_max : 0.5 / o.dt;
  const auto s = logical_z_projections(model);
  const std::size_t n = static_cast<std::size_t>(std::llround(o.duration / o.dt)) + 1;
  const Sampling sp = make_sampling(o.dt, n, o.ramsey_duration > 0.0 ? o.ramsey_duration : o.duration);
  Sums sums = make_sums(sp);
  for (int r = 0; r < o.realizations; ++r) {
    std::vector<OneOverFTrace> real;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const std::uint64_t q = o.common_mode ? 0 : j;
      real.push_back(generate_1f_trace(o.amplitude, f_min, f_max, o.dt, o.duration,
                                       derive_seed(o.seed, {static_cast<std::uint64_t>(r), q})));
    }
    std::vector<const OneOverFTrace*> ptr;
    for (const auto& tr : real) ptr.push_back(&tr);
    accumulate(ptr, s, omega_ac, sp, sums);
  }
  return finish(model, omega_ac, sums, sp, static_cast<double>(o.realizations));
}

}  // namespace ceq
