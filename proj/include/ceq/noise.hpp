#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ceq/reduction.hpp"

namespace ceq {

/// Single-qubit coherence inputs. Rates in 1/s, times in s, kT_eff in rad/s.
struct NoiseParams {
  double gamma_y_s = 0.0;  // 1/T1, measured at energy 2 kappa
  double gamma_z_s = 0.0;
  double t_phi = 0.0;      // Ramsey-defined 1/f dephasing time
  double kt_eff = 0.0;
  int num_spins = 2;

  int c_L() const { return num_spins == 2 ? 2 : 4; }
  void validate() const;
};

struct LifetimeBudget {
  double gamma_th = 0.0;
  double gamma_z_le = 0.0;
  double gamma_y_le = 0.0;
  double gamma_z_1f = 0.0;
  std::optional<double> t_L;  // empty when every rate vanishes
  std::optional<double> kappa_opt;
  std::vector<std::string> warnings;

  double total_rate() const { return gamma_th + gamma_z_le + gamma_y_le + gamma_z_1f; }
};

/// L gamma_y (c_L J / 2 kappa) exp(-c_L J / kT_eff).
double thermal_rate(const NoiseParams& params, const SpinModel& model);

struct LowEnergyRates {
  double gamma_z_le = 0.0;
  double gamma_y_le = 0.0;
};

/// 4 L gamma_z (omega0/h)^2 and L gamma_y (omega0/kappa)^2.
LowEnergyRates low_energy_rates(const NoiseParams& params, const SpinModel& model);

struct RateWithWarnings {
  double rate = 0.0;
  std::vector<std::string> warnings;
};

/// L / (5 T_phi^2 omega_ac), omega_ac angular. Warns when omega_ac T_phi <= 1.
RateWithWarnings one_over_f_rate(const NoiseParams& params, double omega_ac);

/// Spin model used by the budget at transverse field kappa: omega0 from the
/// perturbative doublet scale (kappa^2/J for L=2, 3 kappa^3/(8 J^2) for
/// L=3), h = h_over_omega0 * omega0.
SpinModel budget_model(double kappa, double J, int num_spins, double h_over_omega0 = 10.0);

/// All four rates with omega_ac = 0.6 omega0.
LifetimeBudget lifetime(const NoiseParams& params, const SpinModel& model);

struct KappaRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// 40 logarithmic points on [J/1000, J/2].
std::vector<double> kappa_grid(double J, int points = 40);

/// Grid search (`grid_points` log-spaced) then golden-section refinement of
/// T_L in log kappa. Warns when the optimum sits on a range boundary.
LifetimeBudget optimize_kappa(const NoiseParams& params, double J, KappaRange range, int grid_points = 200,
                              double h_over_omega0 = 10.0);

struct OneOverFTrace {
  std::vector<double> samples;  // delta h(t) in rad/s
  double dt = 0.0;
  double f_min = 0.0;
  double f_max = 0.0;
  double amplitude = 0.0;  // one-sided PSD S(f) = amplitude^2 / f, amplitude in rad/s
};

/// Gaussian noise with a 1/f one-sided PSD between the band edges, by
/// spectral synthesis on an FFT grid long enough to reach f_min (the first
/// `duration / dt` samples are kept).
OneOverFTrace generate_1f_trace(double amplitude, double f_min, double f_max, double dt, double duration,
                                std::uint64_t seed);

/// Log-log slope of the log-binned periodogram over [lo, hi] (Hz).
double psd_slope(const OneOverFTrace& trace, double lo, double hi);

/// Amplitude giving a Ramsey coherence of 1/e at t_phi for a single qubit
/// under delta h sigma^z (phase 2 int delta h), from the Gaussian phase
/// variance of the band-limited spectrum.
double amplitude_for_tphi(double t_phi, double f_min, double f_max);

struct DephasingOptions {
  int realizations = 200;
  double amplitude = 0.0;
  double f_min = 0.0;  // 0: 1/(10 duration)
  double f_max = 0.0;  // 0: Nyquist of dt
  double dt = 0.0;
  double duration = 0.0;
  double ramsey_duration = 0.0;  // 0: duration
  bool common_mode = false;      // same trace on every qubit
  std::uint64_t seed = 0;
};

struct DephasingResult {
  double rate = 0.0;                 // exponential decay rate of the driven logical coherence
  double t_phi = 0.0;                // calibrated single-qubit Ramsey time
  double fitted_constant = 0.0;      // c in rate = L / (c T_phi^2 omega_ac)
  double ramsey_residual = 0.0;      // RMS of the Gaussian fit in coherence
  double driven_residual = 0.0;      // RMS of the exponential fit in coherence
  std::vector<double> times;         // driven coherence trace
  std::vector<double> coherence;
  std::vector<double> ramsey_times;  // single-qubit Ramsey trace
  std::vector<double> ramsey_coherence;
};

/// (a) Undriven single-qubit Ramsey ensemble from qubit-0 traces, fit to
/// exp(-(t/T_phi)^2). (b) Logical qubit in the frame of its resonant drive,
/// H = omega_ac tau^x + (sum_j s_j delta h_j(t)) tau^z with s_j the logical
/// projection of sigma_j^z, started in |0_L>; the demodulated ensemble
/// Bloch vector length is fit to exp(-rate t). Throws FitError when either
/// fit residual exceeds 0.1.
DephasingResult simulate_dephasing(const SpinModel& model, double omega_ac, const DephasingOptions& options);

/// Same, with explicit traces indexed [realization][qubit].
DephasingResult simulate_dephasing(const SpinModel& model, double omega_ac,
                                   const std::vector<std::vector<OneOverFTrace>>& traces, double ramsey_duration = 0.0);

/// Logical projections s_j of sigma_j^z: (+1, -1) for L=2, (+1, +1, +1) for
/// L=3, refined from the labeled doublet when h > 0.
std::vector<double> logical_z_projections(const SpinModel& model);

}  // namespace ceq
