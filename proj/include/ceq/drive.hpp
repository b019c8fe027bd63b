#pragma once

#include <functional>
#include <vector>

#include "ceq/circuit.hpp"
#include "ceq/fit.hpp"
#include "ceq/reduction.hpp"

namespace ceq {

enum class DriveMode { resonant, high_frequency };

struct DriveSpec {
  double alpha_bar = 0.0;
  double drive_omega = 0.0;
  int driven_qubit = 0;
  DriveMode mode = DriveMode::resonant;

  void validate() const;
};

using PhaseFunction = std::function<double(double)>;

/// full: the driven spin's -kappa sigma^x becomes
///   -kappa (cos phi(t) sigma^x + sin phi(t) sigma^y);
/// effective: two-spin logical form, bias + J s1z s2z
///   - omega0 s_other^x (cos phi s^x + sin phi s^y) (L=2 only).
enum class DriveForm { full, effective };

/// max_frequency is the fastest angular frequency in phi(t), used for the
/// integrator step guard.
TimeDependentOperator peierls_rotated_hamiltonian(const SpinModel& model, const PhaseFunction& phi,
                                                  int driven_qubit, double max_frequency,
                                                  DriveForm form = DriveForm::full);

/// Time average of cos(alpha sin wt) over one period by periodic trapezoid
/// quadrature: the transverse-field renormalization under fast driving.
double averaged_field_factor(double alpha_bar, int nodes = 128);

/// Offset charge amplitude (Cooper-pair units) giving Peierls amplitude
/// alpha_bar for wells at +-phi_m.
double peierls_charge_amplitude(double alpha_bar, double phi_m);

struct RabiResult {
  double rabi_rate = 0.0;  // logical coupling: population follows sin^2(rabi_rate t)
  double contrast = 0.0;
  double fit_residual = 0.0;
  double drive_omega = 0.0;
  std::vector<double> times;
  std::vector<double> population;  // of |1_L>
};

struct RabiOptions {
  DriveForm form = DriveForm::full;
  int driven_qubit = 0;
  int steps_per_period = 200;
  Index target_samples = 2000;
  int extensions = 2;  // trace doublings allowed when too few periods are resolved
  FloppingFitOptions fit{};
};

/// Start in |0_L>, drive the driven qubit's Peierls phase as
/// alpha_bar sin(w t) with w the measured logical splitting, fit the
/// |1_L> population. `duration` is doubled up to `extensions` times while
/// the fitted rate gives fewer than fit.min_periods periods.
RabiResult resonant_rabi(const SpinModel& model, double alpha_bar, double duration, const RabiOptions& options = {});

struct CircuitRabiResult {
  RabiResult rabi;
  double splitting = 0.0;
  double charge_amplitude = 0.0;
};

/// Same experiment on the truncated coupled circuit, the drive entering as a
/// charge offset Q(t) = Q0 sin(w t) on the driven fluxonium. Propagated in
/// the gauge where the offset appears as -dQ/dt * phi; populations are read
/// at the nodes of Q(t), where both gauges coincide.
CircuitRabiResult resonant_rabi_circuit(const CircuitSpec& spec, double alpha_bar, double duration,
                                        const RabiOptions& options = {});

struct FlopTrace {
  std::vector<double> time;
  std::vector<double> population;  // other-well population
  std::vector<double> prediction;  // sin^2(s kappa t)
  double s = 1.0;
  double kappa = 0.0;
  double fitted_omega = 0.0;
  double predicted_omega = 0.0;
};

/// Single fluxonium at its symmetry point, started in one well, under a fast
/// charge drive. Rejects drive frequencies outside [10 kappa, E_2/10] and
/// drives within three linewidths of a transition out of the doublet.
FlopTrace high_frequency_average(const CircuitSpec& spec, const DriveSpec& drive, double duration);

/// Two-level version: -kappa (cos phi sigma^x + sin phi sigma^y).
FlopTrace high_frequency_average(const SpinModel& model, const DriveSpec& drive, double duration);

}  // namespace ceq
