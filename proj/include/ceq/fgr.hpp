#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <vector>

#include "ceq/numerics.hpp"
#include "ceq/reduction.hpp"
#include "ceq/spin.hpp"

namespace ceq {

/// Closed-system relaxation of the L=2 dimer into a structureless random
/// bath. Energies in units where J is typically 1.
struct FgrSpec {
  Index bath_dim = 1024;
  double bandwidth = 10.0;  // box width W of the bath spectrum
  double coupling_g = 0.1;
  Axis channel = Axis::y;
  bool allow_unsupported_channels = false;  // x and z run only when set
  bool driven = false;
  double kappa = 0.2;
  double J = 1.0;
  double h = 0.5;
  double alpha_bar = 0.5;
  double drive_omega = 0.0;  // 0: dressed resonance (equal-weight Floquet states)
  int n_realizations = 20;
  std::uint64_t seed = 0;
  double fit_start = -1.0;  // < 0: default window
  double fit_end = -1.0;
  int samples = 32;            // undriven samples over the propagation span
  int steps_per_period = 16;   // driven propagation steps per drive period

  void validate() const;
};

struct Bath {
  HermitianOperator hamiltonian;
  RVector energies;      // ascending, inside [-W/2, W/2]
  CMatrix eigenvectors;  // columns match energies
};

/// Box-distributed energies with the (column-shuffled) eigenvectors of an
/// independent random Hermitian matrix.
Bath build_bath(const FgrSpec& spec, std::uint64_t seed);
inline Bath build_bath(const FgrSpec& spec) { return build_bath(spec, spec.seed); }

/// Random Hermitian matrix with mean-square entry 1/bath_dim, so that
/// tr(M^2)/bath_dim is close to 1.
HermitianOperator build_coupler(const FgrSpec& spec, std::uint64_t seed);

/// Dimer model, logical states and drive for a spec (g plays no role).
struct FgrSystem {
  SpinModel model;
  double splitting = 0.0;  // g=0 logical splitting
  double drive_omega = 0.0;
  StateVector zero_L;
  StateVector one_L;
  StateVector floquet;            // driven only: initial Floquet state
  double floquet_excited_weight = 0.0;
  double matrix_element_sq = 0.0;  // spin average of |<1_L|sigma_j^c|0_L>|^2
};

FgrSystem fgr_system(const FgrSpec& spec);

enum class InitialState { excited, ground };

struct RelaxationTrace {
  std::vector<double> times;
  std::vector<double> survival;    // |<ref(t) (x) bath ground|psi(t)>|^2
  std::vector<double> population;  // <psi| (|ref(t)><ref(t)| (x) I_B) |psi>
  std::vector<double> ground;      // <psi| (|0_L><0_L| (x) I_B) |psi>
  double max_norm_defect = 0.0;
  double m_squared = 0.0;  // spin average of [M_j^2]_00
  double drift = 0.0;      // first-order differential shift g sum_j M_j00 (<sigma_j>_1 - <sigma_j>_0)
};

/// One disorder realization. Undriven: `samples` points up to the
/// propagation span; driven: every drive period. ref(t) is |1_L> undriven and
/// the g=0 Floquet state at stroboscopic times driven. `ground` starts the
/// undriven dimer in |0_L> instead.
RelaxationTrace trace_relaxation(const FgrSpec& spec, int realization, InitialState initial = InitialState::excited);

/// Propagation span: the earliest of the explicit fit_end, 200 drive
/// periods, and an eighth of the bath Heisenberg time 2 pi bath_dim / W.
double fgr_span(const FgrSpec& spec, const FgrSystem& system);

/// Golden-rule prediction of the FGR constant for a flat bath density of
/// states 1/W above the bath ground state: 2 pi / W times the summed
/// |Fourier components|^2 of <F'(t)|sigma_j^c|F(t)> over all channels with
/// positive emission energy, divided by the spin-averaged matrix element.
/// Undriven this is 2 pi L / W.
double golden_rule_constant(const FgrSpec& spec);

struct FgrResult {
  double raw_rate = 0.0;     // mean over realizations of the fitted survival decay rate
  double rate_stderr = 0.0;
  double fgr_constant = 0.0;  // raw_rate / (g^2 m^2 |<1|c|0>|^2); 0 when g = 0
  double m_squared = 0.0;
  double matrix_element_sq = 0.0;
  double fit_start = 0.0;
  double fit_end = 0.0;
  double drift_fraction = 0.0;  // max |drift| fit_end / 2 pi over realizations
  std::vector<double> realization_rates;
  std::vector<double> times;  // realization-averaged traces
  std::vector<double> survival;
  std::vector<double> population;
};

/// Realization-averaged relaxation experiment. The window is
/// [fit_start, t*], t* the first sample where the mean survival drops below
/// 0.9 (or the span). Throws ChannelUnsupportedError for x/z unless
/// allowed, or when the drift fraction exceeds 0.1; FitError when the
/// quadratic term exceeds 20% of the linear one over the window;
/// ValidationError when the survival loses more than 20% in the window.
FgrResult run_relaxation(const FgrSpec& spec);

/// Per-point result of a sweep; exactly one of the two is set.
struct FgrOutcome {
  std::optional<FgrResult> result;
  std::exception_ptr error;
};

/// Grid over (coupling_g, kappa), coupling-major, with per-point failures
/// captured. Spec-level problems (bad base spec, disabled channel, empty
/// grid) still throw.
std::vector<FgrOutcome> fgr_sweep_outcomes(const FgrSpec& base, const std::vector<double>& couplings,
                                          const std::vector<double>& kappas, int workers = 1);

/// Grid over (coupling_g, kappa), coupling-major. Bath and couplers are
/// shared across grid points of the same realization.
/// Rethrows the first failed point.
std::vector<FgrResult> fgr_sweep(const FgrSpec& base, const std::vector<double>& couplings,
                                 const std::vector<double>& kappas, int workers = 1);

}  // namespace ceq
