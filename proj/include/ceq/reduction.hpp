#pragma once

#include <string>
#include <vector>

#include "ceq/circuit.hpp"
#include "ceq/numerics.hpp"

namespace ceq {

/// Effective transverse-field Ising model of L coupled fluxonia.
///
/// coupling_sign is +1 for the antiferromagnetic pair (L=2) and -1 for the
/// ferromagnetic ring (L=3). omega0 is half the h=0 ground doublet splitting.
struct SpinModel {
  double kappa = 0.0;
  double J = 1.0;
  int coupling_sign = +1;
  double h = 0.0;
  double omega0 = 0.0;
  int num_spins = 2;

  /// Throws on hard violations; returns warnings (h/omega0 < 5).
  std::vector<std::string> validate() const;
};

/// Model with omega0 taken from the exact h=0 spin spectrum.
SpinModel make_spin_model(double kappa, double J, double h, int num_spins);

/// Half the ground-doublet splitting of the h=0 spin Hamiltonian.
double spin_doublet_half_splitting(double kappa, double J, int num_spins);

/// Lowest-order doublet scale: kappa^2/J for L=2, 3 kappa^3/(8 J^2) for L=3.
double perturbative_omega0(double kappa, double J, int num_spins);

/// Per-spin longitudinal bias b_j (term b_j sigma_j^z) from the flux offsets.
std::vector<double> spin_biases(const CircuitSpec& spec);

/// Logical detuning implied by per-spin biases.
double detuning_from_biases(const std::vector<double>& biases);

/// Per-spin bias pattern producing logical detuning h.
std::vector<double> bias_pattern(double h, int num_spins);

struct SpinExtraction {
  SpinModel model;
  double kappa_sq_over_J = 0.0;  // perturbative cross-check
  double h_flux = 0.0;           // detuning from the single-qubit shifts +-pi E_Ls dPhi
  RVector coupled_levels;        // lowest levels of the h=0 circuit
  std::vector<std::string> warnings;
};

/// kappa from the single-fluxonium doublet, J from the well positions,
/// omega0 from the coupled circuit at h=0. h is read from the biased coupled
/// circuit, h^2 = splitting^2 - 4 omega0^2, signed positive when |0_L> is
/// lower; if the biased doublet cannot be labeled h falls back to h_flux
/// with a warning.
SpinExtraction extract_spin_params(const CircuitSpec& spec);

HermitianOperator build_spin_hamiltonian(const SpinModel& model);

struct LogicalSubspace {
  StateVector zero_L;
  StateVector one_L;
  double splitting = 0.0;
  double mean_energy = 0.0;
  bool labeled = true;  // false when the bias is zero and the doublet is unlabeled
};

/// Operator whose sign labels the logical states: sigma1z - sigma2z (L=2),
/// sum of sigma z (L=3).
HermitianOperator logical_label_operator(int num_spins);

LogicalSubspace logical_subspace(const HermitianOperator& hamiltonian, const SpinModel& model);

/// Same, with an explicit label operator in the basis of `hamiltonian`.
/// `label_threshold` is the minimum |<label>| accepted for each state.
LogicalSubspace logical_subspace(const HermitianOperator& hamiltonian, const HermitianOperator& label,
                                 double label_threshold);

/// Truncated coupled circuit with its logical doublet, labeled by the well
/// phases (phi1 - phi2 for L=2, sum of phi for L=3).
struct CircuitLogical {
  std::vector<TruncatedFluxonium> parts;
  std::vector<Index> dims;
  HermitianOperator hamiltonian;
  LogicalSubspace subspace;
  double zero_energy = 0.0;  // <0_L|H|0_L>
  double one_energy = 0.0;
};

CircuitLogical circuit_logical_subspace(const CircuitSpec& spec);

}  // namespace ceq
