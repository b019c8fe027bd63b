#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ceq/numerics.hpp"

namespace ceq {

/// Physical circuit parameters plus phase-grid discretization controls.
///
/// Energies are angular frequencies. `fluxes` and `charge_offsets` hold one
/// entry per fluxonium (flux in radians, offset in Cooper-pair units
/// Q_ext/2e); empty vectors mean "all at pi" and "all zero". The optional
/// per-qubit vectors override ec/ej for individual fluxonia.
struct CircuitSpec {
  double ec = 1.0;
  double ej = 15.0;
  double el = 0.75;
  double gamma = 1.0;
  int num_qubits = 2;
  std::vector<double> fluxes;
  std::vector<double> charge_offsets;
  std::vector<double> ec_per_qubit;
  std::vector<double> ej_per_qubit;
  int grid_points = 2001;
  double grid_halfwidth = 4.0 * kPi;
  int levels_kept = 6;
  // Multiplies the inter-fluxonium inductive coupling; 1 is the physical
  // circuit, 0 decouples the fluxonia.
  double coupling_scale = 1.0;

  /// Throws ValidationError on hard violations, returns soft warnings.
  std::vector<std::string> validate() const;

  double ec_of(int qubit) const;
  double ej_of(int qubit) const;
  double flux_of(int qubit) const;
  double charge_of(int qubit) const;

  /// Single-fluxonium inductive energy E_Ls, entering as (E_Ls/2) phi^2:
  /// el(1+gamma)/(2+gamma) for two fluxonia (so the two-node quadratic form
  /// el(1+gamma)/(2(2+gamma)) (phi1^2 + phi2^2) + el/(2+gamma) phi1 phi2 is
  /// reproduced), 2 el for the three-node ring.
  double single_inductive_energy() const;

  /// Magnitude of the bilinear phase coupling: el/(2+gamma) for L=2, el for L=3.
  double coupling_energy() const;
};

/// Uniform phase grid on [-halfwidth, halfwidth].
struct PhaseGrid {
  RVector phi;
  double spacing = 0.0;
};

PhaseGrid make_grid(const CircuitSpec& spec);

/// Fourth-order finite-difference fluxonium Hamiltonian in band storage
/// (bands(r, i) = H(i, i + r)) at zero offset. A charge offset q enters as a
/// Peierls phase exp(i r q dx) on the r-th off-diagonal.
struct BandedHamiltonian {
  RMatrix bands;
  double charge_offset = 0.0;
  double spacing = 0.0;
};

BandedHamiltonian fluxonium_bands(const CircuitSpec& spec, int qubit, double charge_offset);

struct FluxoniumSpectrum {
  RVector energies;
  CMatrix states;  // columns on the phase grid, unit 2-norm
  PhaseGrid grid;
  std::pair<double, double> well_minima{0.0, 0.0};  // (left, right)
  double inductive_energy = 0.0;                    // E_Ls
};

/// Dense phase-basis Hamiltonian of fluxonium `qubit` at its own charge offset.
HermitianOperator build_single_fluxonium(const CircuitSpec& spec, int qubit);

/// Lowest `levels` eigenpairs of fluxonium `qubit` through the banded solver.
FluxoniumSpectrum single_fluxonium_spectrum(const CircuitSpec& spec, int qubit, int levels);

/// Classical minima of the double-well potential closest to -pi and +pi.
std::pair<double, double> locate_well_minima(const CircuitSpec& spec, int qubit);

/// A fluxonium truncated to its lowest levels: energies and the phase
/// operator in that eigenbasis.
struct TruncatedFluxonium {
  RVector energies;
  CMatrix phase;
  FluxoniumSpectrum spectrum;
};

TruncatedFluxonium truncate_fluxonium(const CircuitSpec& spec, int qubit, int levels);

/// Coupled Hamiltonian in the truncated product basis, dimension levels_kept^L.
HermitianOperator build_coupled_circuit(const CircuitSpec& spec);

/// Same, reusing already truncated fluxonia (index order matches qubits).
HermitianOperator assemble_coupled_circuit(const CircuitSpec& spec, const std::vector<TruncatedFluxonium>& parts);

/// Single-site operator embedded in the product space of `dims`.
CMatrix embed(const CMatrix& op, int site, const std::vector<Index>& dims);

/// Left/right well-localized recombinations of the two lowest states.
std::pair<StateVector, StateVector> well_states(const FluxoniumSpectrum& spectrum);

/// <phi> of a grid state.
double phase_expectation(const FluxoniumSpectrum& spectrum, const StateVector& state);

}  // namespace ceq
