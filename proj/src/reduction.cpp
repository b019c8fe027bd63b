#include "ceq/reduction.hpp"

#include <cmath>
#include <sstream>

#include "ceq/spin.hpp"

namespace ceq {

std::vector<std::string> SpinModel::validate() const {
  if (num_spins != 2 && num_spins != 3) throw ValidationError("SpinModel: L must be 2 or 3");
  if (!(J > 0.0)) throw ValidationError("SpinModel: J must be positive");
  if (!(kappa >= 0.0) || !(kappa < J)) throw ValidationError("SpinModel: require 0 <= kappa < J");
  if (coupling_sign != (num_spins == 2 ? +1 : -1))
    throw ValidationError("SpinModel: coupling must be antiferromagnetic for L=2, ferromagnetic for L=3");
  if (!(omega0 >= 0.0) || !std::isfinite(h)) throw ValidationError("SpinModel: omega0 must be non-negative");
  std::vector<std::string> warnings;
  if (omega0 > 0.0 && std::abs(h) < 5.0 * omega0) {
    std::ostringstream msg;
    msg << "h/omega0 = " << std::abs(h) / omega0 << " below 5";
    warnings.push_back(msg.str());
  }
  return warnings;
}

double perturbative_omega0(double kappa, double J, int num_spins) {
  if (num_spins == 3) return 3.0 * kappa * kappa * kappa / (8.0 * J * J);
  return kappa * kappa / J;
}

HermitianOperator build_spin_hamiltonian(const SpinModel& model) {
  model.validate();
  const int n = model.num_spins;
  const Index dim = Index{1} << n;
  CMatrix h = CMatrix::Zero(dim, dim);
  for (int j = 0; j < n; ++j) h -= model.kappa * pauli(Axis::x, j, n);
  const auto b = bias_pattern(model.h, n);
  for (int j = 0; j < n; ++j) h += b[static_cast<std::size_t>(j)] * pauli(Axis::z, j, n);
  if (n == 2) {
    h += model.J * pauli(Axis::z, 0, 2) * pauli(Axis::z, 1, 2);
  } else {
    for (int j = 0; j < n; ++j) h -= model.J * pauli(Axis::z, j, n) * pauli(Axis::z, (j + 1) % n, n);
  }
  return HermitianOperator(std::move(h));
}

double spin_doublet_half_splitting(double kappa, double J, int num_spins) {
  SpinModel m;
  m.kappa = kappa;
  m.J = J;
  m.num_spins = num_spins;
  m.coupling_sign = num_spins == 2 ? +1 : -1;
  const auto eig = eigendecompose(build_spin_hamiltonian(m), 2);
  return 0.5 * (eig.values(1) - eig.values(0));
}

SpinModel make_spin_model(double kappa, double J, double h, int num_spins) {
  SpinModel m;
  m.kappa = kappa;
  m.J = J;
  m.h = h;
  m.num_spins = num_spins;
  m.coupling_sign = num_spins == 2 ? +1 : -1;
  m.omega0 = spin_doublet_half_splitting(kappa, J, num_spins);
  m.validate();
  return m;
}

std::vector<double> bias_pattern(double h, int num_spins) {
  if (num_spins == 2) return {-h / 4.0, h / 4.0};
  return std::vector<double>(static_cast<std::size_t>(num_spins), -h / (2.0 * num_spins));
}

double detuning_from_biases(const std::vector<double>& b) {
  if (b.size() == 2) return 2.0 * (b[1] - b[0]);
  double s = 0.0;
  for (double x : b) s += x;
  return -2.0 * s;
}

std::vector<double> spin_biases(const CircuitSpec& spec) {
  const double els = spec.single_inductive_energy();
  std::vector<double> b;
  for (int q = 0; q < spec.num_qubits; ++q) b.push_back(-kPi * els * (spec.flux_of(q) - kPi));
  return b;
}

SpinExtraction extract_spin_params(const CircuitSpec& spec) {
  SpinExtraction out;
  out.warnings = spec.validate();
  const int n = spec.num_qubits;

  CircuitSpec sym = spec;
  sym.fluxes.assign(static_cast<std::size_t>(n), kPi);
  sym.charge_offsets.clear();

  double kappa = 0.0;
  double ej_mean = 0.0;
  for (int q = 0; q < n; ++q) {
    const auto s = single_fluxonium_spectrum(sym, q, 3);
    const double split = s.energies(1) - s.energies(0);
    if (!(s.energies(2) - s.energies(1) >= 5.0 * split))
      throw ExtractionError("extract_spin_params: single-fluxonium doublet not resolved");
    kappa += 0.5 * split / n;
    ej_mean += sym.ej_of(q) / n;
  }
  const double arm = kPi - sym.single_inductive_energy() / ej_mean;
  const double J = sym.coupling_energy() * arm * arm;

  const auto eig = eigendecompose(build_coupled_circuit(sym), 4);
  out.coupled_levels = eig.values;
  const double split = eig.values(1) - eig.values(0);
  const double gap = eig.values(2) - eig.values(1);
  if (!(gap >= 5.0 * split) || !(split > 0.0)) {
    std::ostringstream msg;
    msg << "extract_spin_params: doublet-quartet structure not resolved (splitting " << split << ", gap " << gap << ")";
    throw ExtractionError(msg.str());
  }

  // a cut through a tunnel doublet of an excited pair corrupts the doublet
  CircuitSpec wider = sym;
  wider.levels_kept += 2;
  const auto eig_w = eigendecompose(build_coupled_circuit(wider), 2);
  const double split_w = eig_w.values(1) - eig_w.values(0);
  if (std::abs(split - split_w) > 0.1 * split_w) {
    std::ostringstream msg;
    msg << "extract_spin_params: truncation not converged (doublet " << split << " at levels_kept=" << sym.levels_kept
        << ", " << split_w << " at " << wider.levels_kept << ")";
    throw ExtractionError(msg.str());
  }

  SpinModel& m = out.model;
  m.kappa = kappa;
  m.J = J;
  m.num_spins = n;
  m.coupling_sign = n == 2 ? +1 : -1;
  m.omega0 = 0.5 * split;
  out.h_flux = detuning_from_biases(spin_biases(spec));
  bool biased = false;
  for (int q = 0; q < n; ++q) biased = biased || spec.flux_of(q) != kPi;
  if (biased) {
    try {
      const CircuitLogical cl = circuit_logical_subspace(spec);
      const double s2 = cl.subspace.splitting * cl.subspace.splitting - split * split;
      m.h = std::copysign(std::sqrt(std::max(s2, 0.0)), cl.one_energy - cl.zero_energy);
    } catch (const ExtractionError&) {
      m.h = out.h_flux;
      out.warnings.push_back("extract_spin_params: biased doublet unlabeled, h taken from the flux formula");
    }
  }
  out.kappa_sq_over_J = perturbative_omega0(kappa, J, n);
  for (auto& w : m.validate()) out.warnings.push_back(w);
  return out;
}

HermitianOperator logical_label_operator(int num_spins) {
  if (num_spins == 2) return HermitianOperator(pauli(Axis::z, 0, 2) - pauli(Axis::z, 1, 2));
  CMatrix s = CMatrix::Zero(Index{1} << num_spins, Index{1} << num_spins);
  for (int j = 0; j < num_spins; ++j) s += pauli(Axis::z, j, num_spins);
  return HermitianOperator(std::move(s));
}

LogicalSubspace logical_subspace(const HermitianOperator& hamiltonian, const HermitianOperator& label,
                                 double label_threshold) {
  const auto eig = eigendecompose(hamiltonian, 2);
  StateVector a(eig.vectors.col(0));
  StateVector b(eig.vectors.col(1));
  const double la = a.expectation(label);
  const double lb = b.expectation(label);
  if (std::abs(la) < label_threshold || std::abs(lb) < label_threshold || la * lb > 0.0) {
    std::ostringstream msg;
    msg << "logical_subspace: ambiguous labels (" << la << ", " << lb << ")";
    throw ExtractionError(msg.str());
  }
  LogicalSubspace out;
  out.zero_L = la > 0.0 ? a : b;
  out.one_L = la > 0.0 ? b : a;
  out.splitting = eig.values(1) - eig.values(0);
  out.mean_energy = 0.5 * (eig.values(0) + eig.values(1));
  return out;
}

LogicalSubspace logical_subspace(const HermitianOperator& hamiltonian, const SpinModel& model) {
  model.validate();
  if (model.h == 0.0) {
    const auto eig = eigendecompose(hamiltonian, 2);
    LogicalSubspace out;
    out.zero_L = StateVector(eig.vectors.col(0));
    out.one_L = StateVector(eig.vectors.col(1));
    out.splitting = eig.values(1) - eig.values(0);
    out.mean_energy = 0.5 * (eig.values(0) + eig.values(1));
    out.labeled = false;
    return out;
  }
  return logical_subspace(hamiltonian, logical_label_operator(model.num_spins), 0.5);
}

CircuitLogical circuit_logical_subspace(const CircuitSpec& spec) {
  spec.validate();
  if (spec.levels_kept < 4) throw ValidationError("circuit_logical_subspace: levels_kept must be at least 4");
  CircuitLogical out;
  for (int q = 0; q < spec.num_qubits; ++q) out.parts.push_back(truncate_fluxonium(spec, q, spec.levels_kept));
  for (const auto& p : out.parts) out.dims.push_back(p.energies.size());
  out.hamiltonian = assemble_coupled_circuit(spec, out.parts);
  const Index dim = out.hamiltonian.dim();
  CMatrix label = CMatrix::Zero(dim, dim);
  if (spec.num_qubits == 2) {
    label = embed(out.parts[0].phase, 0, out.dims) - embed(out.parts[1].phase, 1, out.dims);
  } else {
    for (int q = 0; q < spec.num_qubits; ++q)
      label += embed(out.parts[static_cast<std::size_t>(q)].phase, q, out.dims);
  }
  out.subspace = logical_subspace(out.hamiltonian, HermitianOperator(std::move(label)), 0.5);
  out.zero_energy = out.subspace.zero_L.expectation(out.hamiltonian);
  out.one_energy = out.subspace.one_L.expectation(out.hamiltonian);
  return out;
}

}  // namespace ceq
