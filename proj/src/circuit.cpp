#include "ceq/circuit.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace ceq {

namespace {

double at_or(const std::vector<double>& v, int i, double fallback) {
  return i < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(i)] : fallback;
}

void check_qubit(const CircuitSpec& spec, int qubit) {
  if (qubit < 0 || qubit >= spec.num_qubits) throw ValidationError("circuit: qubit index out of range");
}

}  // namespace

double CircuitSpec::ec_of(int qubit) const { return at_or(ec_per_qubit, qubit, ec); }
double CircuitSpec::ej_of(int qubit) const { return at_or(ej_per_qubit, qubit, ej); }
double CircuitSpec::flux_of(int qubit) const { return at_or(fluxes, qubit, kPi); }
double CircuitSpec::charge_of(int qubit) const { return at_or(charge_offsets, qubit, 0.0); }

double CircuitSpec::single_inductive_energy() const {
  if (num_qubits == 3) return 2.0 * el;
  return el * (1.0 + gamma) / (2.0 + gamma);
}

double CircuitSpec::coupling_energy() const {
  if (num_qubits == 3) return el;
  return el / (2.0 + gamma);
}

std::vector<std::string> CircuitSpec::validate() const {
  std::vector<std::string> warnings;
  if (num_qubits != 2 && num_qubits != 3) throw ValidationError("CircuitSpec: L must be 2 or 3");
  if (!(gamma > 0.0 && gamma <= 1.0) && num_qubits == 2) throw ValidationError("CircuitSpec: gamma must lie in (0, 1]");
  if (!(el > 0.0)) throw ValidationError("CircuitSpec: E_L must be positive");
  for (auto* v : {&fluxes, &charge_offsets, &ec_per_qubit, &ej_per_qubit}) {
    if (!v->empty() && static_cast<int>(v->size()) != num_qubits)
      throw ValidationError("CircuitSpec: per-qubit vectors must have one entry per fluxonium");
  }
  for (int q = 0; q < num_qubits; ++q) {
    const double c = ec_of(q);
    const double j = ej_of(q);
    // E_J = 0 is the bare inductive oscillator, kept as a limiting case.
    if (!(c > 0.0) || !(j > c || j == 0.0)) throw ValidationError("CircuitSpec: require E_J > E_C > 0");
    if (j > 0.0 && j / el < 10.0) {
      std::ostringstream msg;
      msg << "E_J/E_L = " << j / el << " below 10 for fluxonium " << q;
      warnings.push_back(msg.str());
    }
  }
  if (grid_points < 501 || grid_points % 2 == 0) throw ValidationError("CircuitSpec: grid_points must be odd and >= 501");
  if (!(grid_halfwidth > kPi)) throw ValidationError("CircuitSpec: grid_halfwidth must exceed pi");
  if (levels_kept < 2) throw ValidationError("CircuitSpec: levels_kept must be at least 2");
  return warnings;
}

PhaseGrid make_grid(const CircuitSpec& spec) {
  PhaseGrid g;
  g.phi = RVector::LinSpaced(spec.grid_points, -spec.grid_halfwidth, spec.grid_halfwidth);
  g.spacing = 2.0 * spec.grid_halfwidth / static_cast<double>(spec.grid_points - 1);
  return g;
}

std::pair<double, double> locate_well_minima(const CircuitSpec& spec, int qubit) {
  const double ej = spec.ej_of(qubit);
  const double els = spec.single_inductive_energy();
  const double flux = spec.flux_of(qubit);
  // V(phi) = -E_J cos(phi + flux) + (E_Ls/2) phi^2; Newton from each side.
  auto solve = [&](double start) {
    double x = start;
    for (int it = 0; it < 100; ++it) {
      const double d1 = ej * std::sin(x + flux) + els * x;
      const double d2 = ej * std::cos(x + flux) + els;
      if (d2 <= 0.0) throw ValidationError("locate_well_minima: potential has no well near +-pi");
      const double step = d1 / d2;
      x -= step;
      if (std::abs(step) < 1e-14) break;
    }
    return x;
  };
  return {solve(-kPi), solve(kPi)};
}

BandedHamiltonian fluxonium_bands(const CircuitSpec& spec, int qubit, double charge_offset) {
  check_qubit(spec, qubit);
  const PhaseGrid g = make_grid(spec);
  const double ec = spec.ec_of(qubit);
  const double ej = spec.ej_of(qubit);
  const double els = spec.single_inductive_energy();
  const double flux = spec.flux_of(qubit);
  const double hop = 4.0 * ec / (g.spacing * g.spacing);

  // -d^2/dphi^2 ~ (1, -16, 30, -16, 1) / 12 dx^2
  BandedHamiltonian h;
  h.charge_offset = charge_offset;
  h.spacing = g.spacing;
  h.bands = RMatrix::Zero(3, spec.grid_points);
  h.bands.row(0) = (2.5 * hop - ej * (g.phi.array() + flux).cos() + 0.5 * els * g.phi.array().square()).matrix().transpose();
  h.bands.row(1).setConstant(-hop * 16.0 / 12.0);
  h.bands.row(2).setConstant(hop / 12.0);
  return h;
}

namespace {

void check_grid_extent(const CircuitSpec& spec, int qubit) {
  const auto [left, right] = locate_well_minima(spec, qubit);
  const double curvature = spec.ej_of(qubit) * std::cos(right + spec.flux_of(qubit)) + spec.single_inductive_energy();
  const double width = std::pow(2.0 * spec.ec_of(qubit) / curvature, 0.25);
  const double reach = std::max(std::abs(left), std::abs(right)) + 3.0 * width;
  if (reach > spec.grid_halfwidth) {
    std::ostringstream msg;
    msg << "phase grid half-width " << spec.grid_halfwidth << " does not contain both wells (need " << reach << ")";
    throw ValidationError(msg.str());
  }
}

}  // namespace

HermitianOperator build_single_fluxonium(const CircuitSpec& spec, int qubit) {
  spec.validate();
  check_grid_extent(spec, qubit);
  const auto b = fluxonium_bands(spec, qubit, spec.charge_of(qubit));
  const Index n = b.bands.cols();
  CMatrix m = CMatrix::Zero(n, n);
  m.diagonal() = b.bands.row(0).transpose().cast<Complex>();
  for (Index r = 1; r < b.bands.rows(); ++r) {
    const Complex phase = std::polar(1.0, static_cast<double>(r) * b.charge_offset * b.spacing);
    for (Index i = 0; i + r < n; ++i) {
      m(i, i + r) = b.bands(r, i) * phase;
      m(i + r, i) = std::conj(m(i, i + r));
    }
  }
  return HermitianOperator(std::move(m));
}

FluxoniumSpectrum single_fluxonium_spectrum(const CircuitSpec& spec, int qubit, int levels) {
  spec.validate();
  check_grid_extent(spec, qubit);
  const auto b = fluxonium_bands(spec, qubit, spec.charge_of(qubit));
  Eigensystem eig = banded_lowest(b.bands, levels);
  FluxoniumSpectrum s;
  s.grid = make_grid(spec);
  s.energies = std::move(eig.values);
  // the offset is a pure gauge: psi_q(phi) = exp(-i q phi) psi_0(phi)
  const CVector gauge = (s.grid.phi.cast<Complex>() * Complex(0.0, -b.charge_offset)).array().exp();
  s.states = gauge.asDiagonal() * eig.vectors;
  s.well_minima = locate_well_minima(spec, qubit);
  s.inductive_energy = spec.single_inductive_energy();
  return s;
}

TruncatedFluxonium truncate_fluxonium(const CircuitSpec& spec, int qubit, int levels) {
  TruncatedFluxonium out;
  out.spectrum = single_fluxonium_spectrum(spec, qubit, levels);
  out.energies = out.spectrum.energies;
  const auto& v = out.spectrum.states;
  out.phase = v.adjoint() * out.spectrum.grid.phi.cast<Complex>().asDiagonal() * v;
  out.phase = 0.5 * (out.phase + out.phase.adjoint()).eval();
  return out;
}

CMatrix embed(const CMatrix& op, int site, const std::vector<Index>& dims) {
  CMatrix out = CMatrix::Identity(1, 1);
  for (int s = 0; s < static_cast<int>(dims.size()); ++s) {
    const CMatrix factor = s == site ? op : CMatrix::Identity(dims[static_cast<std::size_t>(s)], dims[static_cast<std::size_t>(s)]);
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

HermitianOperator assemble_coupled_circuit(const CircuitSpec& spec, const std::vector<TruncatedFluxonium>& parts) {
  const int nq = spec.num_qubits;
  std::vector<Index> dims;
  for (const auto& p : parts) dims.push_back(p.energies.size());
  Index total = 1;
  for (Index d : dims) total *= d;

  CMatrix h = CMatrix::Zero(total, total);
  for (int q = 0; q < nq; ++q) {
    h += embed(parts[static_cast<std::size_t>(q)].energies.cast<Complex>().asDiagonal().toDenseMatrix(), q, dims);
  }
  const double c = spec.coupling_scale * spec.coupling_energy();
  if (c != 0.0) {
    auto bond = [&](int a, int b) -> CMatrix {
      return embed(parts[static_cast<std::size_t>(a)].phase, a, dims) * embed(parts[static_cast<std::size_t>(b)].phase, b, dims);
    };
    if (nq == 2) {
      h += c * bond(0, 1);
    } else {
      for (int q = 0; q < nq; ++q) h -= c * bond(q, (q + 1) % nq);
    }
  }
  return HermitianOperator(std::move(h));
}

HermitianOperator build_coupled_circuit(const CircuitSpec& spec) {
  spec.validate();
  if (spec.levels_kept < 4) throw ValidationError("build_coupled_circuit: levels_kept must be at least 4");
  std::vector<TruncatedFluxonium> parts;
  for (int q = 0; q < spec.num_qubits; ++q) parts.push_back(truncate_fluxonium(spec, q, spec.levels_kept));
  return assemble_coupled_circuit(spec, parts);
}

double phase_expectation(const FluxoniumSpectrum& spectrum, const StateVector& state) {
  return (state.amplitudes().cwiseAbs2().array() * spectrum.grid.phi.array()).sum();
}

std::pair<StateVector, StateVector> well_states(const FluxoniumSpectrum& spectrum) {
  if (spectrum.energies.size() < 3) throw ValidationError("well_states: need at least three levels");
  const double split = spectrum.energies(1) - spectrum.energies(0);
  const double gap = spectrum.energies(2) - spectrum.energies(1);
  if (!(gap >= 5.0 * split)) {
    std::ostringstream msg;
    msg << "well_states: doublet splitting " << split << " not separated from third level (gap " << gap << ")";
    throw DegeneracyError(msg.str());
  }
  CVector a = spectrum.states.col(0);
  CVector b = spectrum.states.col(1);
  // Fix relative phase so that a + b is localized: make <a|phi|b> real positive.
  const Complex phase_elem = a.dot(spectrum.grid.phi.cast<Complex>().asDiagonal() * b);
  if (std::abs(phase_elem) > 0.0) b *= std::conj(phase_elem) / std::abs(phase_elem);
  StateVector plus((a + b) / std::sqrt(2.0));
  StateVector minus((a - b) / std::sqrt(2.0));
  if (phase_expectation(spectrum, plus) < phase_expectation(spectrum, minus)) return {plus, minus};
  return {minus, plus};
}

}  // namespace ceq
