#include "ceq/drive.hpp"

#include <cmath>
#include <sstream>

#include "ceq/spin.hpp"

namespace ceq {

void DriveSpec::validate() const {
  if (!(alpha_bar >= 0.0) || !std::isfinite(alpha_bar)) throw ValidationError("DriveSpec: alpha_bar must be >= 0");
  if (mode == DriveMode::high_frequency && !(drive_omega > 0.0))
    throw ValidationError("DriveSpec: drive_omega must be positive");
  if (driven_qubit < 0) throw ValidationError("DriveSpec: driven_qubit must be >= 0");
}

double averaged_field_factor(double alpha_bar, int nodes) {
  if (nodes < 8) throw ValidationError("averaged_field_factor: need at least 8 nodes");
  double sum = 0.0;
  for (int k = 0; k < nodes; ++k) sum += std::cos(alpha_bar * std::sin(kTwoPi * k / nodes));
  return sum / nodes;
}

double peierls_charge_amplitude(double alpha_bar, double phi_m) {
  if (!(phi_m > 0.0)) throw ValidationError("peierls_charge_amplitude: phi_m must be positive");
  return alpha_bar / (2.0 * phi_m);
}

TimeDependentOperator peierls_rotated_hamiltonian(const SpinModel& model, const PhaseFunction& phi,
                                                  int driven_qubit, double max_frequency, DriveForm form) {
  model.validate();
  const int n = model.num_spins;
  if (driven_qubit < 0 || driven_qubit >= n) throw ValidationError("peierls_rotated_hamiltonian: driven qubit out of range");

  TimeDependentOperator op;
  if (form == DriveForm::full) {
    const CMatrix hx = model.kappa * pauli(Axis::x, driven_qubit, n);
    op = TimeDependentOperator(HermitianOperator(build_spin_hamiltonian(model).matrix() + hx));
    op.add(HermitianOperator(-hx), [phi](double t) { return std::cos(phi(t)); });
    op.add(HermitianOperator(-model.kappa * pauli(Axis::y, driven_qubit, n)),
           [phi](double t) { return std::sin(phi(t)); });
  } else {
    if (n != 2) throw ValidationError("peierls_rotated_hamiltonian: effective form is defined for L=2");
    const int other = 1 - driven_qubit;
    const auto b = bias_pattern(model.h, 2);
    // J kept static so the parallel states stay out of the logical doublet
    const CMatrix bias = b[0] * pauli(Axis::z, 0, 2) + b[1] * pauli(Axis::z, 1, 2) +
                         model.J * pauli(Axis::z, 0, 2) * pauli(Axis::z, 1, 2);
    op = TimeDependentOperator(HermitianOperator(bias));
    const CMatrix sx = pauli(Axis::x, other, 2);
    op.add(HermitianOperator(-model.omega0 * sx * pauli(Axis::x, driven_qubit, 2)),
           [phi](double t) { return std::cos(phi(t)); });
    op.add(HermitianOperator(-model.omega0 * sx * pauli(Axis::y, driven_qubit, 2)),
           [phi](double t) { return std::sin(phi(t)); });
  }
  op.set_max_frequency(max_frequency);
  return op;
}

namespace {

Index sample_stride(double duration, double dt, Index target) {
  const auto steps = static_cast<Index>(std::ceil(duration / dt));
  return std::max<Index>(1, steps / std::max<Index>(target, 1));
}

RabiResult fit_rabi(RabiResult r, const FloppingFitOptions& options) {
  const FloppingFit f = fit_flopping(r.times, r.population, options);
  r.rabi_rate = 0.5 * f.omega;
  r.contrast = std::min(1.0, f.amplitude);
  r.fit_residual = f.residual;
  return r;
}

}  // namespace

RabiResult resonant_rabi(const SpinModel& model, double alpha_bar, double duration, const RabiOptions& options) {
  model.validate();
  if (!(alpha_bar >= 0.0)) throw ValidationError("resonant_rabi: alpha_bar must be >= 0");
  if (!(duration > 0.0)) throw ValidationError("resonant_rabi: duration must be positive");
  if (!(model.h >= 5.0 * model.omega0)) throw ValidationError("resonant_rabi: need h >= 5 omega0");

  const auto static_op = peierls_rotated_hamiltonian(model, [](double) { return 0.0; }, options.driven_qubit, 1.0, options.form);
  const HermitianOperator h0 = static_op.at(0.0);
  const LogicalSubspace ls = logical_subspace(h0, logical_label_operator(model.num_spins), 0.5);
  const double w = ls.splitting;

  auto op = peierls_rotated_hamiltonian(
      model, [alpha_bar, w](double t) { return alpha_bar * std::sin(w * t); }, options.driven_qubit, w, options.form);
  op.add_static(HermitianOperator(CMatrix(-ls.mean_energy * CMatrix::Identity(h0.dim(), h0.dim()))));

  const double dt = kTwoPi / w / options.steps_per_period;
  const CVector one = ls.one_L.amplitudes();
  // RK4 while the step is inside its stability region; an exponential
  // integrator once J sits far above the drive frequency
  const double bound = op.matrix_at(0.0).cwiseAbs().colwise().sum().maxCoeff();
  const auto trace = [&](double length) {
    // stroboscopic samples: whole drive periods hide the micromotion
    const Index stride = options.steps_per_period * sample_stride(length, kTwoPi / w, options.target_samples);
    const double span = std::ceil(length / (stride * dt)) * stride * dt;
    RabiResult r;
    r.drive_omega = w;
    r.times.push_back(0.0);
    r.population.push_back(0.0);
    Index step = 0;
    const auto observe = [&](double t, const CVector& psi) {
      if (++step % stride == 0) {
        r.times.push_back(t);
        r.population.push_back(std::norm(one.dot(psi)));
      }
    };
    if (bound * dt < 2.0) {
      propagate_timedep(ls.zero_L, op, 0.0, span, dt, observe);
    } else {
      propagate_magnus(ls.zero_L, op, 0.0, span, dt, observe);
    }
    return r;
  };

  // near a zero of the rate the trace is lengthened until it holds enough periods
  double length = duration;
  for (int k = 0; k < options.extensions; ++k, length *= 2.0) {
    RabiResult r = trace(length);
    FloppingFitOptions relaxed = options.fit;
    relaxed.min_periods = 0.0;
    const FloppingFit f = fit_flopping(r.times, r.population, relaxed);
    if (!f.oscillating || f.omega * r.times.back() / kTwoPi >= options.fit.min_periods) return fit_rabi(std::move(r), options.fit);
  }
  return fit_rabi(trace(length), options.fit);
}

CircuitRabiResult resonant_rabi_circuit(const CircuitSpec& spec, double alpha_bar, double duration,
                                        const RabiOptions& options) {
  spec.validate();
  if (spec.levels_kept < 4) throw ValidationError("resonant_rabi_circuit: levels_kept must be at least 4");
  if (!(alpha_bar >= 0.0)) throw ValidationError("resonant_rabi_circuit: alpha_bar must be >= 0");
  const int d = options.driven_qubit;
  if (d < 0 || d >= spec.num_qubits) throw ValidationError("resonant_rabi_circuit: driven qubit out of range");

  const CircuitLogical cl = circuit_logical_subspace(spec);
  const HermitianOperator& h0 = cl.hamiltonian;
  const auto& parts = cl.parts;
  const auto& dims = cl.dims;
  const LogicalSubspace& ls = cl.subspace;
  const double w = ls.splitting;
  const double phi_m = locate_well_minima(spec, d).second;
  const double q0 = peierls_charge_amplitude(alpha_bar, phi_m);

  TimeDependentOperator op(h0 + HermitianOperator(CMatrix(-ls.mean_energy * CMatrix::Identity(h0.dim(), h0.dim()))));
  op.add(HermitianOperator(embed(parts[static_cast<std::size_t>(d)].phase, d, dims)),
         [q0, w](double t) { return -q0 * w * std::cos(w * t); });
  op.set_max_frequency(w);

  const double dt = kTwoPi / w / options.steps_per_period;
  const Index stride = options.steps_per_period * sample_stride(duration, kTwoPi / w, options.target_samples);
  CircuitRabiResult out;
  out.splitting = w;
  out.charge_amplitude = q0;
  RabiResult& r = out.rabi;
  r.drive_omega = w;
  const CVector one = ls.one_L.amplitudes();
  r.times.push_back(0.0);
  r.population.push_back(0.0);
  Index step = 0;
  // whole drive periods: Q(t) vanishes there and the micromotion drops out
  const double span = std::ceil(duration / (stride * dt)) * stride * dt;
  propagate_magnus(
      ls.zero_L, op, 0.0, span, dt,
      [&](double t, const CVector& psi) {
        if (++step % stride == 0) {
          r.times.push_back(t);
          r.population.push_back(std::norm(one.dot(psi)));
        }
      },
      MagnusOrder::second);
  out.rabi = fit_rabi(std::move(r), options.fit);
  return out;
}

namespace {

FlopTrace finish_trace(FlopTrace tr) {
  for (double t : tr.time) {
    const double s = std::sin(tr.s * tr.kappa * t);
    tr.prediction.push_back(s * s);
  }
  tr.predicted_omega = 2.0 * std::abs(tr.s) * tr.kappa;
  const FloppingFit f = fit_flopping(tr.time, tr.population);
  tr.fitted_omega = f.omega;
  return tr;
}

}  // namespace

FlopTrace high_frequency_average(const CircuitSpec& spec, const DriveSpec& drive, double duration) {
  spec.validate();
  drive.validate();
  if (drive.mode != DriveMode::high_frequency) throw ValidationError("high_frequency_average: drive must be in high_frequency mode");
  const int qubit = drive.driven_qubit;
  if (qubit >= spec.num_qubits) throw ValidationError("high_frequency_average: driven qubit out of range");
  if (spec.levels_kept < 3) throw ValidationError("high_frequency_average: levels_kept must be at least 3");
  if (!(duration > 0.0)) throw ValidationError("high_frequency_average: duration must be positive");

  const TruncatedFluxonium tf = truncate_fluxonium(spec, qubit, spec.levels_kept);
  const RVector& e = tf.energies;
  const double kappa = 0.5 * (e(1) - e(0));
  const double e2 = e(2) - e(0);
  const double w = drive.drive_omega;
  if (w < 10.0 * kappa || w > e2 / 10.0) {
    std::ostringstream msg;
    msg << "high_frequency_average: drive_omega " << w << " outside [10 kappa, E2/10] = [" << 10.0 * kappa << ", "
        << e2 / 10.0 << "]";
    throw ValidationError(msg.str());
  }
  const double phi_m = locate_well_minima(spec, qubit).second;
  const double q0 = peierls_charge_amplitude(drive.alpha_bar, phi_m);
  // drive term -dQ/dt phi has amplitude q0 w |phi_kl| on each transition
  for (Index k = 2; k < e.size(); ++k) {
    for (Index l = 0; l < 2; ++l) {
      const double gap = e(k) - e(l);
      const double width = q0 * w * std::abs(tf.phase(l, k));
      if (std::abs(w - gap) < 3.0 * width) {
        std::ostringstream msg;
        msg << "high_frequency_average: drive at " << w << " collides with transition " << l << "->" << k << " at " << gap;
        throw ValidationError(msg.str());
      }
    }
  }

  const Index m = e.size();
  TimeDependentOperator op(HermitianOperator(CMatrix((e.array() - 0.5 * (e(0) + e(1))).matrix().cast<Complex>().asDiagonal())));
  op.add(HermitianOperator(tf.phase), [q0, w](double t) { return -q0 * w * std::cos(w * t); });
  op.set_max_frequency(w);

  CVector start = CVector::Zero(m);
  start(0) = 1.0;
  start(1) = 1.0;
  const StateVector psi0(start);
  // projector on the half-line opposite to the starting well, in the truncated basis
  const double side = psi0.amplitudes().dot(tf.phase * psi0.amplitudes()).real();
  const auto& grid = tf.spectrum.grid.phi;
  const auto& v = tf.spectrum.states;
  RVector mask = RVector::Zero(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    if (grid(i) * side < 0.0) mask(i) = 1.0;
  const CMatrix proj = v.adjoint() * mask.cast<Complex>().asDiagonal() * v;

  FlopTrace tr;
  tr.kappa = kappa;
  tr.s = averaged_field_factor(drive.alpha_bar);
  const double dt = default_timestep(w);
  const Index stride = sample_stride(duration, dt, 2000);
  auto record = [&](double t, const CVector& psi) {
    tr.time.push_back(t);
    tr.population.push_back(psi.dot(proj * psi).real());
  };
  record(0.0, psi0.amplitudes());
  Index step = 0;
  propagate_magnus(
      psi0, op, 0.0, duration, dt,
      [&](double t, const CVector& psi) {
        if (++step % stride == 0) record(t, psi);
      },
      MagnusOrder::second);
  return finish_trace(std::move(tr));
}

FlopTrace high_frequency_average(const SpinModel& model, const DriveSpec& drive, double duration) {
  drive.validate();
  if (drive.mode != DriveMode::high_frequency) throw ValidationError("high_frequency_average: drive must be in high_frequency mode");
  if (!(model.kappa > 0.0)) throw ValidationError("high_frequency_average: kappa must be positive");
  const double w = drive.drive_omega;
  if (w < 10.0 * model.kappa) throw ValidationError("high_frequency_average: drive_omega below 10 kappa");
  if (!(duration > 0.0)) throw ValidationError("high_frequency_average: duration must be positive");

  const double a = drive.alpha_bar;
  TimeDependentOperator op(HermitianOperator::zero(2));
  op.add(HermitianOperator(-model.kappa * pauli(Axis::x)), [a, w](double t) { return std::cos(a * std::sin(w * t)); });
  op.add(HermitianOperator(-model.kappa * pauli(Axis::y)), [a, w](double t) { return std::sin(a * std::sin(w * t)); });
  op.set_max_frequency(w);

  FlopTrace tr;
  tr.kappa = model.kappa;
  tr.s = averaged_field_factor(a);
  const double dt = default_timestep(w);
  const Index stride = sample_stride(duration, dt, 2000);
  tr.time.push_back(0.0);
  tr.population.push_back(0.0);
  Index step = 0;
  propagate_timedep(StateVector::basis(2, 0), op, 0.0, duration, dt, [&](double t, const CVector& psi) {
    if (++step % stride == 0) {
      tr.time.push_back(t);
      tr.population.push_back(std::norm(psi(1)));
    }
  });
  return finish_trace(std::move(tr));
}

}  // namespace ceq
