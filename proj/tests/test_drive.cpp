#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "ceq/drive.hpp"
#include "ceq/spin.hpp"

using namespace ceq;

namespace {

CircuitSpec deep_wells(double ej_over_ec, double ej_over_el) {
  CircuitSpec s;
  s.ec = 1.0;
  s.ej = ej_over_ec;
  s.el = ej_over_ec / ej_over_el;
  return s;
}

// resonant sweeps: kappa/J small enough that multiphoton and Bloch-Siegert
// shifts stay below a percent
SpinModel sweep_model() {
  const double w = make_spin_model(0.03, 1.0, 0.0, 2).omega0;
  return make_spin_model(0.03, 1.0, 50.0 * w, 2);
}

double max_dev(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("constant Peierls phases rotate the driven transverse field") {
  const SpinModel m = make_spin_model(0.1, 1.0, 0.3, 2);
  const CMatrix h0 = build_spin_hamiltonian(m).matrix();
  for (int d : {0, 1}) {
    const auto at = [&](double phi) {
      return peierls_rotated_hamiltonian(m, [phi](double) { return phi; }, d, 1.0).matrix_at(0.7);
    };
    CHECK(max_dev(at(0.0), h0) < 1e-14);
    CHECK(max_dev(at(kPi), h0 + 2.0 * m.kappa * pauli(Axis::x, d, 2)) < 1e-14);
    CHECK(max_dev(at(0.5 * kPi), h0 + m.kappa * pauli(Axis::x, d, 2) - m.kappa * pauli(Axis::y, d, 2)) < 1e-14);
  }
  CHECK_THROWS_AS(peierls_rotated_hamiltonian(m, [](double) { return 0.0; }, 2, 1.0), ValidationError);
}

TEST_CASE("effective two-level form reproduces the logical doublet") {
  const SpinModel m = make_spin_model(0.05, 1.0, 0.02, 2);
  const auto full = peierls_rotated_hamiltonian(m, [](double) { return 0.0; }, 0, 1.0);
  const auto eff = peierls_rotated_hamiltonian(m, [](double) { return 0.0; }, 0, 1.0, DriveForm::effective);
  const auto ls_full = logical_subspace(full.at(0.0), logical_label_operator(2), 0.5);
  const auto ls_eff = logical_subspace(eff.at(0.0), logical_label_operator(2), 0.5);
  CHECK(ls_eff.splitting == doctest::Approx(std::hypot(m.h, 2.0 * m.omega0)).epsilon(1e-12));
  CHECK(ls_eff.splitting == doctest::Approx(ls_full.splitting).epsilon(0.02));
  CHECK(std::norm(ls_eff.zero_L.amplitudes().dot(ls_full.zero_L.amplitudes())) > 0.99);

  SpinModel ring = make_spin_model(0.05, 1.0, 0.02, 3);
  CHECK_THROWS_AS(peierls_rotated_hamiltonian(ring, [](double) { return 0.0; }, 0, 1.0, DriveForm::effective),
                  ValidationError);
}

TEST_CASE("averaged field factor is the zeroth Bessel function") {
  for (double a : {0.0, 0.3, 1.0, 1.25, 1.5, 1.9, 2.405, 3.0, 5.0}) {
    CHECK(std::abs(averaged_field_factor(a) - std::cyl_bessel_j(0.0, a)) < 1e-8);
  }
  // first zero
  CHECK(std::abs(averaged_field_factor(2.404825557695773)) < 1e-12);
  CHECK_THROWS_AS(averaged_field_factor(1.0, 4), ValidationError);
}

TEST_CASE("charge amplitude maps onto the Peierls amplitude") {
  CHECK(2.0 * 2.9 * peierls_charge_amplitude(1.84, 2.9) == doctest::Approx(1.84));
  CHECK_THROWS_AS(peierls_charge_amplitude(1.0, 0.0), ValidationError);
}

TEST_CASE("drive spec validation") {
  DriveSpec d;
  CHECK_NOTHROW(d.validate());
  d.alpha_bar = -1.0;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.alpha_bar = 1.0;
  d.mode = DriveMode::high_frequency;
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.drive_omega = 1.0;
  CHECK_NOTHROW(d.validate());
  d.driven_qubit = -1;
  CHECK_THROWS_AS(d.validate(), ValidationError);
}

TEST_CASE("resonant Rabi: no drive, no flopping") {
  const SpinModel m = sweep_model();
  const auto r = resonant_rabi(m, 0.0, 50.0 / m.omega0);
  CHECK(r.rabi_rate == 0.0);
  CHECK(r.contrast < 1e-6);
}

TEST_CASE("resonant Rabi rate follows the first Bessel function") {
  const SpinModel m = sweep_model();
  const double w = m.omega0;
  double peak = 0.0;
  for (double a : {0.5, 1.0, 1.84, 2.5, 3.0}) {
    const auto r = resonant_rabi(m, a, 300.0 / w);
    const double f = r.rabi_rate / (0.5 * w);
    CHECK(std::abs(f - 2.0 * std::cyl_bessel_j(1.0, a)) < 0.1 * 1.1637);
    CHECK(r.contrast > 0.95);
    peak = std::max(peak, r.rabi_rate);
    if (a == 1.84) CHECK(r.rabi_rate / w == doctest::Approx(0.59).epsilon(0.1));
  }
  CHECK(peak <= 0.62 * w);
}

TEST_CASE("slow flopping near the Bessel zero lengthens the trace") {
  const SpinModel m = sweep_model();
  const auto r = resonant_rabi(m, 3.8, 300.0 / m.omega0);
  CHECK(r.times.back() > 500.0 / m.omega0);
  CHECK(r.rabi_rate / (0.5 * m.omega0) == doctest::Approx(2.0 * std::cyl_bessel_j(1.0, 3.8)).epsilon(0.1));
  RabiOptions fixed;
  fixed.extensions = 0;
  CHECK_THROWS_AS(resonant_rabi(m, 3.8, 300.0 / m.omega0, fixed), FitError);
}

TEST_CASE("resonant Rabi is symmetric in the driven qubit") {
  const SpinModel m = sweep_model();
  RabiOptions o;
  o.driven_qubit = 1;
  const double a = resonant_rabi(m, 1.0, 100.0 / m.omega0).rabi_rate;
  const double b = resonant_rabi(m, 1.0, 100.0 / m.omega0, o).rabi_rate;
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("effective form gives the same Rabi rate") {
  const SpinModel m = sweep_model();
  RabiOptions o;
  o.form = DriveForm::effective;
  const double full = resonant_rabi(m, 1.5, 150.0 / m.omega0).rabi_rate;
  const double eff = resonant_rabi(m, 1.5, 150.0 / m.omega0, o).rabi_rate;
  CHECK(eff == doctest::Approx(full).epsilon(0.02));
  CHECK(eff / m.omega0 == doctest::Approx(std::cyl_bessel_j(1.0, 1.5)).epsilon(0.01));
}

TEST_CASE("resonant Rabi rejects a weak bias") {
  const SpinModel m = make_spin_model(0.03, 1.0, 0.0, 2);
  CHECK_THROWS_AS(resonant_rabi(m, 1.0, 10.0 / m.omega0), ValidationError);
  CHECK_THROWS_AS(resonant_rabi(sweep_model(), 1.0, -1.0), ValidationError);
  CHECK_THROWS_AS(resonant_rabi(sweep_model(), -1.0, 1.0), ValidationError);
}

TEST_CASE("stiff spin model still propagates") {
  // J/kappa ~ 1000: the drive step is far outside the RK4 stability region
  const double w = make_spin_model(1e-3, 1.0, 0.0, 2).omega0;
  const SpinModel m = make_spin_model(1e-3, 1.0, 20.0 * w, 2);
  const auto r = resonant_rabi(m, 1.0, 60.0 / w);
  CHECK(r.rabi_rate / w == doctest::Approx(std::cyl_bessel_j(1.0, 1.0)).epsilon(0.03));
}

TEST_CASE("circuit and spin model give the same Rabi rate") {
  CircuitSpec s = deep_wells(15.0, 80.0);
  const auto ex0 = extract_spin_params(s);
  const double om = ex0.model.omega0;
  const double d = 20.0 * om / (4.0 * kPi * s.single_inductive_energy());
  s.fluxes = {kPi + d, kPi - d};
  const auto ex = extract_spin_params(s);
  REQUIRE(ex.model.h > 5.0 * om);

  const auto circ = resonant_rabi_circuit(s, 1.84, 30.0 / om);
  CHECK(circ.splitting == doctest::Approx(std::hypot(ex.model.h, 2.0 * om)).epsilon(1e-6));

  const double spin_w = make_spin_model(ex0.model.kappa, ex0.model.J, 0.0, 2).omega0;
  const SpinModel spin = make_spin_model(ex0.model.kappa, ex0.model.J, ex.model.h / om * spin_w, 2);
  const auto rs = resonant_rabi(spin, 1.84, 30.0 / spin_w);
  CHECK(circ.rabi.rabi_rate / om == doctest::Approx(rs.rabi_rate / spin_w).epsilon(0.15));
  CHECK(circ.rabi.rabi_rate / om == doctest::Approx(0.59).epsilon(0.1));
}

TEST_CASE("charge drive: Peierls and length gauges are related by exp(iQ phi)") {
  CircuitSpec s;
  s.ej = 4.0;
  s.el = 0.4;
  s.grid_points = 501;
  const double w = 0.7;
  const double q0 = 0.1;
  const auto q = [=](double t) { return q0 * std::sin(w * t); };
  const PhaseGrid g = make_grid(s);
  const CMatrix h0 = build_single_fluxonium(s, 0).matrix();
  CMatrix phi = CMatrix::Zero(g.phi.size(), g.phi.size());
  phi.diagonal() = g.phi.cast<Complex>();
  TimeDependentOperator len{HermitianOperator(h0)};
  len.add(HermitianOperator(phi), [=](double t) { return -q0 * w * std::cos(w * t); });

  for (double t : {0.0, 0.4, 1.3, 2.9}) {
    CircuitSpec sv = s;
    sv.charge_offsets = {q(t), 0.0};
    const CMatrix vel = build_single_fluxonium(sv, 0).matrix();
    const CVector u = (Complex(0.0, 1.0) * q(t) * g.phi.cast<Complex>()).array().exp().matrix();
    // U H U^+ + i dU/dt U^+ with U = exp(i Q phi)
    const CMatrix moved = u.asDiagonal() * vel * u.conjugate().asDiagonal() - q0 * w * std::cos(w * t) * phi;
    CHECK((moved - len.matrix_at(t)).cwiseAbs().maxCoeff() < 1e-9 * h0.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("high-frequency drive renormalizes the tunnelling by J0") {
  CircuitSpec s = deep_wells(15.0, 80.0);
  const double kappa = extract_spin_params(s).model.kappa;
  for (double a : {1.0, 1.25, 1.5, 1.9}) {
    DriveSpec d;
    d.mode = DriveMode::high_frequency;
    d.alpha_bar = a;
    d.drive_omega = 12.0 * kappa;
    const auto tr = high_frequency_average(s, d, 40.0 / kappa);
    CHECK(tr.s == doctest::Approx(std::cyl_bessel_j(0.0, a)).epsilon(1e-8));
    CHECK(tr.fitted_omega == doctest::Approx(tr.predicted_omega).epsilon(0.05));
    d.drive_omega *= 2.0;
    const auto tr2 = high_frequency_average(s, d, 40.0 / kappa);
    CHECK(tr2.fitted_omega == doctest::Approx(tr.fitted_omega).epsilon(0.02));
  }
}

TEST_CASE("high-frequency drive at the J0 zero freezes tunnelling") {
  CircuitSpec s = deep_wells(15.0, 80.0);
  const double kappa = extract_spin_params(s).model.kappa;
  DriveSpec d;
  d.mode = DriveMode::high_frequency;
  d.alpha_bar = 2.404825557695773;
  d.drive_omega = 12.0 * kappa;
  const auto tr = high_frequency_average(s, d, 40.0 / kappa);
  CHECK(*std::max_element(tr.population.begin(), tr.population.end()) < 0.05);
}

TEST_CASE("high-frequency drive: two-level version and validation") {
  const SpinModel m = make_spin_model(0.01, 1.0, 0.0, 2);
  DriveSpec d;
  d.mode = DriveMode::high_frequency;
  d.alpha_bar = 1.5;
  d.drive_omega = 20.0 * m.kappa;
  const auto tr = high_frequency_average(m, d, 40.0 / m.kappa);
  CHECK(tr.fitted_omega == doctest::Approx(2.0 * std::cyl_bessel_j(0.0, 1.5) * m.kappa).epsilon(0.02));
  REQUIRE(tr.prediction.size() == tr.time.size());

  CircuitSpec s = deep_wells(15.0, 80.0);
  d.drive_omega = 1e-6;
  CHECK_THROWS_AS(high_frequency_average(s, d, 1.0), ValidationError);
  d.drive_omega = 100.0;
  CHECK_THROWS_AS(high_frequency_average(s, d, 1.0), ValidationError);
  d.mode = DriveMode::resonant;
  CHECK_THROWS_AS(high_frequency_average(s, d, 1.0), ValidationError);
}
