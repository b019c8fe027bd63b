#include "doctest.h"

#include <cmath>

#include "ceq/circuit.hpp"

using namespace ceq;

namespace {

CircuitSpec deep_wells(double ej_over_ec, double ej_over_el) {
  CircuitSpec s;
  s.ec = 1.0;
  s.ej = ej_over_ec;
  s.el = ej_over_ec / ej_over_el;
  return s;
}

}  // namespace

TEST_CASE("spec validation") {
  CircuitSpec s;
  CHECK(s.validate().empty());
  s.num_qubits = 4;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = CircuitSpec{};
  s.grid_points = 2000;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = CircuitSpec{};
  s.gamma = 1.5;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = CircuitSpec{};
  s.ej = 0.5;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = CircuitSpec{};
  s.fluxes = {kPi};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s = CircuitSpec{};
  s.el = s.ej / 5.0;
  CHECK(s.validate().size() == 2);
}

TEST_CASE("inductive energies") {
  CircuitSpec s;
  s.el = 0.9;
  s.gamma = 0.5;
  CHECK(s.single_inductive_energy() == doctest::Approx(0.9 * 1.5 / 2.5));
  CHECK(s.coupling_energy() == doctest::Approx(0.9 / 2.5));
  s.num_qubits = 3;
  CHECK(s.single_inductive_energy() == doctest::Approx(1.8));
  CHECK(s.coupling_energy() == doctest::Approx(0.9));
}

TEST_CASE("bare inductor gives harmonic ladder") {
  CircuitSpec s;
  s.ej = 0.0;
  s.el = 1.5;
  const auto sp = single_fluxonium_spectrum(s, 0, 6);
  const double w = std::sqrt(8.0 * s.ec * s.single_inductive_energy());
  for (Index k = 0; k + 1 < 6; ++k) CHECK(sp.energies(k + 1) - sp.energies(k) == doctest::Approx(w).epsilon(0.005));
}

TEST_CASE("static charge offset leaves the spectrum unchanged") {
  CircuitSpec s = deep_wells(10.0, 20.0);
  const auto ref = single_fluxonium_spectrum(s, 0, 6).energies;
  for (double q : {0.25, 0.5, 1.0, 0.1234}) {
    s.charge_offsets = {q, 0.0};
    const auto e = single_fluxonium_spectrum(s, 0, 6).energies;
    for (Index k = 0; k < 6; ++k) CHECK(std::abs(e(k) - ref(k)) <= 1e-8 * std::abs(ref(k)));
  }
}

TEST_CASE("dense and banded paths agree, with and without offset") {
  CircuitSpec s = deep_wells(8.0, 20.0);
  s.grid_points = 501;
  for (double q : {0.0, 0.5}) {
    s.charge_offsets = {q, 0.0};
    const auto dense = eigendecompose(build_single_fluxonium(s, 0), 6);
    const auto tri = single_fluxonium_spectrum(s, 0, 6);
    for (Index k = 0; k < 6; ++k) CHECK(tri.energies(k) == doctest::Approx(dense.values(k)).epsilon(1e-10));
  }
  s.charge_offsets = {0.0, 0.0};
  const auto e0 = eigendecompose(build_single_fluxonium(s, 0), 6).values;
  s.charge_offsets = {0.37, 0.0};
  const auto e1 = eigendecompose(build_single_fluxonium(s, 0), 6).values;
  for (Index k = 0; k < 6; ++k) CHECK(std::abs(e1(k) - e0(k)) <= 1e-8 * std::abs(e0(k)));
}

TEST_CASE("grid must contain both wells") {
  CircuitSpec s;
  s.grid_halfwidth = 3.3;
  CHECK_THROWS_AS(build_single_fluxonium(s, 0), ValidationError);
  CHECK_THROWS_AS(single_fluxonium_spectrum(s, 0, 4), ValidationError);
}

TEST_CASE("well minima near +-(pi - E_Ls/E_J)") {
  const CircuitSpec s = deep_wells(15.0, 80.0);
  const auto [left, right] = locate_well_minima(s, 0);
  const double expect = kPi - s.single_inductive_energy() / s.ej;
  CHECK(right == doctest::Approx(expect).epsilon(0.02));
  CHECK(left == doctest::Approx(-expect).epsilon(0.02));
  // stationarity of V = -E_J cos(phi + pi) + (E_Ls/2) phi^2
  CHECK(std::abs(s.ej * std::sin(right + kPi) + s.single_inductive_energy() * right) < 1e-12);
}

TEST_CASE("well states") {
  const CircuitSpec s = deep_wells(15.0, 80.0);
  const auto sp = single_fluxonium_spectrum(s, 0, 4);
  const auto [left, right] = well_states(sp);
  const double pl = phase_expectation(sp, left);
  const double pr = phase_expectation(sp, right);
  CHECK(pl < 0.0);
  CHECK(pr > 0.0);
  CHECK(std::abs(std::abs(pl) - std::abs(pr)) < 1e-6);
  CHECK(pr == doctest::Approx(kPi - s.single_inductive_energy() / s.ej).epsilon(0.02));

  const auto sp10 = single_fluxonium_spectrum(deep_wells(10.0, 20.0), 0, 4);
  const auto [l10, r10] = well_states(sp10);
  // direct sum over the grid, ignoring the library's overlap helper
  Complex ov = 0.0;
  for (Index i = 0; i < l10.dim(); ++i) ov += std::conj(l10[i]) * r10[i];
  CHECK(std::abs(ov) < 1e-3);
  // well localization: most weight on the proper side
  double right_weight = 0.0;
  for (Index i = 0; i < r10.dim(); ++i)
    if (sp10.grid.phi(i) > 0.0) right_weight += std::norm(r10[i]);
  CHECK(right_weight > 0.99);
}

TEST_CASE("well states need a resolved doublet") {
  CircuitSpec s;
  s.ej = 1.1;
  s.el = 0.11;
  const auto sp = single_fluxonium_spectrum(s, 0, 4);
  CHECK_THROWS_AS(well_states(sp), DegeneracyError);
}

TEST_CASE("doublet splitting falls exponentially in sqrt(E_J/E_C)") {
  std::vector<double> x, y;
  for (double r : {5.0, 8.0, 12.0, 16.0, 20.0, 25.0, 30.0, 35.0, 40.0}) {
    const auto sp = single_fluxonium_spectrum(deep_wells(r, 20.0), 0, 2);
    x.push_back(std::sqrt(r));
    y.push_back(std::log(sp.energies(1) - sp.energies(0)));
  }
  for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i] < y[i - 1]);
  const Eigen::Map<RVector> xv(x.data(), static_cast<Index>(x.size()));
  const Eigen::Map<RVector> yv(y.data(), static_cast<Index>(y.size()));
  const double mx = xv.mean(), my = yv.mean();
  const double sxy = ((xv.array() - mx) * (yv.array() - my)).sum();
  const double sxx = (xv.array() - mx).square().sum();
  const double syy = (yv.array() - my).square().sum();
  const double r2 = sxy * sxy / (sxx * syy);
  CHECK(r2 >= 0.98);
}

TEST_CASE("grid convergence of the low spectrum") {
  CircuitSpec s;
  const auto coarse = single_fluxonium_spectrum(s, 0, 6).energies;
  s.grid_points = 2 * s.grid_points - 1;
  const auto fine = single_fluxonium_spectrum(s, 0, 6).energies;
  for (Index k = 0; k < 6; ++k) CHECK(std::abs(fine(k) - coarse(k)) <= 1e-6 * std::abs(fine(k)));
}

TEST_CASE("truncated phase operator") {
  const CircuitSpec s;
  const auto t = truncate_fluxonium(s, 0, 6);
  CHECK(hermiticity_defect(t.phase) < 1e-14);
  // doublet: <0|phi|0> vanishes at the symmetric point, <0|phi|1> is the well position
  CHECK(std::abs(t.phase(0, 0)) < 1e-8);
  CHECK(std::abs(t.phase(0, 1)) > 2.5);
}

TEST_CASE("decoupled circuit is a sum of single energies") {
  for (int L : {2, 3}) {
    CircuitSpec s;
    s.num_qubits = L;
    s.levels_kept = 4;
    s.coupling_scale = 0.0;
    s.fluxes.assign(static_cast<std::size_t>(L), kPi);
    s.fluxes[0] = kPi + 0.01;
    const auto h = build_coupled_circuit(s);
    CHECK(h.dim() == (L == 2 ? 16 : 64));
    const auto e = eigendecompose(h).values;
    std::vector<double> sums{0.0};
    for (int q = 0; q < L; ++q) {
      const auto eq = single_fluxonium_spectrum(s, q, 4).energies;
      std::vector<double> next;
      for (double a : sums)
        for (Index k = 0; k < 4; ++k) next.push_back(a + eq(k));
      sums = next;
    }
    std::sort(sums.begin(), sums.end());
    for (Index k = 0; k < e.size(); ++k) CHECK(std::abs(e(k) - sums[static_cast<std::size_t>(k)]) < 1e-9);
  }
}

TEST_CASE("coupled circuit needs four levels") {
  CircuitSpec s;
  s.levels_kept = 3;
  CHECK_THROWS_AS(build_coupled_circuit(s), ValidationError);
}

TEST_CASE("coupled ground doublets: antiferro for two, ferro for three") {
  for (int L : {2, 3}) {
    CircuitSpec s = deep_wells(8.0, 80.0);
    s.num_qubits = L;
    s.levels_kept = 5;
    std::vector<TruncatedFluxonium> parts;
    for (int q = 0; q < L; ++q) parts.push_back(truncate_fluxonium(s, q, s.levels_kept));
    const auto h = assemble_coupled_circuit(s, parts);
    const auto eig = eigendecompose(h, 2);
    std::vector<Index> dims(static_cast<std::size_t>(L), s.levels_kept);
    const CMatrix corr = embed(parts[0].phase, 0, dims) * embed(parts[1].phase, 1, dims);
    for (Index k = 0; k < 2; ++k) {
      const double c = eig.vectors.col(k).dot(corr * eig.vectors.col(k)).real();
      if (L == 2) CHECK(c < -5.0);
      else CHECK(c > 5.0);
    }
  }
}
