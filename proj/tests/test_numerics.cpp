#include "doctest.h"

#include <cmath>
#include <random>

#include "ceq/numerics.hpp"
#include "ceq/spin.hpp"

using namespace ceq;

namespace {

CMatrix random_hermitian(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CMatrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

StateVector random_state(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return StateVector(v);
}

}  // namespace

TEST_CASE("hermitian operator rejects bad input") {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 2.0, 0.0;
  CHECK_THROWS_AS(HermitianOperator{m}, ValidationError);
  CHECK_THROWS_AS(HermitianOperator{CMatrix::Zero(1, 1)}, ValidationError);
  CHECK_THROWS_AS(HermitianOperator{CMatrix::Zero(2, 3)}, ValidationError);
  CHECK_THROWS_AS(StateVector{CVector::Zero(3)}, ValidationError);
}

TEST_CASE("eigendecompose small cases") {
  auto id = eigendecompose(HermitianOperator::from(CMatrix::Identity(2, 2)), 2);
  CHECK(id.values(0) == doctest::Approx(1.0));
  CHECK(id.values(1) == doctest::Approx(1.0));
  CHECK((id.vectors.adjoint() * id.vectors - CMatrix::Identity(2, 2)).norm() < 1e-12);

  auto z = eigendecompose(pauli(Axis::z), 2);
  CHECK(z.values(0) == doctest::Approx(-1.0));
  CHECK(z.values(1) == doctest::Approx(1.0));

  CHECK_THROWS_AS(eigendecompose(HermitianOperator::from(CMatrix::Identity(3, 3)), 4), ValidationError);
  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose(bad, 2), ValidationError);
}

TEST_CASE("random hermitian residuals and trace") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const HermitianOperator h(random_hermitian(50, seed));
    const auto eig = eigendecompose(h);
    const double scale = h.norm();
    for (Index j = 0; j < 50; ++j) {
      const double r = (h.matrix() * eig.vectors.col(j) - eig.values(j) * eig.vectors.col(j)).norm();
      CHECK(r <= 1e-9 * scale);
      if (j > 0) CHECK(eig.values(j) >= eig.values(j - 1));
    }
    const double tr = h.matrix().trace().real();
    CHECK(std::abs(eig.values.sum() - tr) <= 1e-9 * std::max(1.0, std::abs(tr)) + 1e-9 * scale);
  }
}

TEST_CASE("static propagation") {
  const HermitianOperator h(random_hermitian(12, 7));
  const StateVector psi = random_state(12, 8);
  const StateVector same = propagate_static(psi, h, 0.0);
  CHECK((same.amplitudes() - psi.amplitudes()).norm() == 0.0);

  const StateVector later = propagate_static(psi, h, 3.7);
  CHECK(std::abs(later.norm() - 1.0) < 1e-10);
  const double e0 = psi.expectation(h);
  CHECK(std::abs(later.expectation(h) - e0) <= 1e-9 * std::max(1.0, std::abs(e0)));

  const StateVector back = propagate_static(later, h, -3.7);
  CHECK((back.amplitudes() - psi.amplitudes()).norm() < 1e-8);

  const auto eig = eigendecompose(h);
  const StateVector v(eig.vectors.col(3));
  const StateVector vt = propagate_static(v, h, 2.0);
  const CVector expect = std::polar(1.0, -eig.values(3) * 2.0) * v.amplitudes();
  CHECK((vt.amplitudes() - expect).norm() < 1e-10);

  CHECK_THROWS_AS(propagate_static(random_state(3, 1), h, 1.0), ValidationError);
}

TEST_CASE("pauli x flips in a quarter period") {
  const double kappa = 0.37;
  const HermitianOperator hx(kappa * pauli(Axis::x));
  const StateVector out = propagate_static(StateVector::basis(2, 0), hx, kPi / (2.0 * kappa));
  CHECK(std::norm(out[1]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("time-dependent propagation reduces to static") {
  const HermitianOperator h0(random_hermitian(6, 11));
  const HermitianOperator h1(random_hermitian(6, 12));
  TimeDependentOperator op(h0);
  op.add(h1, [](double) { return 0.3; });
  const StateVector psi = random_state(6, 13);
  const StateVector a = propagate_timedep(psi, op, 0.0, 2.0, 1e-3);
  const StateVector b = propagate_static(psi, h0 + 0.3 * h1, 2.0);
  CHECK((a.amplitudes() - b.amplitudes()).norm() < 1e-8);
  const StateVector c = propagate_magnus(psi, op, 0.0, 2.0, 1e-2);
  CHECK((c.amplitudes() - b.amplitudes()).norm() < 1e-10);

  TimeDependentOperator zero(HermitianOperator::zero(6));
  const StateVector z = propagate_timedep(psi, zero, 0.0, 5.0, 0.01);
  CHECK((z.amplitudes() - psi.amplitudes()).norm() < 1e-12);
}

TEST_CASE("time reversal and unitarity under a drive") {
  const HermitianOperator h0(random_hermitian(5, 21));
  const HermitianOperator h1(random_hermitian(5, 22));
  TimeDependentOperator op(h0);
  op.add(h1, [](double t) { return std::cos(2.0 * t); });
  op.set_max_frequency(2.0);
  const StateVector psi = random_state(5, 23);
  double worst = 0.0;
  const StateVector fwd = propagate_timedep(psi, op, 0.0, 3.0, 1e-3, [&](double, const CVector& v) {
    worst = std::max(worst, std::abs(v.norm() - 1.0));
  });
  CHECK(worst < 1e-10);
  const StateVector back = propagate_timedep(fwd, op, 3.0, 0.0, 1e-3);
  CHECK((back.amplitudes() - psi.amplitudes()).norm() < 1e-8);
  CHECK(timedep_convergence(psi, op, 0.0, 3.0, 2e-3) < 1e-6);

  const StateVector m4 = propagate_magnus(psi, op, 0.0, 3.0, 5e-3);
  const StateVector m2 = propagate_magnus(psi, op, 0.0, 3.0, 5e-4, {}, MagnusOrder::second);
  CHECK((m4.amplitudes() - fwd.amplitudes()).norm() < 1e-6);
  CHECK((m2.amplitudes() - fwd.amplitudes()).norm() < 1e-4);
}

TEST_CASE("rk4 step guard") {
  TimeDependentOperator op(HermitianOperator::from(pauli(Axis::z)));
  op.add(HermitianOperator::from(pauli(Axis::x)), [](double t) { return std::cos(10.0 * t); });
  op.set_max_frequency(10.0);
  const StateVector psi = StateVector::basis(2, 0);
  CHECK_THROWS_AS(propagate_timedep(psi, op, 0.0, 1.0, 0.02), ValidationError);
  CHECK_NOTHROW(propagate_timedep(psi, op, 0.0, 1.0, default_timestep(10.0)));
}

TEST_CASE("driven two-level resonance follows the half-amplitude rule") {
  // H = (w/2) sz + a cos(w t) sx; in the rotating frame the coupling is a/2,
  // so the population flops as sin^2(a t / 2).
  const double w = 20.0;
  const double a = 0.2;
  TimeDependentOperator op(HermitianOperator::from(0.5 * w * pauli(Axis::z)));
  op.add(HermitianOperator::from(pauli(Axis::x)), [=](double t) { return a * std::cos(w * t); });
  op.set_max_frequency(w);
  const double t_flip = kPi / a;
  std::vector<double> ts, ps;
  propagate_timedep(StateVector::basis(2, 0), op, 0.0, 1.2 * t_flip, default_timestep(w),
                    [&](double t, const CVector& v) {
                      ts.push_back(t);
                      ps.push_back(std::norm(v(1)));
                    });
  // first time the excited population peaks
  std::size_t imax = 0;
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i] > ps[imax]) imax = i;
  CHECK(ps[imax] > 0.99);
  CHECK(ts[imax] == doctest::Approx(t_flip).epsilon(0.02));
}

TEST_CASE("banded solver matches dense") {
  const Index n = 301;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index p : {1, 2, 3}) {
    RMatrix bands = RMatrix::Zero(p + 1, n);
    for (Index r = 0; r <= p; ++r)
      for (Index i = 0; i + r < n; ++i) bands(r, i) = (r == 0 ? 3.0 : 1.0) * u(rng);
    RMatrix dense = RMatrix::Zero(n, n);
    for (Index r = 0; r <= p; ++r)
      for (Index i = 0; i + r < n; ++i) dense(i, i + r) = dense(i + r, i) = bands(r, i);
    const auto ref = eigendecompose(dense, 8);
    const auto ban = banded_lowest(bands, 8);
    for (Index j = 0; j < 8; ++j) {
      CHECK(ban.values(j) == doctest::Approx(ref.values(j)).epsilon(1e-10));
      CHECK((dense.cast<Complex>() * ban.vectors.col(j) - ban.values(j) * ban.vectors.col(j)).norm() < 1e-9);
    }
    CHECK((ban.vectors.adjoint() * ban.vectors - CMatrix::Identity(8, 8)).norm() < 1e-9);
  }
}

TEST_CASE("banded solver resolves a near-degenerate pair") {
  // two weakly coupled identical blocks
  const Index n = 200;
  RMatrix bands = RMatrix::Zero(2, n);
  for (Index i = 0; i < n; ++i) bands(0, i) = std::cos(0.1 * static_cast<double>(i % 100));
  for (Index i = 0; i + 1 < n; ++i) bands(1, i) = i == 99 ? 1e-7 : -1.0;
  RMatrix dense = RMatrix::Zero(n, n);
  for (Index r = 0; r < 2; ++r)
    for (Index i = 0; i + r < n; ++i) dense(i, i + r) = dense(i + r, i) = bands(r, i);
  const auto ref = eigendecompose(dense, 2);
  const auto ban = banded_lowest(bands, 2);
  CHECK(std::abs((ban.values(1) - ban.values(0)) - (ref.values(1) - ref.values(0))) < 1e-12);
  CHECK(std::abs(ban.vectors.col(0).dot(ban.vectors.col(1))) < 1e-9);
}

TEST_CASE("RK4 refuses steps outside its stability region") {
  TimeDependentOperator op{HermitianOperator::from(100.0 * pauli(Axis::z))};
  op.add(HermitianOperator::from(pauli(Axis::x)), [](double t) { return std::cos(t); });
  op.set_max_frequency(1.0);
  const StateVector psi = StateVector::basis(2, 0);
  CHECK_THROWS_AS(propagate_timedep(psi, op, 0.0, 1.0, 0.05), ValidationError);
  CHECK_NOTHROW(propagate_timedep(psi, op, 0.0, 1.0, 0.01));
  CHECK_NOTHROW(propagate_magnus(psi, op, 0.0, 1.0, 0.05));
}
