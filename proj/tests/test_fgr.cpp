#include "doctest.h"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "ceq/fgr.hpp"
#include "ceq/seeds.hpp"

using namespace ceq;

namespace {

// 256 levels over a narrower band keep the level spacing of the default bath
FgrSpec small(double g = 0.1, bool driven = false) {
  FgrSpec s;
  s.bath_dim = 256;
  s.bandwidth = 2.5;
  s.coupling_g = g;
  s.kappa = 0.2;
  s.driven = driven;
  s.n_realizations = 1;
  s.seed = 7;
  return s;
}

}  // namespace

TEST_CASE("bath spectrum is a flat box") {
  FgrSpec s = small();
  s.bath_dim = 2048;
  s.bandwidth = 10.0;
  const Bath b = build_bath(s, 3);
  REQUIRE(b.energies.size() == 2048);
  CHECK(b.energies.minCoeff() >= -5.0);
  CHECK(b.energies.maxCoeff() <= 5.0);
  CHECK(std::is_sorted(b.energies.begin(), b.energies.end()));

  std::vector<double> counts(10, 0.0);
  for (double e : b.energies) counts[static_cast<std::size_t>(std::min(9.0, std::floor((e + 5.0))))] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 204.8) * (c - 204.8) / 204.8;
  CHECK(chi2 < 21.67);  // 9 dof, 1%

  // eigenpairs of the assembled Hamiltonian
  for (Index j : {Index{0}, Index{777}, Index{2047}}) {
    const CVector v = b.eigenvectors.col(j);
    CHECK((b.hamiltonian.matrix() * v - b.energies(j) * v).norm() < 1e-10);
  }
  CHECK((b.eigenvectors.adjoint() * b.eigenvectors - CMatrix::Identity(2048, 2048)).norm() < 1e-9);
}

TEST_CASE("bath is deterministic per seed") {
  const FgrSpec s = small();
  const Bath a = build_bath(s, 11);
  const Bath b = build_bath(s, 11);
  CHECK(a.hamiltonian.matrix() == b.hamiltonian.matrix());
  CHECK(build_bath(s, 12).energies != a.energies);
}

TEST_CASE("coupler normalization and independence") {
  FgrSpec s = small();
  s.bath_dim = 512;
  const HermitianOperator m1 = build_coupler(s, derive_seed(1, {0, 1}));
  const HermitianOperator m2 = build_coupler(s, derive_seed(1, {0, 2}));
  CHECK(hermiticity_defect(m1.matrix()) == 0.0);
  const double n = 512.0;
  CHECK((m1.matrix() * m1.matrix()).trace().real() / n == doctest::Approx(1.0).epsilon(0.1));
  // tr(M1 M2)/N has standard deviation 1/N
  CHECK(std::abs((m1.matrix() * m2.matrix()).trace().real() / n) < 3.0 / n);
}

TEST_CASE("decoupled dimer does not decay") {
  for (bool driven : {false, true}) {
    const FgrSpec s = small(0.0, driven);
    const auto tr = trace_relaxation(s, 0);
    for (double p : tr.survival) CHECK(p == doctest::Approx(1.0).epsilon(1e-10));
    const auto r = run_relaxation(s);
    CHECK(std::abs(r.raw_rate) < 1e-10);
    CHECK(r.fgr_constant == 0.0);
  }
}

TEST_CASE("joint propagation matches dense diagonalization") {
  const FgrSpec s = small(0.15);
  const auto tr = trace_relaxation(s, 0);
  CHECK(tr.max_norm_defect < 1e-9);

  const FgrSystem sys = fgr_system(s);
  const Bath b = build_bath(s, derive_seed(s.seed, {0, 0}));
  const CMatrix ib = CMatrix::Identity(s.bath_dim, s.bath_dim);
  CMatrix h = Eigen::kroneckerProduct(build_spin_hamiltonian(sys.model).matrix(), ib).eval() +
              Eigen::kroneckerProduct(CMatrix::Identity(4, 4), b.hamiltonian.matrix()).eval();
  for (std::uint64_t j = 0; j < 2; ++j) {
    const HermitianOperator m = build_coupler(s, derive_seed(s.seed, {0, 1 + j}));
    h += s.coupling_g * Eigen::kroneckerProduct(pauli(Axis::y, static_cast<int>(j), 2), m.matrix()).eval();
  }
  const CVector ground = b.eigenvectors.col(0);
  const StateVector start(Eigen::kroneckerProduct(sys.one_L.amplitudes(), ground).eval());
  const StateVector end = propagate_static(start, HermitianOperator(h), tr.times.back());
  CHECK(std::norm(start.overlap(end)) == doctest::Approx(tr.survival.back()).epsilon(1e-8));
}

TEST_CASE("ground state stays put at zero temperature") {
  const FgrSpec s = small(0.1);
  const FgrSystem sys = fgr_system(s);
  const auto tr = trace_relaxation(s, 0, InitialState::ground);
  const double bound = 1.0 - 5.0 * s.coupling_g * s.coupling_g * tr.m_squared / (sys.splitting * sys.splitting);
  for (double p : tr.ground) CHECK(p > bound);
  CHECK(*std::min_element(tr.ground.begin(), tr.ground.end()) > 0.99);
}

TEST_CASE("Floquet initial state splits the logical doublet") {
  const FgrSystem sys = fgr_system(small(0.1, true));
  CHECK(sys.floquet_excited_weight == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sys.drive_omega == doctest::Approx(sys.splitting).epsilon(0.05));
}

TEST_CASE("decay rate scales as the coupling squared") {
  FgrSpec s = small();
  s.n_realizations = 4;
  const auto r = fgr_sweep(s, {0.06, 0.08}, {0.2});
  const double slope = std::log(r[1].raw_rate / r[0].raw_rate) / std::log(0.08 / 0.06);
  CHECK(slope == doctest::Approx(2.0).epsilon(0.075));
  const double ratio = r[0].fgr_constant / golden_rule_constant(s);
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
  CHECK(r[0].rate_stderr > 0.0);
  CHECK(r[0].drift_fraction < 1e-12);
}

TEST_CASE("sweep is independent of the worker count") {
  FgrSpec s = small();
  s.n_realizations = 4;
  const auto a = fgr_sweep(s, {0.06, 0.08}, {0.2}, 1);
  const auto b = fgr_sweep(s, {0.06, 0.08}, {0.2}, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].raw_rate == b[i].raw_rate);
    CHECK(a[i].realization_rates == b[i].realization_rates);
  }
}

TEST_CASE("sweep outcomes keep failed points apart") {
  FgrSpec s = small();
  s.n_realizations = 4;
  const auto out = fgr_sweep_outcomes(s, {0.06, 0.5}, {0.2});
  REQUIRE(out.size() == 2);
  CHECK(out[0].result.has_value());
  CHECK_FALSE(out[0].error);
  CHECK_FALSE(out[1].result.has_value());
  REQUIRE(out[1].error);
  CHECK_THROWS_AS(std::rethrow_exception(out[1].error), Error);
  CHECK_THROWS_AS(fgr_sweep(s, {0.06, 0.5}, {0.2}), Error);
}

TEST_CASE("x and z channels are gated") {
  FgrSpec s = small(0.1);
  s.channel = Axis::z;
  CHECK_THROWS_AS(run_relaxation(s), ChannelUnsupportedError);
  s.channel = Axis::x;
  CHECK_THROWS_AS(trace_relaxation(s, 0), ChannelUnsupportedError);
  s.channel = Axis::z;
  s.allow_unsupported_channels = true;
  s.coupling_g = 0.3;
  s.n_realizations = 3;
  CHECK_THROWS_AS(run_relaxation(s), ChannelUnsupportedError);
}

TEST_CASE("relaxation input validation") {
  FgrSpec s = small();
  s.bath_dim = 128;
  CHECK_THROWS_AS(run_relaxation(s), ValidationError);
  s = small();
  s.bandwidth = 0.0;
  CHECK_THROWS_AS(run_relaxation(s), ValidationError);
  s = small(1.5);
  CHECK_THROWS_AS(run_relaxation(s), ValidationError);
  s = small();
  s.kappa = 1.2;
  CHECK_THROWS_AS(fgr_system(s), ValidationError);
}
