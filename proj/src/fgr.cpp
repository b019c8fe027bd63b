#include "ceq/fgr.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "ceq/drive.hpp"
#include "ceq/fit.hpp"
#include "ceq/seeds.hpp"

namespace ceq {

void FgrSpec::validate() const {
  if (bath_dim < 256) throw ValidationError("FgrSpec: bath_dim must be >= 256");
  if (!(bandwidth > 0.0)) throw ValidationError("FgrSpec: bandwidth must be positive");
  if (!(coupling_g >= 0.0)) throw ValidationError("FgrSpec: coupling_g must be >= 0");
  if (!(kappa > 0.0) || !(J > 0.0) || kappa >= J) throw ValidationError("FgrSpec: need 0 < kappa < J");
  if (!(h > 0.0)) throw ValidationError("FgrSpec: h must be positive");
  if (driven && !(alpha_bar > 0.0)) throw ValidationError("FgrSpec: driven run needs alpha_bar > 0");
  if (!(drive_omega >= 0.0)) throw ValidationError("FgrSpec: drive_omega must be >= 0");
  if (n_realizations < 1) throw ValidationError("FgrSpec: n_realizations must be >= 1");
  if (samples < 8) throw ValidationError("FgrSpec: samples must be >= 8");
  if (steps_per_period < 4) throw ValidationError("FgrSpec: steps_per_period must be >= 4");
  if (fit_start >= 0.0 && fit_end >= 0.0 && fit_end <= fit_start)
    throw ValidationError("FgrSpec: fit_end must exceed fit_start");
}

namespace {

// (A + A^H)/2 with complex Gaussian A of per-component variance `var`:
// off-diagonal entries have mean square `var`, diagonal ones variance `var`.
CMatrix random_hermitian(Index n, double var, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(var));
  CMatrix a(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) a(i, j) = Complex(gauss(rng), gauss(rng));
  CMatrix m = 0.5 * (a + a.adjoint());
  return m;
}

struct BathBasis {
  RVector energies;
  CMatrix vectors;
};

BathBasis bath_basis(const FgrSpec& spec, std::uint64_t seed) {
  const Index n = spec.bath_dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-0.5 * spec.bandwidth, 0.5 * spec.bandwidth);
  BathBasis b;
  b.energies.resize(n);
  for (Index i = 0; i < n; ++i) b.energies(i) = box(rng);
  std::sort(b.energies.begin(), b.energies.end());

  Eigen::SelfAdjointEigenSolver<CMatrix> es(random_hermitian(n, 1.0 / n, rng));
  if (es.info() != Eigen::Success) throw NumericalError("build_bath: eigensolver failed");
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  b.vectors.resize(n, n);
  for (Index j = 0; j < n; ++j) b.vectors.col(j) = es.eigenvectors().col(perm[static_cast<std::size_t>(j)]);
  return b;
}

// Couplers in the bath eigenbasis, stored transposed for right
// multiplication of the (system x bath) state matrix.
struct Realization {
  RVector energies;
  std::vector<CMatrix> couplers_t;
  std::vector<double> norms;      // spectral norms
  std::vector<double> m_squared;  // [M_j^2]_00
  std::vector<Complex> m_diag;    // [M_j]_00
};

Realization make_realization(const FgrSpec& spec, int r) {
  const auto ur = static_cast<std::uint64_t>(r);
  BathBasis b = bath_basis(spec, derive_seed(spec.seed, {ur, 0}));
  Realization out;
  out.energies = b.energies;
  for (std::uint64_t j = 0; j < 2; ++j) {
    const HermitianOperator m = build_coupler(spec, derive_seed(spec.seed, {ur, 1 + j}));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m.matrix(), Eigen::EigenvaluesOnly);
    out.norms.push_back(es.eigenvalues().cwiseAbs().maxCoeff());
    CMatrix rotated = b.vectors.adjoint() * m.matrix() * b.vectors;
    out.m_squared.push_back(rotated.col(0).squaredNorm());
    out.m_diag.push_back(rotated(0, 0));
    out.couplers_t.push_back(rotated.transpose());
  }
  return out;
}

// K = sys (x) I + c (I (x) E + g sum_j sigma_j (x) M_j) acting on psi(s, b).
struct JointOperator {
  const Realization* bath = nullptr;
  std::vector<CMatrix> sigmas;
  double g = 0.0;

  void apply(const CMatrix& sys, double c, const CMatrix& psi, CMatrix& out) const {
    out.noalias() = sys * psi;
    out += c * (psi * bath->energies.asDiagonal());
    if (g != 0.0) {
      for (std::size_t j = 0; j < sigmas.size(); ++j) out.noalias() += (c * g) * (sigmas[j] * psi) * bath->couplers_t[j];
    }
  }

  std::pair<double, double> bounds(const CMatrix& sys, double c) const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(sys, Eigen::EigenvaluesOnly);
    double coupling = 0.0;
    for (double n : bath->norms) coupling += g * n;
    const double lo = es.eigenvalues().minCoeff() + c * (bath->energies.minCoeff() - coupling);
    const double hi = es.eigenvalues().maxCoeff() + c * (bath->energies.maxCoeff() + coupling);
    const double pad = 1e-3 * (hi - lo) + 1e-12;
    return {lo - pad, hi + pad};
  }

  // e^{-i K tau} psi by Chebyshev expansion.
  CMatrix propagate(const CMatrix& sys, double c, const CMatrix& psi, double tau) const {
    const auto [lo, hi] = bounds(sys, c);
    const double mid = 0.5 * (hi + lo);
    const double half = 0.5 * (hi - lo);
    const double x = half * tau;
    std::vector<double> coef;
    for (int k = 0;; ++k) {
      const double jk = std::cyl_bessel_j(static_cast<double>(k), x);
      coef.push_back(jk);
      if (k > x && std::abs(jk) < 1e-16) break;
    }
    // (K - mid) / half applied to v
    CMatrix scratch(psi.rows(), psi.cols());
    auto scaled = [&](const CMatrix& v, CMatrix& res) {
      apply(sys, c, v, scratch);
      res = (scratch - mid * v) / half;
    };
    CMatrix t_prev = psi;
    CMatrix t_cur(psi.rows(), psi.cols());
    scaled(psi, t_cur);
    CMatrix sum = coef[0] * psi + 2.0 * coef[1] * Complex(0.0, -1.0) * t_cur;
    Complex phase(0.0, -1.0);  // (-i)^k
    CMatrix t_next(psi.rows(), psi.cols());
    for (std::size_t k = 2; k < coef.size(); ++k) {
      scaled(t_cur, t_next);
      t_next = 2.0 * t_next - t_prev;
      phase *= Complex(0.0, -1.0);
      sum += (2.0 * coef[k] * phase) * t_next;
      std::swap(t_prev, t_cur);
      std::swap(t_cur, t_next);
    }
    return std::exp(Complex(0.0, -mid * tau)) * sum;
  }
};

constexpr double kCf4A = 0.25 - 0.28867513459481288225;  // 1/4 - sqrt(3)/6
constexpr double kCf4B = 0.25 + 0.28867513459481288225;
constexpr double kGaussOffset = 0.28867513459481288225;   // sqrt(3)/6

// Generators of the two commutator-free fourth-order exponentials on
// [t, t + dt], in application order.
std::pair<CMatrix, CMatrix> cf4_generators(const TimeDependentOperator& op, double t, double dt) {
  const CMatrix h1 = op.matrix_at(t + (0.5 - kGaussOffset) * dt);
  const CMatrix h2 = op.matrix_at(t + (0.5 + kGaussOffset) * dt);
  return {kCf4B * h1 + kCf4A * h2, kCf4A * h1 + kCf4B * h2};
}

TimeDependentOperator system_drive(const FgrSystem& sys, const FgrSpec& spec) {
  const double w = sys.drive_omega;
  const double a = spec.alpha_bar;
  return peierls_rotated_hamiltonian(sys.model, [a, w](double t) { return a * std::sin(w * t); }, 0, w);
}

double drive_period(const FgrSystem& sys) { return kTwoPi / sys.drive_omega; }

RelaxationTrace evolve(const FgrSpec& spec, const FgrSystem& sys, const Realization& bath, InitialState initial) {
  JointOperator k;
  k.bath = &bath;
  k.g = spec.coupling_g;
  for (int j = 0; j < 2; ++j) k.sigmas.push_back(pauli(spec.channel, j, 2));

  const Index nb = bath.energies.size();
  const bool ground_start = initial == InitialState::ground;
  if (ground_start && spec.driven) throw ValidationError("trace_relaxation: ground start is for the undriven dimer");
  const CVector ref = (spec.driven ? sys.floquet : sys.one_L).amplitudes();
  const CVector start = ground_start ? sys.zero_L.amplitudes() : ref;
  const CVector zero = sys.zero_L.amplitudes();

  CMatrix psi = CMatrix::Zero(4, nb);
  psi.col(0) = start;

  RelaxationTrace tr;
  tr.m_squared = 0.5 * (bath.m_squared[0] + bath.m_squared[1]);
  for (int j = 0; j < 2; ++j) {
    const CMatrix& s = k.sigmas[static_cast<std::size_t>(j)];
    const double diff = (sys.one_L.amplitudes().dot(s * sys.one_L.amplitudes()) -
                         sys.zero_L.amplitudes().dot(s * sys.zero_L.amplitudes()))
                            .real();
    tr.drift += spec.coupling_g * bath.m_diag[static_cast<std::size_t>(j)].real() * diff;
  }

  const CVector& probe = ground_start ? zero : ref;
  auto record = [&](double t) {
    tr.times.push_back(t);
    tr.survival.push_back(std::norm(probe.dot(psi.col(0))));
    tr.population.push_back((probe.adjoint() * psi).squaredNorm());
    tr.ground.push_back((zero.adjoint() * psi).squaredNorm());
    tr.max_norm_defect = std::max(tr.max_norm_defect, std::abs(psi.norm() - 1.0));
  };

  const double span = fgr_span(spec, sys);
  record(0.0);
  if (!spec.driven) {
    const CMatrix hs = build_spin_hamiltonian(sys.model).matrix();
    const double dt = span / spec.samples;
    for (int i = 1; i <= spec.samples; ++i) {
      psi = k.propagate(hs, 1.0, psi, dt);
      record(i * dt);
    }
    return tr;
  }

  const auto op = system_drive(sys, spec);
  const double period = drive_period(sys);
  const auto periods = static_cast<int>(std::floor(span / period + 1e-9));
  const double dt = period / spec.steps_per_period;
  std::vector<std::pair<CMatrix, CMatrix>> gens;
  for (int s = 0; s < spec.steps_per_period; ++s) gens.push_back(cf4_generators(op, s * dt, dt));
  for (int p = 1; p <= periods; ++p) {
    for (const auto& [first, second] : gens) {
      psi = k.propagate(first, 0.5, psi, dt);
      psi = k.propagate(second, 0.5, psi, dt);
    }
    record(p * period);
  }
  return tr;
}

struct Quadratic {
  double a = 0.0, b = 0.0, c = 0.0;
};

Quadratic fit_quadratic(const std::vector<double>& t, const std::vector<double>& y) {
  const auto n = static_cast<Index>(t.size());
  RMatrix a(n, 3);
  RVector rhs(n);
  for (Index i = 0; i < n; ++i) {
    const double x = t[static_cast<std::size_t>(i)];
    a.row(i) << 1.0, x, x * x;
    rhs(i) = y[static_cast<std::size_t>(i)];
  }
  const RVector p = a.colPivHouseholderQr().solve(rhs);
  return {p(0), p(1), p(2)};
}

FgrResult analyze(const FgrSpec& spec, const FgrSystem& sys, const std::vector<RelaxationTrace>& traces) {
  FgrResult res;
  res.matrix_element_sq = sys.matrix_element_sq;
  const std::size_t ns = traces.front().times.size();
  const double nr = static_cast<double>(traces.size());
  res.times = traces.front().times;
  res.survival.assign(ns, 0.0);
  res.population.assign(ns, 0.0);
  for (const auto& tr : traces) {
    for (std::size_t i = 0; i < ns; ++i) {
      res.survival[i] += tr.survival[i] / nr;
      res.population[i] += tr.population[i] / nr;
    }
    res.m_squared += tr.m_squared / nr;
  }

  const double t_first = spec.fit_start >= 0.0 ? spec.fit_start
                                               : std::min(kTwoPi / sys.splitting, 0.25 * res.times.back());
  std::size_t i0 = 0;
  while (i0 < ns && res.times[i0] < t_first - 1e-9) ++i0;
  std::size_t i1 = i0;
  while (i1 + 1 < ns && res.survival[i1] >= 0.9 && !(spec.fit_end >= 0.0 && res.times[i1 + 1] > spec.fit_end + 1e-9)) ++i1;
  for (const auto& tr : traces) res.drift_fraction = std::max(res.drift_fraction, std::abs(tr.drift) * res.times[std::min(i1, ns - 1)] / kTwoPi);
  if (spec.channel != Axis::y && res.drift_fraction > 0.1) {
    std::ostringstream msg;
    msg << "run_relaxation: diagonal drift " << res.drift_fraction << " of a cycle over the window";
    throw ChannelUnsupportedError(msg.str());
  }
  if (i0 >= ns || 1.0 - res.survival[std::min(i1, ns - 1)] > 0.2) {
    std::ostringstream msg;
    msg << "run_relaxation: survival lost more than 20% by the end of the fit window; coupling too strong";
    throw ValidationError(msg.str());
  }
  if (i1 < i0 + 3) {
    std::ostringstream msg;
    msg << "run_relaxation: only " << i1 - i0 + 1 << " samples in the fit window";
    throw FitError(msg.str(), res.times, res.survival);
  }
  res.fit_start = res.times[i0];
  res.fit_end = res.times[i1];


  const std::vector<double> wt(res.times.begin() + static_cast<long>(i0), res.times.begin() + static_cast<long>(i1) + 1);
  for (const auto& tr : traces) {
    const std::vector<double> ws(tr.survival.begin() + static_cast<long>(i0), tr.survival.begin() + static_cast<long>(i1) + 1);
    const LineFit f = fit_line(wt, ws);
    res.realization_rates.push_back(-f.slope / f.intercept);
  }
  res.raw_rate = std::accumulate(res.realization_rates.begin(), res.realization_rates.end(), 0.0) / nr;
  if (traces.size() > 1) {
    double var = 0.0;
    for (double r : res.realization_rates) var += (r - res.raw_rate) * (r - res.raw_rate);
    res.rate_stderr = std::sqrt(var / (nr - 1.0) / nr);
  }

  const std::vector<double> ms(res.survival.begin() + static_cast<long>(i0), res.survival.begin() + static_cast<long>(i1) + 1);
  const Quadratic q = fit_quadratic(wt, ms);
  const double width = res.fit_end - res.fit_start;
  if (std::abs(q.b) * width > 1e-9 && std::abs(q.c) * width > 0.2 * std::abs(q.b)) {
    std::ostringstream msg;
    msg << "run_relaxation: decay not linear (quadratic/linear " << std::abs(q.c) * width / std::abs(q.b) << ")";
    throw FitError(msg.str(), res.times, res.survival);
  }

  const double norm = spec.coupling_g * spec.coupling_g * res.m_squared * res.matrix_element_sq;
  res.fgr_constant = norm > 0.0 ? res.raw_rate / norm : 0.0;
  return res;
}

FgrSpec with_point(FgrSpec s, double g, double kappa) {
  s.coupling_g = g;
  s.kappa = kappa;
  return s;
}

void check_channel(const FgrSpec& spec) {
  if (spec.channel != Axis::y && !spec.allow_unsupported_channels)
    throw ChannelUnsupportedError("run_relaxation: x and z channels are disabled (diagonal drifts)");
}

// Floquet state of the one-period map (same discretization as the joint
// run) with the larger |1_L> weight among the two logical ones. Returns the
// relative imbalance of the two |1_L> weights.
double floquet_pair(FgrSystem& s, const FgrSpec& spec) {
  const auto op = system_drive(s, spec);
  const double dt = drive_period(s) / spec.steps_per_period;
  CMatrix u = CMatrix::Identity(4, 4);
  for (int i = 0; i < spec.steps_per_period; ++i) {
    const auto [first, second] = cf4_generators(op, i * dt, dt);
    u = evolution_operator(HermitianOperator(second), dt) * evolution_operator(HermitianOperator(first), dt) * u;
  }
  Eigen::ComplexEigenSolver<CMatrix> es(u);
  if (es.info() != Eigen::Success) throw NumericalError("fgr_system: Floquet eigensolver failed");
  std::vector<std::pair<double, Index>> weight;
  for (Index i = 0; i < 4; ++i) {
    const CVector v = es.eigenvectors().col(i).normalized();
    weight.push_back({std::norm(s.zero_L.amplitudes().dot(v)) + std::norm(s.one_L.amplitudes().dot(v)), i});
  }
  std::sort(weight.begin(), weight.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const CVector a = es.eigenvectors().col(weight[0].second).normalized();
  const CVector b = es.eigenvectors().col(weight[1].second).normalized();
  const double wa = std::norm(s.one_L.amplitudes().dot(a));
  const double wb = std::norm(s.one_L.amplitudes().dot(b));
  s.floquet = StateVector(wa >= wb ? a : b);
  s.floquet_excited_weight = std::max(wa, wb);
  return std::abs(wa - wb) / (wa + wb);
}

}  // namespace

Bath build_bath(const FgrSpec& spec, std::uint64_t seed) {
  spec.validate();
  BathBasis b = bath_basis(spec, seed);
  Bath out;
  out.hamiltonian = HermitianOperator(CMatrix(b.vectors * b.energies.asDiagonal() * b.vectors.adjoint()));
  out.energies = std::move(b.energies);
  out.eigenvectors = std::move(b.vectors);
  return out;
}

HermitianOperator build_coupler(const FgrSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  return HermitianOperator(random_hermitian(spec.bath_dim, 1.0 / static_cast<double>(spec.bath_dim), rng));
}

FgrSystem fgr_system(const FgrSpec& spec) {
  spec.validate();
  FgrSystem s;
  s.model = make_spin_model(spec.kappa, spec.J, 0.0, 2);
  s.model.h = spec.h;
  const HermitianOperator h0 = build_spin_hamiltonian(s.model);
  const LogicalSubspace ls = logical_subspace(h0, logical_label_operator(2), 0.5);
  s.zero_L = ls.zero_L;
  s.one_L = ls.one_L;
  s.splitting = ls.splitting;
  s.drive_omega = spec.drive_omega > 0.0 ? spec.drive_omega : ls.splitting;

  double me = 0.0;
  for (int j = 0; j < 2; ++j) me += 0.5 * std::norm(s.one_L.amplitudes().dot(pauli(spec.channel, j, 2) * s.zero_L.amplitudes()));
  s.matrix_element_sq = me;

  if (spec.driven) {
    if (spec.drive_omega > 0.0) {
      floquet_pair(s, spec);
    } else {
      // dressed resonance: the drive frequency where the Floquet states
      // split the logical doublet equally
      auto weight = [&](double w) {
        s.drive_omega = w;
        return floquet_pair(s, spec);
      };
      const double eps = ls.splitting;
      const int n = 80;
      double best = eps;
      double best_w = weight(eps);
      for (int i = 0; i <= n; ++i) {
        const double w = eps * (0.9 + 0.2 * i / n);
        const double v = weight(w);
        if (v < best_w) best_w = v, best = w;
      }
      const double step = 0.2 * eps / n;
      s.drive_omega = golden_minimize(weight, best - step, best + step, 1e-10 * eps);
      floquet_pair(s, spec);
    }
  }
  return s;
}

double fgr_span(const FgrSpec& spec, const FgrSystem& system) {
  double span = 0.125 * kTwoPi * static_cast<double>(spec.bath_dim) / spec.bandwidth;
  if (spec.fit_end > 0.0) span = std::min(span, spec.fit_end);
  if (spec.driven) {
    const double period = drive_period(system);
    span = std::min(span, 200.0 * period);
    if (span < 5.0 * period) throw ValidationError("run_relaxation: fewer than 5 drive periods fit in the bath Heisenberg window");
  }
  return span;
}

double golden_rule_constant(const FgrSpec& spec) {
  const FgrSystem sys = fgr_system(spec);
  const double dos = 1.0 / spec.bandwidth;
  if (!spec.driven) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j)
      total += std::norm(sys.zero_L.amplitudes().dot(pauli(spec.channel, j, 2) * sys.one_L.amplitudes()));
    return kTwoPi * dos * total / sys.matrix_element_sq;
  }

  // Floquet modes F_a(t) = e^{i e_a t} U(t, 0) F_a(0), sampled on a fine grid
  const auto op = system_drive(sys, spec);
  const double period = drive_period(sys);
  const int n = 512;
  const double dt = period / n;
  std::vector<CMatrix> u(static_cast<std::size_t>(n) + 1, CMatrix::Identity(4, 4));
  for (int i = 0; i < n; ++i) {
    const auto [first, second] = cf4_generators(op, i * dt, dt);
    u[static_cast<std::size_t>(i) + 1] =
        evolution_operator(HermitianOperator(second), dt) * evolution_operator(HermitianOperator(first), dt) * u[static_cast<std::size_t>(i)];
  }
  Eigen::ComplexEigenSolver<CMatrix> es(u.back());
  const CMatrix f0 = es.eigenvectors().colwise().normalized();
  RVector quasi(4);
  for (Index a = 0; a < 4; ++a) quasi(a) = -std::arg(es.eigenvalues()(a)) / period;
  Index start = 0;
  (sys.floquet.amplitudes().adjoint() * f0).cwiseAbs().maxCoeff(&start);

  const int harmonics = 16;
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    const CMatrix sigma = pauli(spec.channel, j, 2);
    for (Index b = 0; b < 4; ++b) {
      for (int m = -harmonics; m <= harmonics; ++m) {
        const double energy = quasi(start) - quasi(b) - m * sys.drive_omega;
        if (energy <= 0.0 || energy >= spec.bandwidth) continue;
        Complex c = 0.0;
        for (int i = 0; i < n; ++i) {
          const double t = i * dt;
          const CVector fa = std::exp(Complex(0.0, quasi(start) * t)) * (u[static_cast<std::size_t>(i)] * f0.col(start));
          const CVector fb = std::exp(Complex(0.0, quasi(b) * t)) * (u[static_cast<std::size_t>(i)] * f0.col(b));
          c += fb.dot(sigma * fa) * std::exp(Complex(0.0, -m * sys.drive_omega * t));
        }
        total += std::norm(c / static_cast<double>(n));
      }
    }
  }
  return kTwoPi * dos * total / sys.matrix_element_sq;
}

RelaxationTrace trace_relaxation(const FgrSpec& spec, int realization, InitialState initial) {
  spec.validate();
  check_channel(spec);
  const FgrSystem sys = fgr_system(spec);
  return evolve(spec, sys, make_realization(spec, realization), initial);
}

FgrResult run_relaxation(const FgrSpec& spec) { return fgr_sweep(spec, {spec.coupling_g}, {spec.kappa}).front(); }

std::vector<FgrOutcome> fgr_sweep_outcomes(const FgrSpec& base, const std::vector<double>& couplings,
                                          const std::vector<double>& kappas, int workers) {
  base.validate();
  check_channel(base);
  if (couplings.empty() || kappas.empty()) throw ValidationError("fgr_sweep: empty grid");
  std::vector<FgrSpec> specs;
  std::vector<FgrSystem> systems;
  std::vector<FgrOutcome> out;
  std::vector<std::size_t> live;
  for (double g : couplings) {
    for (double kappa : kappas) {
      out.emplace_back();
      specs.push_back(with_point(base, g, kappa));
      systems.emplace_back();
      try {
        specs.back().validate();
        systems.back() = fgr_system(specs.back());
        fgr_span(specs.back(), systems.back());
        live.push_back(out.size() - 1);
      } catch (...) {
        out.back().error = std::current_exception();
      }
    }
  }

  const int nr = base.n_realizations;
  std::vector<std::vector<RelaxationTrace>> traces(specs.size(), std::vector<RelaxationTrace>(static_cast<std::size_t>(nr)));
  std::vector<std::vector<std::exception_ptr>> errors(specs.size(), std::vector<std::exception_ptr>(static_cast<std::size_t>(nr)));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < nr; r = next++) {
      const auto ri = static_cast<std::size_t>(r);
      std::exception_ptr setup;
      std::optional<Realization> bath;
      try {
        bath.emplace(make_realization(base, r));
      } catch (...) {
        setup = std::current_exception();
      }
      for (std::size_t p : live) {
        if (setup) {
          errors[p][ri] = setup;
          continue;
        }
        try {
          traces[p][ri] = evolve(specs[p], systems[p], *bath, InitialState::excited);
        } catch (...) {
          errors[p][ri] = std::current_exception();
        }
      }
    }
  };
  const int nw = std::max(1, std::min(workers, nr));
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t p : live) {
    const auto failed = std::find_if(errors[p].begin(), errors[p].end(), [](const auto& e) { return bool(e); });
    if (failed != errors[p].end()) {
      out[p].error = *failed;
      continue;
    }
    try {
      out[p].result = analyze(specs[p], systems[p], traces[p]);
    } catch (...) {
      out[p].error = std::current_exception();
    }
  }
  return out;
}

std::vector<FgrResult> fgr_sweep(const FgrSpec& base, const std::vector<double>& couplings,
                                 const std::vector<double>& kappas, int workers) {
  std::vector<FgrResult> out;
  for (auto& o : fgr_sweep_outcomes(base, couplings, kappas, workers)) {
    if (o.error) std::rethrow_exception(o.error);
    out.push_back(std::move(*o.result));
  }
  return out;
}

}  // namespace ceq
