#include "ceq/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ceq {

HermitianOperator::HermitianOperator(CMatrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) throw ValidationError("HermitianOperator: matrix is not square");
  if (entries_.rows() < 2) throw ValidationError("HermitianOperator: dimension must be at least 2");
  if (!entries_.allFinite()) throw ValidationError("HermitianOperator: non-finite entries");
  const double defect = hermiticity_defect(entries_);
  if (defect > 1e-12) {
    std::ostringstream msg;
    msg << "HermitianOperator: relative anti-Hermitian part " << defect << " exceeds 1e-12";
    throw ValidationError(msg.str());
  }
  entries_ = 0.5 * (entries_ + entries_.adjoint()).eval();
}

HermitianOperator& HermitianOperator::operator+=(const HermitianOperator& other) {
  if (other.dim() != dim()) throw ValidationError("HermitianOperator: dimension mismatch in sum");
  entries_ += other.entries_;
  return *this;
}

HermitianOperator& HermitianOperator::operator*=(double s) {
  entries_ *= s;
  return *this;
}

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b) { return a += b; }

HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b) { return a += (-1.0) * b; }

HermitianOperator operator*(double s, HermitianOperator a) { return a *= s; }

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  const double n = amps_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("StateVector: zero or non-finite vector");
  amps_ /= n;
}

double StateVector::expectation(const HermitianOperator& op) const {
  if (op.dim() != dim()) throw ValidationError("StateVector: dimension mismatch");
  return amps_.dot(op.matrix() * amps_).real();
}

StateVector StateVector::basis(Index dim, Index i) {
  CVector v = CVector::Zero(dim);
  v(i) = 1.0;
  return StateVector(v);
}

TimeDependentOperator::TimeDependentOperator(HermitianOperator static_part) : static_(std::move(static_part)) {}

Index TimeDependentOperator::dim() const {
  if (static_.dim() > 0) return static_.dim();
  return terms_.empty() ? 0 : terms_.front().op.dim();
}

void TimeDependentOperator::add(HermitianOperator op, Coefficient coefficient) {
  if (dim() != 0 && op.dim() != dim()) throw ValidationError("TimeDependentOperator: dimension mismatch");
  terms_.push_back({std::move(op), std::move(coefficient)});
}

void TimeDependentOperator::add_static(const HermitianOperator& op) {
  if (static_.dim() == 0) {
    if (dim() != 0 && op.dim() != dim()) throw ValidationError("TimeDependentOperator: dimension mismatch");
    static_ = op;
  } else {
    static_ += op;
  }
}

CMatrix TimeDependentOperator::matrix_at(double t) const {
  const Index n = dim();
  CMatrix m = static_.dim() > 0 ? static_.matrix() : CMatrix::Zero(n, n);
  for (const auto& term : terms_) {
    const double c = term.coefficient(t);
    if (c != 0.0) m.noalias() += c * term.op.matrix();
  }
  return m;
}

Eigensystem eigendecompose(const HermitianOperator& op, Index k) {
  const Index n = op.dim();
  if (k < 1 || k > n) throw ValidationError("eigendecompose: k out of range");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigendecompose: solver did not converge (dim " << n << ", norm " << op.norm() << ")";
    throw NumericalError(msg.str());
  }
  Eigensystem out{solver.eigenvalues().head(k), solver.eigenvectors().leftCols(k)};

  const double scale = std::max(op.matrix().cwiseAbs().colwise().sum().maxCoeff(), 1e-300);
  const CMatrix residual = op.matrix() * out.vectors - out.vectors * out.values.asDiagonal();
  for (Index j = 0; j < k; ++j) {
    const double r = residual.col(j).norm();
    if (r > 1e-9 * scale) {
      std::ostringstream msg;
      msg << "eigendecompose: residual " << r << " for eigenpair " << j << " exceeds 1e-9 ||H|| = " << 1e-9 * scale;
      throw NumericalError(msg.str());
    }
  }
  return out;
}

CMatrix evolution_operator(const Eigensystem& eig, double t) {
  const CVector phases = (eig.values.cast<Complex>() * Complex(0.0, -t)).array().exp();
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

CMatrix evolution_operator(const HermitianOperator& op, double t) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("evolution_operator: eigensolver failed");
  return evolution_operator(Eigensystem{solver.eigenvalues(), solver.eigenvectors()}, t);
}

StateVector propagate_static(const StateVector& state, const HermitianOperator& op, double t) {
  if (state.dim() != op.dim()) throw ValidationError("propagate_static: dimension mismatch");
  if (t == 0.0) return state;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(op.matrix());
  if (solver.info() != Eigen::Success) throw NumericalError("propagate_static: eigensolver failed");
  const CVector coeffs = solver.eigenvectors().adjoint() * state.amplitudes();
  const CVector phases = (solver.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp();
  return StateVector(solver.eigenvectors() * (phases.array() * coeffs.array()).matrix());
}

double default_timestep(double max_angular_frequency) {
  if (!(max_angular_frequency > 0.0)) throw ValidationError("default_timestep: frequency must be positive");
  return kTwoPi / max_angular_frequency / 200.0;
}

namespace {

Index step_count(double t0, double t1, double dt) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return 0;
  return static_cast<Index>(std::ceil(span / dt - 1e-9));
}

void check_state(const StateVector& state, const TimeDependentOperator& op) {
  if (state.dim() != op.dim()) throw ValidationError("propagation: state/operator dimension mismatch");
}

}  // namespace

StateVector propagate_timedep(const StateVector& state, const TimeDependentOperator& op, double t0, double t1,
                              double dt, const Observer& observer) {
  check_state(state, op);
  if (op.max_frequency() > 0.0 && dt > kTwoPi / op.max_frequency() / 50.0 * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "propagate_timedep: dt = " << dt << " exceeds 1/50 of the shortest period "
        << kTwoPi / op.max_frequency();
    throw ValidationError(msg.str());
  }
  const Index n = step_count(t0, t1, dt);
  if (n == 0) return state;
  const double h = (t1 - t0) / static_cast<double>(n);
  const Complex minus_i(0.0, -1.0);
  // explicit RK4 is stable only for |lambda dt| below ~2.8
  const double bound = op.matrix_at(t0).cwiseAbs().colwise().sum().maxCoeff();
  if (bound * std::abs(h) > 2.5) {
    std::ostringstream msg;
    msg << "propagate_timedep: step " << std::abs(h) << " too long for spectral bound " << bound;
    throw ValidationError(msg.str());
  }

  CVector psi = state.amplitudes();
  CVector k1, k2, k3, k4, tmp;
  for (Index s = 0; s < n; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    const CMatrix ha = op.matrix_at(t);
    const CMatrix hm = op.matrix_at(t + 0.5 * h);
    const CMatrix hb = op.matrix_at(t + h);
    k1.noalias() = minus_i * (ha * psi);
    tmp = psi + (0.5 * h) * k1;
    k2.noalias() = minus_i * (hm * tmp);
    tmp = psi + (0.5 * h) * k2;
    k3.noalias() = minus_i * (hm * tmp);
    tmp = psi + h * k3;
    k4.noalias() = minus_i * (hb * tmp);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    psi.normalize();
    if (observer) observer(t0 + static_cast<double>(s + 1) * h, psi);
  }
  return StateVector(psi);
}

StateVector propagate_magnus(const StateVector& state, const TimeDependentOperator& op, double t0, double t1,
                             double dt, const Observer& observer, MagnusOrder order) {
  check_state(state, op);
  const Index n = step_count(t0, t1, dt);
  if (n == 0) return state;
  const double h = (t1 - t0) / static_cast<double>(n);
  const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
  const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
  const Complex comm_coeff(0.0, -std::sqrt(3.0) / 12.0 * h * h);

  CVector psi = state.amplitudes();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver;
  for (Index s = 0; s < n; ++s) {
    const double t = t0 + static_cast<double>(s) * h;
    CMatrix gen;
    if (order == MagnusOrder::second) {
      gen = h * op.matrix_at(t + 0.5 * h);
    } else {
      const CMatrix h1 = op.matrix_at(t + c1 * h);
      const CMatrix h2 = op.matrix_at(t + c2 * h);
      // Hermitian step generator: (h/2)(H1 + H2) - i (sqrt3/12) h^2 [H2, H1]
      gen = (0.5 * h) * (h1 + h2);
      gen.noalias() += comm_coeff * (h2 * h1 - h1 * h2);
      gen = 0.5 * (gen + gen.adjoint()).eval();
    }
    solver.compute(gen);
    if (solver.info() != Eigen::Success) throw NumericalError("propagate_magnus: eigensolver failed");
    const CVector coeffs = solver.eigenvectors().adjoint() * psi;
    const CVector phases = (solver.eigenvalues().cast<Complex>() * Complex(0.0, -1.0)).array().exp();
    psi = solver.eigenvectors() * (phases.array() * coeffs.array()).matrix();
    psi.normalize();
    if (observer) observer(t0 + static_cast<double>(s + 1) * h, psi);
  }
  return StateVector(psi);
}

double timedep_convergence(const StateVector& state, const TimeDependentOperator& op, double t0, double t1,
                           double dt) {
  const StateVector coarse = propagate_timedep(state, op, t0, t1, dt);
  const StateVector fine = propagate_timedep(state, op, t0, t1, 0.5 * dt);
  return (coarse.amplitudes() - fine.amplitudes()).norm();
}

namespace {

// Negative pivots of the unpivoted banded LDL^T of (H - x I).
Index banded_inertia(const RMatrix& bands, double x, double pivmin, RMatrix& l, RVector& d) {
  const Index p = bands.rows() - 1;
  const Index n = bands.cols();
  Index count = 0;
  for (Index i = 0; i < n; ++i) {
    // l(m, i) holds L(i, i - 1 - m)
    for (Index jj = std::max<Index>(0, i - p); jj < i; ++jj) {
      double v = bands(i - jj, jj);
      for (Index m = std::max<Index>(0, i - p); m < jj; ++m) v -= l(i - 1 - m, i) * l(jj - 1 - m, jj) * d(m);
      l(i - 1 - jj, i) = v / d(jj);
    }
    double di = bands(0, i) - x;
    for (Index m = std::max<Index>(0, i - p); m < i; ++m) di -= l(i - 1 - m, i) * l(i - 1 - m, i) * d(m);
    if (std::abs(di) < pivmin) di = -pivmin;
    d(i) = di;
    if (di < 0.0) ++count;
  }
  return count;
}

}  // namespace

Eigensystem banded_lowest(const RMatrix& bands, Index k) {
  const Index p = bands.rows() - 1;
  const Index n = bands.cols();
  if (p < 0 || n < 2 || p >= n) throw ValidationError("banded_lowest: inconsistent band storage");
  if (k < 1 || k > n) throw ValidationError("banded_lowest: k out of range");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Index i = 0; i < n; ++i) {
    double r = 0.0;
    for (Index q = 1; q <= p; ++q) {
      if (i + q < n) r += std::abs(bands(q, i));
      if (i - q >= 0) r += std::abs(bands(q, i - q));
    }
    lo = std::min(lo, bands(0, i) - r);
    hi = std::max(hi, bands(0, i) + r);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double eps = std::numeric_limits<double>::epsilon();
  const double pivmin = eps * eps * scale + 1e-300;

  RMatrix l = RMatrix::Zero(std::max<Index>(p, 1), n);
  RVector d(n);
  RVector values(k);
  for (Index j = 0; j < k; ++j) {
    double a = j > 0 ? values(j - 1) - eps * scale : lo - eps * scale;
    double b = hi + eps * scale;
    for (int it = 0; it < 200 && (b - a) > 2.0 * eps * (std::abs(a) + std::abs(b)) + pivmin; ++it) {
      const double mid = 0.5 * (a + b);
      if (banded_inertia(bands, mid, pivmin, l, d) > j) {
        b = mid;
      } else {
        a = mid;
      }
    }
    values(j) = 0.5 * (a + b);
  }

  std::vector<Eigen::Triplet<double>> trip;
  for (Index i = 0; i < n; ++i) {
    for (Index q = 0; q <= p && i + q < n; ++q) {
      if (bands(q, i) == 0.0 && q > 0) continue;
      trip.emplace_back(i, i + q, bands(q, i));
      if (q > 0) trip.emplace_back(i + q, i, bands(q, i));
    }
  }
  Eigen::SparseMatrix<double> base(n, n);
  base.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseMatrix<double> ident(n, n);
  ident.setIdentity();

  RMatrix vecs(n, k);
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Index j = 0; j < k; ++j) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    double shift = values(j);
    for (int attempt = 0; attempt < 4; ++attempt) {
      const Eigen::SparseMatrix<double> shifted = base - shift * ident;
      lu.compute(shifted);
      if (lu.info() == Eigen::Success) break;
      shift += 4.0 * eps * scale;
    }
    if (lu.info() != Eigen::Success) throw NumericalError("banded_lowest: shifted factorization failed");
    RVector x(n);
    for (Index i = 0; i < n; ++i) x(i) = unif(rng);
    for (int it = 0; it < 4; ++it) {
      x = lu.solve(x);
      for (Index q = 0; q < j; ++q) x -= vecs.col(q).dot(x) * vecs.col(q);
      x.normalize();
    }
    vecs.col(j) = x;
  }

  for (Index j = 0; j < k; ++j) {
    const double r = (base * vecs.col(j) - values(j) * vecs.col(j)).norm();
    if (r > 1e-9 * scale) {
      std::ostringstream msg;
      msg << "banded_lowest: residual " << r << " for eigenpair " << j;
      throw NumericalError(msg.str());
    }
  }
  return {values, vecs.cast<Complex>()};
}

}  // namespace ceq
