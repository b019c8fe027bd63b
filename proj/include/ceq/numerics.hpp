#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ceq/errors.hpp"

namespace ceq {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Relative anti-Hermitian part ||A - A^H|| / ||A|| of any square expression.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  const double n = a.norm();
  if (n == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / n;
}

/// Dense Hermitian matrix in energy units (angular frequency, hbar = 1).
///
/// Construction checks squareness, dim >= 2 and Hermiticity to 1e-12
/// relative, then symmetrizes so downstream code sees an exactly
/// Hermitian matrix.
class HermitianOperator {
 public:
  HermitianOperator() = default;
  explicit HermitianOperator(CMatrix entries);

  template <typename Derived>
  static HermitianOperator from(const Eigen::MatrixBase<Derived>& m) {
    return HermitianOperator(CMatrix(m.template cast<Complex>()));
  }

  static HermitianOperator zero(Index dim) { return HermitianOperator(CMatrix::Zero(dim, dim)); }

  Index dim() const { return entries_.rows(); }
  const CMatrix& matrix() const { return entries_; }
  double norm() const { return entries_.norm(); }

  HermitianOperator& operator+=(const HermitianOperator& other);
  HermitianOperator& operator*=(double s);

 private:
  CMatrix entries_;
};

HermitianOperator operator+(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator-(HermitianOperator a, const HermitianOperator& b);
HermitianOperator operator*(double s, HermitianOperator a);

/// Normalized state vector. The constructor normalizes; a zero vector is
/// rejected.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVector amplitudes);

  Index dim() const { return amps_.size(); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](Index i) const { return amps_(i); }
  double norm() const { return amps_.norm(); }

  Complex overlap(const StateVector& other) const { return amps_.dot(other.amps_); }
  double expectation(const HermitianOperator& op) const;

  static StateVector basis(Index dim, Index i);

 private:
  CVector amps_;
};

/// Sum of Hermitian terms, each scaled by a real coefficient function of
/// time. max_frequency is the fastest angular frequency present in the
/// coefficients; the RK4 integrator uses it to validate its step.
class TimeDependentOperator {
 public:
  using Coefficient = std::function<double(double)>;
  struct Term {
    HermitianOperator op;
    Coefficient coefficient;
  };

  TimeDependentOperator() = default;
  explicit TimeDependentOperator(HermitianOperator static_part);

  void add(HermitianOperator op, Coefficient coefficient);
  void add_static(const HermitianOperator& op);

  void set_max_frequency(double omega) { max_frequency_ = omega; }
  double max_frequency() const { return max_frequency_; }

  Index dim() const;
  const HermitianOperator& static_part() const { return static_; }
  const std::vector<Term>& terms() const { return terms_; }

  CMatrix matrix_at(double t) const;
  HermitianOperator at(double t) const { return HermitianOperator(matrix_at(t)); }

 private:
  HermitianOperator static_;
  std::vector<Term> terms_;
  double max_frequency_ = 0.0;
};

struct Eigensystem {
  RVector values;   // ascending
  CMatrix vectors;  // orthonormal columns
};

/// Lowest k eigenpairs of a Hermitian operator. Throws NumericalError when
/// the solver fails or a residual exceeds 1e-9 ||H||.
Eigensystem eigendecompose(const HermitianOperator& op, Index k);
inline Eigensystem eigendecompose(const HermitianOperator& op) { return eigendecompose(op, op.dim()); }

/// Generic entry point for any square Eigen expression; validates Hermiticity.
template <typename Derived>
Eigensystem eigendecompose(const Eigen::MatrixBase<Derived>& m, Index k) {
  const CMatrix dense = m.template cast<Complex>();
  if (dense.rows() != dense.cols()) throw ValidationError("eigendecompose: matrix is not square");
  if (hermiticity_defect(dense) > 1e-12) throw ValidationError("eigendecompose: matrix is not Hermitian");
  return eigendecompose(HermitianOperator(dense), k);
}

/// e^{-iHt} as a dense unitary.
CMatrix evolution_operator(const HermitianOperator& op, double t);
CMatrix evolution_operator(const Eigensystem& eig, double t);

/// e^{-iHt}|psi> through the eigendecomposition of H.
StateVector propagate_static(const StateVector& state, const HermitianOperator& op, double t);

/// Called after every accepted step with (time, state).
using Observer = std::function<void(double, const CVector&)>;

/// Fixed-step classical RK4 with renormalization after every step.
/// dt is shrunk so that an integer number of steps spans [t0, t1]; a dt
/// above 1/50 of the shortest declared period, or long enough to leave the
/// stability region for the spectral bound of H(t0), is rejected.
StateVector propagate_timedep(const StateVector& state, const TimeDependentOperator& op, double t0,
                              double t1, double dt, const Observer& observer = {});

enum class MagnusOrder { second, fourth };

/// Commutator Magnus integrator with exact exponentials of the step
/// generator. Unitary to round-off. The second-order (exponential midpoint)
/// variant stays adiabatic when steps are long compared to inverse gaps of
/// far-off levels, where the commutator series no longer converges.
StateVector propagate_magnus(const StateVector& state, const TimeDependentOperator& op, double t0,
                             double t1, double dt, const Observer& observer = {},
                             MagnusOrder order = MagnusOrder::fourth);

/// ||psi(dt) - psi(dt/2)|| for the RK4 integrator.
double timedep_convergence(const StateVector& state, const TimeDependentOperator& op, double t0,
                           double t1, double dt);

/// Default RK4 step: 1/200 of the fastest drive period.
double default_timestep(double max_angular_frequency);

/// Lowest k eigenpairs of a real symmetric banded matrix stored by
/// diagonals: bands(r, i) = H(i, i + r), r = 0..p. Bisection on the inertia
/// of a banded LDL^T factorization, then shift-and-invert iteration.
/// Cost is linear in the dimension, which keeps 2001-point phase grids cheap.
Eigensystem banded_lowest(const RMatrix& bands, Index k);

}  // namespace ceq
