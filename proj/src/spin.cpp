#include "ceq/spin.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace ceq {

CMatrix pauli(Axis axis) {
  CMatrix m(2, 2);
  switch (axis) {
    case Axis::x:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case Axis::y:
      m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
      break;
    case Axis::z:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return m;
}

CMatrix pauli(Axis axis, int site, int num_spins) {
  if (site < 0 || site >= num_spins) throw ValidationError("pauli: site out of range");
  CMatrix out = CMatrix::Identity(1, 1);
  for (int s = 0; s < num_spins; ++s) {
    out = Eigen::kroneckerProduct(out, s == site ? pauli(axis) : CMatrix::Identity(2, 2)).eval();
  }
  return out;
}

CVector spin_basis_state(std::initializer_list<int> bits) {
  Index index = 0;
  for (int b : bits) index = 2 * index + (b != 0 ? 1 : 0);
  CVector v = CVector::Zero(Index{1} << bits.size());
  v(index) = 1.0;
  return v;
}

}  // namespace ceq
