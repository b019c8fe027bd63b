#pragma once

#include "ceq/numerics.hpp"

namespace ceq {

enum class Axis { x, y, z };

/// Pauli matrix on one spin of an n-spin register. Spin 0 is the most
/// significant tensor factor; basis state |0> is the sigma^z = +1 state.
CMatrix pauli(Axis axis);
CMatrix pauli(Axis axis, int site, int num_spins);

/// Computational basis state from per-spin bits (0 or 1), spin 0 first.
CVector spin_basis_state(std::initializer_list<int> bits);

}  // namespace ceq
