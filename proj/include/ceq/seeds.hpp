#pragma once

#include <cstdint>
#include <initializer_list>

namespace ceq {

/// One splitmix64 step: advances `state` and returns the mixed output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for a task addressed by indices under a master seed. Depends only
/// on (master, indices), never on scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t state = master;
  std::uint64_t out = splitmix64(state);
  for (std::uint64_t i : indices) {
    state ^= out + i;
    out = splitmix64(state);
  }
  return out;
}

}  // namespace ceq
