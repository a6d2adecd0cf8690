#pragma once

// Occupation-number basis shared by every dense representation in the
// library. Mode (qubit) 0 is the most significant bit of the basis index, so
// the index of |n_0 n_1 ... n_{M-1}> is sum_p n_p 2^(M-1-p); a set bit means
// the mode is occupied.

#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "linalg.hpp"

namespace qsekit {

/// Guard for dense 2^M representations.
inline constexpr int kMaxDenseModes = 12;

inline void require_dense_modes(int modes, const char* what) {
  if (modes < 0 || modes > kMaxDenseModes)
    throw std::invalid_argument(std::string(what) + ": " + std::to_string(modes) +
                                " modes exceeds the dense limit of " +
                                std::to_string(kMaxDenseModes));
}

inline std::uint64_t mode_mask(int modes, int p) {
  return std::uint64_t{1} << (modes - 1 - p);
}

struct LadderAction {
  std::uint64_t index;
  int sign;
};

/// Applies a_p (or a_p^dagger) to basis state `index`; nullopt when the state
/// is annihilated. The sign is the Jordan-Wigner parity of modes < p.
inline std::optional<LadderAction> apply_ladder(int modes, int p, bool dagger,
                                                std::uint64_t index) {
  const std::uint64_t bit = mode_mask(modes, p);
  const bool occupied = (index & bit) != 0;
  if (occupied == dagger) return std::nullopt;
  const int parity = std::popcount(index >> (modes - p)) & 1;
  return LadderAction{index ^ bit, parity ? -1 : 1};
}

inline int occupation_count(std::uint64_t index) { return std::popcount(index); }

/// Computational basis state |n_0 ... n_{M-1}> from a string such as "1100".
inline ComplexVector occupation_state(const std::string& occupations) {
  const int modes = static_cast<int>(occupations.size());
  require_dense_modes(modes, "occupation_state");
  std::uint64_t index = 0;
  for (int p = 0; p < modes; ++p) {
    if (occupations[p] == '1')
      index |= mode_mask(modes, p);
    else if (occupations[p] != '0')
      throw std::invalid_argument("occupation_state: expected only 0/1 characters");
  }
  ComplexVector v = ComplexVector::Zero(Eigen::Index{1} << modes);
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

/// Number of modes represented by a dense dimension, or throws.
inline int modes_for_dim(Eigen::Index dim) {
  if (dim <= 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

}  // namespace qsekit
