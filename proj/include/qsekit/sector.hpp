#pragma once

// Fixed particle-number blocks of Fock-space operators.

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fock.hpp"
#include "linalg.hpp"

namespace qsekit {

/// Fock-basis indices of all occupation states holding `n` particles,
/// ascending.
inline std::vector<Eigen::Index> sector_basis(int modes, int n) {
  require_dense_modes(modes, "sector_basis");
  if (n < 0 || n > modes) throw std::invalid_argument("sector_basis: particle number outside [0, modes]");
  std::vector<Eigen::Index> out;
  const std::uint64_t dim = std::uint64_t{1} << modes;
  for (std::uint64_t b = 0; b < dim; ++b)
    if (std::popcount(b) == n) out.push_back(static_cast<Eigen::Index>(b));
  return out;
}

/// Spectrum of `h` restricted to the n-particle block; eigenvectors are
/// embedded back into the full Fock space.
inline Spectrum sector_spectrum(const ComplexMatrix& h, int n) {
  require_square(h, "sector_spectrum");
  const int modes = modes_for_dim(h.rows());
  const auto idx = sector_basis(modes, n);
  const auto d = static_cast<Eigen::Index>(idx.size());
  ComplexMatrix block(d, d);
  for (Eigen::Index a = 0; a < d; ++a)
    for (Eigen::Index b = 0; b < d; ++b) block(a, b) = h(idx[a], idx[b]);
  Spectrum s = hermitian_eigensolve(block);
  ComplexMatrix full = ComplexMatrix::Zero(h.rows(), d);
  for (Eigen::Index a = 0; a < d; ++a) full.row(idx[a]) = s.eigenvectors.row(a);
  s.eigenvectors = std::move(full);
  return s;
}

/// Lowest n-particle eigenvector with its largest component made real positive.
inline ComplexVector sector_ground_state(const ComplexMatrix& h, int n) {
  const Spectrum s = sector_spectrum(h, n);
  ComplexVector v = s.eigenvectors.col(0);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  v *= std::conj(v(imax)) / std::abs(v(imax));
  return v;
}

}  // namespace qsekit
