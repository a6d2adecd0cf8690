#pragma once

#include <complex>
#include <random>
#include <string>

#include "qsekit/linalg.hpp"

namespace testing {

using qsekit::ComplexMatrix;
using qsekit::ComplexVector;
using qsekit::cplx;

inline std::string fixture(const std::string& name) { return std::string(QSEKIT_FIXTURES) + "/" + name; }

inline cplx gaussian(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double re = n(rng);
  return {re, n(rng)};
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = gaussian(rng);
  return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index d) {
  const ComplexMatrix a = random_matrix(rng, d, d);
  return (a + a.adjoint()) / 2.0;
}

inline ComplexVector random_state(std::mt19937_64& rng, Eigen::Index d) {
  ComplexVector v = random_matrix(rng, d, 1);
  return v / v.norm();
}

/// Random density matrix of the given rank (full rank when rank <= 0).
inline ComplexMatrix random_density(std::mt19937_64& rng, Eigen::Index d, Eigen::Index rank = 0) {
  const ComplexMatrix a = random_matrix(rng, d, rank > 0 ? rank : d);
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

inline double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
