#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace qsekit {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Eigenpairs sorted by ascending eigenvalue. For generalized problems the
/// columns are orthonormal under the metric and `retained_dim` is the size
/// of the subspace that survived canonical orthogonalization.
struct Spectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;
  Eigen::Index retained_dim = 0;
};

inline double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty, got " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

inline bool is_hermitian(const ComplexMatrix& a, double tol = 1e-10) {
  if (a.rows() != a.cols()) return false;
  return max_abs(a - a.adjoint()) <= tol * std::max(1.0, max_abs(a));
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

/// PSD test by reconstruction: symmetrize, diagonalize, and check the lowest
/// eigenvalue against -tol relative to the spectral radius.
inline bool is_psd(const ComplexMatrix& a, double tol = 1e-10) {
  if (!is_hermitian(a, tol)) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  const RealVector& w = es.eigenvalues();
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  return w.minCoeff() >= -tol * scale;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  // Tr[a b] without forming the product.
  return (a.transpose().cwiseProduct(b)).sum();
}

namespace detail {

// Connected components of the coupling graph |A_ij| > threshold. Diagonalizing
// each component separately keeps eigenvectors of decoupled sectors (particle
// number, spin projection, ...) free of accidental mixing between degenerate
// levels that live in different blocks.
inline std::vector<std::vector<Eigen::Index>> coupling_blocks(const ComplexMatrix& a,
                                                              double threshold) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> parent(n);
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (std::abs(a(i, j)) > threshold) parent[find(i)] = find(j);
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> slot(n, -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<Eigen::Index>(blocks.size());
      blocks.emplace_back();
    }
    blocks[slot[r]].push_back(i);
  }
  return blocks;
}

inline Spectrum sorted_spectrum(std::vector<double> values, std::vector<ComplexVector> vectors,
                                Eigen::Index dim) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  Spectrum out;
  const auto m = static_cast<Eigen::Index>(values.size());
  out.eigenvalues.resize(m);
  out.eigenvectors.resize(dim, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    out.eigenvalues(k) = values[order[k]];
    out.eigenvectors.col(k) = vectors[order[k]];
  }
  out.retained_dim = m;
  return out;
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix. Asymmetry above 1e-8 (relative)
/// is rejected; smaller asymmetry is removed by taking (A + A^H)/2.
inline Spectrum hermitian_eigensolve(const ComplexMatrix& a) {
  require_square(a, "hermitian_eigensolve");
  const double scale = std::max(1.0, max_abs(a));
  if (!a.allFinite()) throw std::invalid_argument("hermitian_eigensolve: non-finite entries");
  const double asym = max_abs(a - a.adjoint());
  if (asym > 1e-8 * scale)
    throw std::invalid_argument("hermitian_eigensolve: matrix is not Hermitian (asymmetry " +
                                std::to_string(asym) + ")");
  const ComplexMatrix h = hermitian_part(a);
  const Eigen::Index n = h.rows();

  const auto blocks = detail::coupling_blocks(h, 1e-14 * scale);
  std::vector<double> values;
  std::vector<ComplexVector> vectors;
  values.reserve(n);
  vectors.reserve(n);
  for (const auto& idx : blocks) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    ComplexMatrix sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = h(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sub);
    if (es.info() != Eigen::Success)
      throw NumericalError("hermitian_eigensolve: eigensolver did not converge");
    for (Eigen::Index k = 0; k < m; ++k) {
      ComplexVector v = ComplexVector::Zero(n);
      for (Eigen::Index i = 0; i < m; ++i) v(idx[i]) = es.eigenvectors()(i, k);
      values.push_back(es.eigenvalues()(k));
      vectors.push_back(std::move(v));
    }
  }
  return detail::sorted_spectrum(std::move(values), std::move(vectors), n);
}

/// Solves H c = lambda S c by canonical orthogonalization: metric directions
/// with eigenvalue <= metric_cutoff * max_eig(S) are discarded, the projected
/// Hermitian problem is solved, and the vectors are mapped back so that
/// C^H S C = I on the retained space. Metric eigenvalues below
/// -negative_tol * max_eig(S) are an error; estimated (noisy) metrics need a
/// tolerance at the noise scale.
inline Spectrum generalized_eigensolve(const ComplexMatrix& h, const ComplexMatrix& s,
                                       double metric_cutoff = 1e-10, double negative_tol = 1e-8) {
  require_square(h, "generalized_eigensolve");
  require_square(s, "generalized_eigensolve");
  if (h.rows() != s.rows())
    throw std::invalid_argument("generalized_eigensolve: H and S dimensions differ");
  if (metric_cutoff < 0.0)
    throw std::invalid_argument("generalized_eigensolve: negative metric cutoff");
  if (negative_tol < 0.0)
    throw std::invalid_argument("generalized_eigensolve: negative tolerance must be >= 0");

  if (max_abs(h - h.adjoint()) > 1e-8 * std::max(1.0, max_abs(h)))
    throw std::invalid_argument("generalized_eigensolve: H is not Hermitian");

  const Spectrum metric = hermitian_eigensolve(s);
  const double top = metric.eigenvalues.size() ? metric.eigenvalues.maxCoeff() : 0.0;
  if (!(top > 0.0))
    throw NumericalError("generalized_eigensolve: metric has no positive eigenvalue");
  if (metric.eigenvalues.minCoeff() < -negative_tol * top)
    throw NumericalError("generalized_eigensolve: metric has a negative eigenvalue " +
                         std::to_string(metric.eigenvalues.minCoeff()) +
                         " (overlap matrix is not positive semidefinite)");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < metric.eigenvalues.size(); ++k)
    if (metric.eigenvalues(k) > metric_cutoff * top) keep.push_back(k);
  if (keep.empty()) throw NumericalError("generalized_eigensolve: empty retained subspace");

  const auto r = static_cast<Eigen::Index>(keep.size());
  ComplexMatrix x(h.rows(), r);
  for (Eigen::Index c = 0; c < r; ++c)
    x.col(c) = metric.eigenvectors.col(keep[c]) / std::sqrt(metric.eigenvalues(keep[c]));

  const ComplexMatrix projected = hermitian_part(x.adjoint() * hermitian_part(h) * x);
  Spectrum inner = hermitian_eigensolve(projected);
  Spectrum out;
  out.eigenvalues = std::move(inner.eigenvalues);
  out.eigenvectors = x * inner.eigenvectors;
  out.retained_dim = r;
  return out;
}

/// Residual-based check used by tests and callers that want to verify a pair.
inline double eigen_residual(const ComplexMatrix& a, const ComplexVector& v, double lambda) {
  return (a * v - lambda * v).norm();
}

}  // namespace qsekit
