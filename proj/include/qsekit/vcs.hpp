#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "channels.hpp"
#include "fermion_operator.hpp"
#include "linalg.hpp"
#include "symmetry.hpp"

namespace qsekit {

/// weight * (op - target)^2 added to the Hamiltonian before the channel
/// transform, constraining the prepared input state.
struct Penalty {
  std::string name;
  ComplexMatrix op;
  double target = 0.0;
  double weight = 0.0;
};

struct VcsSolution {
  double energy = 0.0;     // Tr[output_rho H], Hartree
  double objective = 0.0;  // lowest eigenvalue of the (penalized) transformed Hamiltonian
  ComplexVector input_state;
  ComplexMatrix output_rho;
  double fidelity_io = 0.0;
  std::map<std::string, double> symmetry_expectations;
  Eigen::Index ground_degeneracy = 1;
  bool continued = false;  // a degenerate ground block was resolved by continuation
};

/// H' = sum_i K_i^H H K_i.
inline ComplexMatrix transform_hamiltonian(const ComplexMatrix& h, const KrausChannel& ch) {
  require_square(h, "transform_hamiltonian");
  if (h.rows() != ch.dim()) throw std::invalid_argument("transform_hamiltonian: dimension mismatch");
  ComplexMatrix out = ComplexMatrix::Zero(h.rows(), h.cols());
  for (const auto& k : ch.kraus_ops) out.noalias() += k.adjoint() * h * k;
  return hermitian_part(out);
}

/// <phi| rho |phi>.
inline double fidelity(const ComplexMatrix& rho, const ComplexVector& phi) {
  if (rho.rows() != phi.size() || rho.cols() != phi.size())
    throw std::invalid_argument("fidelity: dimension mismatch");
  return phi.dot(rho * phi).real();
}

inline double expectation(const ComplexMatrix& op, const ComplexVector& psi) {
  return psi.dot(op * psi).real();
}

inline double expectation(const ComplexMatrix& op, const ComplexMatrix& rho) {
  return trace_product(op, rho).real();
}

inline ComplexMatrix penalized(const ComplexMatrix& h, const std::vector<Penalty>& penalties) {
  ComplexMatrix out = h;
  for (const auto& p : penalties) {
    if (p.weight < 0.0) throw std::invalid_argument("penalty '" + p.name + "' has negative weight");
    if (p.op.rows() != h.rows() || p.op.cols() != h.cols())
      throw std::invalid_argument("penalty '" + p.name + "' dimension mismatch");
    const ComplexMatrix shifted = p.op - p.target * ComplexMatrix::Identity(h.rows(), h.cols());
    out += p.weight * shifted * shifted;
  }
  return out;
}

struct GroundChoice {
  ComplexVector vector;
  double value = 0.0;
  Eigen::Index degeneracy = 1;
  bool continued = false;
};

/// Lowest eigenpair of `a`. Inside a degenerate ground block the column with
/// the largest overlap with `previous` wins; otherwise the first column.
inline GroundChoice ground_state(const ComplexMatrix& a, const ComplexVector* previous = nullptr,
                                 double degeneracy_tol = 1e-9) {
  const Spectrum sp = hermitian_eigensolve(a);
  const double e0 = sp.eigenvalues(0);
  const double tol = degeneracy_tol * std::max(1.0, std::abs(e0));
  Eigen::Index block = 1;
  while (block < sp.eigenvalues.size() && sp.eigenvalues(block) - e0 <= tol) ++block;
  GroundChoice out{sp.eigenvectors.col(0), e0, block, false};
  if (block > 1 && previous && previous->size() == a.rows()) {
    Eigen::Index best = 0;
    double best_overlap = std::abs(previous->dot(sp.eigenvectors.col(0)));
    for (Eigen::Index k = 1; k < block; ++k) {
      const double ov = std::abs(previous->dot(sp.eigenvectors.col(k)));
      if (ov > best_overlap + 1e-12) {
        best = k;
        best_overlap = ov;
      }
    }
    out.vector = sp.eigenvectors.col(best);
    out.continued = true;
  }
  // Fix the global phase: largest-magnitude component real positive.
  Eigen::Index imax = 0;
  out.vector.cwiseAbs().maxCoeff(&imax);
  out.vector *= std::conj(out.vector(imax)) / std::abs(out.vector(imax));
  return out;
}

namespace detail {

inline std::map<std::string, double> symmetry_report(const ComplexVector& psi) {
  std::map<std::string, double> out;
  const Eigen::Index dim = psi.size();
  if (dim < 2 || (dim & (dim - 1)) != 0) return out;
  const int modes = modes_for_dim(dim);
  if (modes > kMaxDenseModes) return out;
  out["N"] = expectation(fermion_to_dense(symmetry_operator(SymmetryKind::number, modes)), psi);
  if (modes % 2 == 0) {
    out["Sz"] = expectation(fermion_to_dense(symmetry_operator(SymmetryKind::sz, modes)), psi);
    out["S2"] = expectation(fermion_to_dense(symmetry_operator(SymmetryKind::s_squared, modes)), psi);
  }
  return out;
}

inline VcsSolution finish_solution(const ComplexMatrix& h, const KrausChannel& ch, const GroundChoice& g) {
  VcsSolution sol;
  sol.input_state = g.vector;
  sol.objective = g.value;
  sol.ground_degeneracy = g.degeneracy;
  sol.continued = g.continued;
  sol.output_rho = apply_channel(ch, g.vector * g.vector.adjoint());
  sol.energy = expectation(h, sol.output_rho);
  sol.fidelity_io = fidelity(sol.output_rho, g.vector);
  sol.symmetry_expectations = symmetry_report(g.vector);
  return sol;
}

}  // namespace detail

/// Optimal pure input for a fixed channel: the ground state of the transformed
/// (penalized) Hamiltonian. `previous` resolves degenerate ground spaces.
inline VcsSolution solve_vcs(const ComplexMatrix& h, const KrausChannel& ch,
                             const std::vector<Penalty>& penalties = {},
                             const ComplexVector* previous = nullptr) {
  if (!is_hermitian(h, 1e-10)) throw std::invalid_argument("solve_vcs: Hamiltonian is not Hermitian");
  const ComplexMatrix target = transform_hamiltonian(penalized(h, penalties), ch);
  return detail::finish_solution(h, ch, ground_state(target, previous));
}

/// Baseline without variation in the presence of the channel: the ground
/// state of the untransformed (penalized) Hamiltonian is sent through it.
inline VcsSolution no_variation_baseline(const ComplexMatrix& h, const KrausChannel& ch,
                                         const std::vector<Penalty>& penalties = {},
                                         const ComplexVector* previous = nullptr) {
  if (!is_hermitian(h, 1e-10)) throw std::invalid_argument("no_variation_baseline: Hamiltonian is not Hermitian");
  if (h.rows() != ch.dim()) throw std::invalid_argument("no_variation_baseline: dimension mismatch");
  return detail::finish_solution(h, ch, ground_state(hermitian_part(penalized(h, penalties)), previous));
}

/// A fixed pure input sent through the channel, without any optimization.
inline VcsSolution propagate_input(const ComplexMatrix& h, const KrausChannel& ch, const ComplexVector& input) {
  if (input.size() != h.rows() || h.rows() != ch.dim())
    throw std::invalid_argument("propagate_input: dimension mismatch");
  const double norm = input.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("propagate_input: zero input state");
  VcsSolution sol = detail::finish_solution(h, ch, GroundChoice{input / norm, 0.0, 1, false});
  sol.objective = sol.energy;
  return sol;
}

/// Penalty on a named symmetry operator in dense form.
inline Penalty symmetry_penalty(SymmetryKind kind, int modes, double target, double weight) {
  return {to_string(kind), fermion_to_dense(symmetry_operator(kind, modes)), target, weight};
}

inline VcsSolution solve_vcs(const FermionOperator& h, const KrausChannel& ch,
                             const std::vector<Penalty>& penalties = {},
                             const ComplexVector* previous = nullptr) {
  return solve_vcs(fermion_to_dense(h), ch, penalties, previous);
}

}  // namespace qsekit
