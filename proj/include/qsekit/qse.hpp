#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fermion_operator.hpp"
#include "jordan_wigner.hpp"
#include "linalg.hpp"
#include "pauli_operator.hpp"
#include "rdm.hpp"
#include "symmetry.hpp"

namespace qsekit {

enum class BasisKind { fermionic, qubit };

inline std::string to_string(BasisKind k) { return k == BasisKind::fermionic ? "fermionic" : "qubit"; }

inline BasisKind parse_basis_kind(const std::string& s) {
  if (s == "fermionic") return BasisKind::fermionic;
  if (s == "qubit") return BasisKind::qubit;
  throw std::invalid_argument("unknown subspace kind '" + s + "' (expected fermionic|qubit)");
}

/// Expansion operators E_a; the subspace is spanned by E_a |Psi> (or E_a rho).
/// Fermionic excitations are stored already mapped through Jordan-Wigner.
struct ExpansionBasis {
  BasisKind kind = BasisKind::fermionic;
  int order = 1;
  bool includes_reference = true;
  std::vector<PauliOperator> operators;
  std::vector<std::string> labels;

  std::size_t size() const { return operators.size(); }
};

inline constexpr int kMaxSubspaceModes = 8;

namespace detail {

// Key identifying an operator up to an overall scalar.
inline std::string scale_free_key(const FermionOperator& op) {
  if (op.is_zero()) return "0";
  const cplx lead = op.terms().begin()->second;
  return (op * (1.0 / lead)).str();
}

}  // namespace detail

/// Identity (when includes_reference) followed by all a+_i a_j, i, j in
/// [0, M); order 2 appends the products a+_i a_j a+_k a_l that are nonzero
/// and not scalar multiples of an operator already present.
inline ExpansionBasis fermionic_basis(int modes, int order, bool includes_reference = true) {
  if (modes < 1 || modes > kMaxSubspaceModes)
    throw std::invalid_argument("fermionic_basis: mode count outside [1, " + std::to_string(kMaxSubspaceModes) + "]");
  if (order < 1 || order > 2) throw std::invalid_argument("fermionic_basis: order must be 1 or 2");
  ExpansionBasis b;
  b.kind = BasisKind::fermionic;
  b.order = order;
  b.includes_reference = includes_reference;
  std::set<std::string> seen;
  auto push = [&](const FermionOperator& op, std::string label) {
    const FermionOperator canon = normal_order(op);
    if (canon.is_zero()) return;
    if (!seen.insert(detail::scale_free_key(canon)).second) return;
    b.operators.push_back(jordan_wigner(canon));
    b.labels.push_back(std::move(label));
  };
  if (includes_reference) push(FermionOperator::identity(modes), "I");
  for (int i = 0; i < modes; ++i)
    for (int j = 0; j < modes; ++j)
      push(FermionOperator::excitation(modes, i, j), std::to_string(i) + "^ " + std::to_string(j));
  if (order == 2)
    for (int i = 0; i < modes; ++i)
      for (int j = 0; j < modes; ++j)
        for (int k = 0; k < modes; ++k)
          for (int l = 0; l < modes; ++l)
            push(FermionOperator(modes, {cre(i), des(j), cre(k), des(l)}),
                 std::to_string(i) + "^ " + std::to_string(j) + " " + std::to_string(k) + "^ " + std::to_string(l));
  return b;
}

/// Identity, the 3n single-qubit Paulis and, at order 2, the 9 two-qubit
/// products on every pair of distinct qubits. Identity is always index 0.
inline ExpansionBasis qubit_basis(int n, int order) {
  if (n < 1 || n > kMaxDenseModes) throw std::invalid_argument("qubit_basis: qubit count out of range");
  if (order < 1 || order > 2) throw std::invalid_argument("qubit_basis: order must be 1 or 2");
  ExpansionBasis b;
  b.kind = BasisKind::qubit;
  b.order = order;
  b.includes_reference = true;
  std::set<PauliString> seen;
  auto push = [&](PauliString s) {
    if (!seen.insert(s).second) return;
    b.labels.push_back(s == PauliString(n, Pauli::I) ? "I" : to_string(s).substr(1, to_string(s).size() - 2));
    b.operators.emplace_back(std::move(s), 1.0);
  };
  push(PauliString(n, Pauli::I));
  const Pauli letters[] = {Pauli::X, Pauli::Y, Pauli::Z};
  for (int q = 0; q < n; ++q)
    for (Pauli a : letters) {
      PauliString s(n, Pauli::I);
      s[q] = a;
      push(s);
    }
  if (order == 2)
    for (int q = 0; q < n; ++q)
      for (int r = q + 1; r < n; ++r)
        for (Pauli a : letters)
          for (Pauli c : letters) {
            PauliString s(n, Pauli::I);
            s[q] = a;
            s[r] = c;
            push(s);
          }
  return b;
}

/// Subspace matrices. `coefficients` expresses the current subspace vectors
/// in terms of the original basis operators (identity until projected).
struct SubspaceProblem {
  ExpansionBasis basis;
  ComplexMatrix h_sub;
  ComplexMatrix s_sub;
  std::map<std::string, ComplexMatrix> symmetry_subs;
  ComplexMatrix coefficients;

  Eigen::Index dim() const { return h_sub.rows(); }
};

inline constexpr double kDefaultQseCutoff = 1e-8;

/// M_ab = Tr[E_a^H O E_b rho] for O = H and each symmetry operator, with
/// S_ab = Tr[E_a^H E_b rho]. Works for pure (rank-1) and mixed references.
inline SubspaceProblem build_subspace_direct(const ExpansionBasis& basis, const ComplexMatrix& h,
                                             const ComplexMatrix& rho,
                                             const std::map<std::string, ComplexMatrix>& symmetry_ops = {}) {
  require_square(h, "build_subspace_direct");
  require_square(rho, "build_subspace_direct");
  if (h.rows() != rho.rows()) throw std::invalid_argument("build_subspace_direct: H and rho dimensions differ");
  const Eigen::Index d = h.rows();
  for (const auto& [name, o] : symmetry_ops)
    if (o.rows() != d || o.cols() != d)
      throw std::invalid_argument("build_subspace_direct: symmetry operator '" + name + "' dimension mismatch");
  const auto n = static_cast<Eigen::Index>(basis.size());
  std::vector<ComplexMatrix> e;
  e.reserve(n);
  for (const auto& op : basis.operators) {
    if (Eigen::Index{1} << op.qubit_count() != d)
      throw std::invalid_argument("build_subspace_direct: basis operator dimension mismatch");
    e.push_back(pauli_to_dense(op));
  }
  std::vector<ComplexMatrix> e_rho(n);
  for (Eigen::Index b = 0; b < n; ++b) e_rho[b] = e[b] * rho;

  // Tr[E_a^H X] = sum conj(E_a) .* X
  auto assemble = [&](const ComplexMatrix* op) {
    ComplexMatrix m(n, n);
    for (Eigen::Index b = 0; b < n; ++b) {
      const ComplexMatrix x = op ? ComplexMatrix(*op * e_rho[b]) : e_rho[b];
      for (Eigen::Index a = 0; a < n; ++a) m(a, b) = e[a].conjugate().cwiseProduct(x).sum();
    }
    return hermitian_part(m);
  };
  SubspaceProblem p;
  p.basis = basis;
  p.h_sub = assemble(&h);
  p.s_sub = assemble(nullptr);
  for (const auto& [name, o] : symmetry_ops) p.symmetry_subs[name] = assemble(&o);
  p.coefficients = ComplexMatrix::Identity(n, n);
  return p;
}

namespace detail {

// Linear-response matrix of a one- plus two-body operator over the basis
// {|Psi>, a+_i a_j |Psi>} (index 0 is the reference, 1 + i*M + j the
// excitations), evaluated from the 1- to 4-RDMs with the closed formulas
// for S, F and V. The operator must be Hermitian.
inline ComplexMatrix lr_matrix(const BodyOperator& op, const RdmSet& rdms) {
  const int m = rdms.modes;
  if (op.modes != m) throw std::invalid_argument("build_lr_from_rdms: operator/RDM mode count mismatch");
  const RdmTensor& d1 = rdms[1];
  const RdmTensor& d2 = rdms[2];
  bool has_two = false;
  for (const auto& x : op.two)
    if (x != cplx{}) {
      has_two = true;
      break;
    }
  bool has_one = op.one.cwiseAbs().maxCoeff() != 0.0;
  const RdmTensor* d3 = (has_one || has_two) ? &rdms[3] : nullptr;
  const RdmTensor* d4 = has_two ? &rdms[4] : nullptr;

  const Eigen::Index n = 1 + static_cast<Eigen::Index>(m) * m;
  auto at = [](int i, int j, int mm) { return static_cast<Eigen::Index>(1 + i * mm + j); };

  // S^{ij}_g and S^{ij}_{kl}
  auto s_g = [&](int i, int j) { return d1.at({j, i}); };
  auto s_kl = [&](int i, int j, int k, int l) {
    return (i == k ? d1.at({j, l}) : cplx{}) - 2.0 * d2.at({j, k, l, i});
  };
  auto f_g = [&](int i, int j) {
    cplx acc{};
    for (int r = 0; r < m; ++r) acc += op.one(i, r) * d1.at({j, r});
    for (int p = 0; p < m; ++p)
      for (int r = 0; r < m; ++r)
        if (op.one(p, r) != cplx{}) acc -= 2.0 * op.one(p, r) * d2.at({j, p, r, i});
    return acc;
  };
  auto f_kl = [&](int i, int j, int k, int l) {
    cplx acc{};
    for (int p = 0; p < m; ++p)
      for (int r = 0; r < m; ++r) {
        const cplx f = op.one(p, r);
        if (f == cplx{}) continue;
        cplx t = -6.0 * d3->at({j, k, p, r, l, i});
        if (i == k) t -= 2.0 * d2.at({j, p, r, l});
        if (i == p && k == r) t += d1.at({j, l});
        if (i == p) t += 2.0 * d2.at({j, k, r, l});
        if (k == r) t -= 2.0 * d2.at({j, p, l, i});
        acc += f * t;
      }
    return acc;
  };
  auto v_g = [&](int i, int j) {
    cplx acc{};
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s) {
            const cplx v = op.v(p, q, r, s);
            if (v == cplx{}) continue;
            cplx t = 6.0 * d3->at({j, p, q, s, r, i});
            if (i == p) t += 2.0 * d2.at({j, q, s, r});
            if (i == q) t -= 2.0 * d2.at({j, p, s, r});
            acc += v * t;
          }
    return acc;
  };
  auto v_kl = [&](int i, int j, int k, int l) {
    cplx acc{};
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int r = 0; r < m; ++r)
          for (int s = 0; s < m; ++s) {
            const cplx v = op.v(p, q, r, s);
            if (v == cplx{}) continue;
            cplx t = -24.0 * d4->at({j, k, p, q, s, r, l, i});
            if (i == k) t += 6.0 * d3->at({j, p, q, s, r, l});
            if (i == p && k == r) t += 2.0 * d2.at({j, q, s, l});
            if (i == p && k == s) t -= 2.0 * d2.at({j, q, r, l});
            if (i == p) t -= 6.0 * d3->at({j, k, q, s, r, l});
            if (i == q && k == r) t -= 2.0 * d2.at({j, p, s, l});
            if (i == q && k == s) t += 2.0 * d2.at({j, p, r, l});
            if (i == q) t += 6.0 * d3->at({j, k, p, s, r, l});
            if (k == r) t += 6.0 * d3->at({j, p, q, s, l, i});
            if (k == s) t -= 6.0 * d3->at({j, p, q, r, l, i});
            acc += v * t;
          }
    return acc;
  };

  std::vector<cplx> col_g(n);
  col_g[0] = op.expectation(rdms);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      cplx x = op.constant * s_g(i, j);
      if (has_one) x += f_g(i, j);
      if (has_two) x += v_g(i, j);
      col_g[at(i, j, m)] = x;
    }
  ComplexMatrix out(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    out(a, 0) = col_g[a];
    out(0, a) = std::conj(col_g[a]);
  }
  out(0, 0) = col_g[0].real();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          cplx x = op.constant * s_kl(i, j, k, l);
          if (has_one) x += f_kl(i, j, k, l);
          if (has_two) x += v_kl(i, j, k, l);
          out(at(i, j, m), at(k, l, m)) = x;
        }
  return out;
}

}  // namespace detail

/// Overlap matrix of the linear-response basis from the 1- and 2-RDM.
inline ComplexMatrix lr_overlap(const RdmSet& rdms) {
  BodyOperator identity(rdms.modes);
  identity.constant = 1.0;
  return hermitian_part(detail::lr_matrix(identity, rdms));
}

/// Linear-response subspace problem evaluated purely from RDMs (through the
/// 4-RDM for two-body operators). The basis matches fermionic_basis(M, 1).
inline SubspaceProblem build_lr_from_rdms(const BodyOperator& h, const RdmSet& rdms,
                                          const std::map<std::string, BodyOperator>& symmetry_ops = {}) {
  SubspaceProblem p;
  p.basis = fermionic_basis(rdms.modes, 1);
  p.h_sub = hermitian_part(detail::lr_matrix(h, rdms));
  p.s_sub = lr_overlap(rdms);
  for (const auto& [name, o] : symmetry_ops) p.symmetry_subs[name] = hermitian_part(detail::lr_matrix(o, rdms));
  p.coefficients = ComplexMatrix::Identity(p.h_sub.rows(), p.h_sub.cols());
  return p;
}

inline Spectrum solve_subspace(const SubspaceProblem& prob, double metric_cutoff = kDefaultQseCutoff,
                               double negative_tol = 1e-8) {
  return generalized_eigensolve(prob.h_sub, prob.s_sub, metric_cutoff, negative_tol);
}

/// <O> for the subspace state with coefficient vector c.
inline double subspace_expectation(const SubspaceProblem& prob, const std::string& name, const ComplexVector& c) {
  auto it = prob.symmetry_subs.find(name);
  if (it == prob.symmetry_subs.end())
    throw std::invalid_argument("subspace problem has no symmetry operator '" + name + "'");
  return (c.dot(it->second * c) / c.dot(prob.s_sub * c)).real();
}

/// Restricts the problem to the span of generalized eigenvectors of
/// (O_sub, S_sub) whose eigenvalue lies within `window` of `target`.
inline SubspaceProblem project_symmetry(const SubspaceProblem& prob, const std::string& name, double target,
                                        double window, double metric_cutoff = kDefaultQseCutoff) {
  auto it = prob.symmetry_subs.find(name);
  if (it == prob.symmetry_subs.end())
    throw std::invalid_argument("project_symmetry: no symmetry operator '" + name + "' in problem");
  const Spectrum sym = generalized_eigensolve(it->second, prob.s_sub, metric_cutoff);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < sym.eigenvalues.size(); ++k)
    if (std::abs(sym.eigenvalues(k) - target) <= window) keep.push_back(k);
  if (keep.empty())
    throw NumericalError("project_symmetry: empty symmetry sector for " + name + " = " + std::to_string(target));
  ComplexMatrix x(prob.dim(), static_cast<Eigen::Index>(keep.size()));
  for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) = sym.eigenvectors.col(keep[c]);

  SubspaceProblem out;
  out.basis = prob.basis;
  out.h_sub = hermitian_part(x.adjoint() * prob.h_sub * x);
  out.s_sub = hermitian_part(x.adjoint() * prob.s_sub * x);
  for (const auto& [n, o] : prob.symmetry_subs) out.symmetry_subs[n] = hermitian_part(x.adjoint() * o * x);
  out.coefficients = prob.coefficients * x;
  return out;
}

enum class ApproxMethod { ZC, ZA };

inline std::string to_string(ApproxMethod m) { return m == ApproxMethod::ZC ? "ZC" : "ZA"; }

struct ApproxOptions {
  /// ZC: rebuild the 3-RDM with Delta_3 = 0 instead of using the supplied one.
  bool truncate = true;
  /// ZA: keep the supplied 3-RDM and only rebuild the 4-RDM (Delta_4 = 0).
  bool za_exact_d3 = false;
};

/// <X> for a normal-ordered operator from RDMs: a+_{p1}..a+_{pk} a_{sk}..a_{s1}
/// contributes k! kD^{p}_{s}.
inline cplx expectation_from_rdms(const FermionOperator& normal_ordered, const RdmSet& rdms, int max_rank) {
  cplx acc{};
  std::vector<int> up, lo;
  for (const auto& [term, c] : normal_ordered.terms()) {
    up.clear();
    lo.clear();
    for (const Ladder& l : term) (l.dagger ? up : lo).push_back(l.mode);
    if (up.size() != lo.size())
      throw std::logic_error("expectation_from_rdms: term " + to_string(term) + " does not conserve particle number");
    const int k = static_cast<int>(up.size());
    if (k > max_rank)
      throw std::logic_error("expectation_from_rdms: rank-" + std::to_string(k) + " term " + to_string(term) +
                             " exceeds the allowed rank " + std::to_string(max_rank));
    if (k == 0) {
      acc += c;
      continue;
    }
    std::reverse(lo.begin(), lo.end());
    acc += c * detail::factorial(k) * rdms[k](up, lo);
  }
  return acc;
}

/// Approximate linear-response problems that need only low-order RDMs.
/// ZC: H_ab = <E_a^H [H, E_b]> + e_g S_ab, contracted through the 3-RDM
///     (with Delta_3 = 0 when truncating).
/// ZA: the full LR formulas with the 3- and 4-RDM rebuilt from the 1- and
///     2-RDM under Delta_3 = Delta_4 = 0.
/// The overlap always comes from the supplied 1- and 2-RDM.
inline SubspaceProblem approximate_lr(ApproxMethod method, const BodyOperator& h, const RdmSet& rdms,
                                      double e_g = std::numeric_limits<double>::quiet_NaN(),
                                      ApproxOptions opt = {}) {
  const int m = rdms.modes;
  if (std::isnan(e_g)) e_g = h.expectation(rdms).real();
  SubspaceProblem p;
  p.basis = fermionic_basis(m, 1);
  p.s_sub = lr_overlap(rdms);

  if (method == ApproxMethod::ZA) {
    const CumulantSet cum = cumulants_from_rdms(rdms);
    RdmSet rebuilt = reconstruct_rdms(cum, opt.za_exact_d3 ? 3 : 2, 4);
    p.h_sub = hermitian_part(detail::lr_matrix(h, rebuilt));
  } else {
    RdmSet used;
    if (opt.truncate) {
      used = reconstruct_rdms(cumulants_from_rdms(rdms), 2, 3);
    } else {
      used = rdms;
      (void)used[3];
    }
    const FermionOperator hf = h.to_fermion();
    std::vector<FermionOperator> ops;
    ops.push_back(FermionOperator::identity(m));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) ops.push_back(FermionOperator::excitation(m, i, j));
    const auto n = static_cast<Eigen::Index>(ops.size());
    std::vector<FermionOperator> comm;
    comm.reserve(n);
    for (const auto& e : ops) comm.push_back(normal_order(commutator(hf, e)));
    ComplexMatrix hm(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const FermionOperator ea_dag = ops[a].adjoint();
      for (Eigen::Index b = 0; b < n; ++b)
        hm(a, b) = expectation_from_rdms(normal_order(ea_dag * comm[b]), used, 3) + e_g * p.s_sub(a, b);
    }
    p.h_sub = hermitian_part(hm);
  }
  p.coefficients = ComplexMatrix::Identity(p.h_sub.rows(), p.h_sub.cols());
  return p;
}

}  // namespace qsekit
