#pragma once

// Spin-orbital convention used throughout: mode 2p is spatial orbital p with
// spin alpha, mode 2p+1 is spatial orbital p with spin beta.

#include <stdexcept>
#include <string>

#include "fermion_operator.hpp"

namespace qsekit {

enum class SymmetryKind { number, sz, s_squared };

inline std::string to_string(SymmetryKind k) {
  switch (k) {
    case SymmetryKind::number: return "number";
    case SymmetryKind::sz: return "sz";
    case SymmetryKind::s_squared: return "s_squared";
  }
  return "?";
}

inline SymmetryKind parse_symmetry_kind(const std::string& s) {
  if (s == "number" || s == "N") return SymmetryKind::number;
  if (s == "sz" || s == "Sz") return SymmetryKind::sz;
  if (s == "s_squared" || s == "S2" || s == "s2") return SymmetryKind::s_squared;
  throw std::invalid_argument("unknown symmetry operator '" + s + "'");
}

inline int alpha_mode(int orbital) { return 2 * orbital; }
inline int beta_mode(int orbital) { return 2 * orbital + 1; }

inline FermionOperator number_operator(int modes) {
  FermionOperator n(modes);
  for (int p = 0; p < modes; ++p) n += FermionOperator::excitation(modes, p, p);
  return n;
}

/// number: sum_p n_p; sz: (1/2) sum_p (n_pa - n_pb);
/// s_squared: S- S+ + Sz (Sz + 1), normal-ordered.
inline FermionOperator symmetry_operator(SymmetryKind kind, int modes) {
  if (kind == SymmetryKind::number) return number_operator(modes);
  if (modes % 2 != 0)
    throw std::invalid_argument("symmetry_operator: spin operators need an even mode count");
  const int norb = modes / 2;
  FermionOperator sz(modes);
  for (int p = 0; p < norb; ++p) {
    sz += FermionOperator::excitation(modes, alpha_mode(p), alpha_mode(p), 0.5);
    sz += FermionOperator::excitation(modes, beta_mode(p), beta_mode(p), -0.5);
  }
  if (kind == SymmetryKind::sz) return sz;

  FermionOperator s_plus(modes), s_minus(modes);
  for (int p = 0; p < norb; ++p) {
    s_plus += FermionOperator::excitation(modes, alpha_mode(p), beta_mode(p));
    s_minus += FermionOperator::excitation(modes, beta_mode(p), alpha_mode(p));
  }
  return normal_order(s_minus * s_plus + sz * sz + sz);
}

/// H + weight * (O - target)^2, normal-ordered.
inline FermionOperator add_penalty(const FermionOperator& h, const FermionOperator& o,
                                   double target, double weight) {
  if (weight < 0.0) throw std::invalid_argument("add_penalty: negative penalty weight");
  if (weight == 0.0) return h;
  const FermionOperator shifted = o - FermionOperator::identity(o.mode_count(), target);
  return normal_order(h + weight * (shifted * shifted));
}

}  // namespace qsekit
