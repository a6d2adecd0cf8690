#pragma once

#include "fermion_operator.hpp"
#include "pauli_operator.hpp"

namespace qsekit {

/// a_p^dagger -> Z_0 ... Z_{p-1} (X_p - i Y_p)/2 and
/// a_p        -> Z_0 ... Z_{p-1} (X_p + i Y_p)/2,
/// so that a qubit in |1> is an occupied mode.
inline PauliOperator jordan_wigner_ladder(int modes, Ladder l) {
  PauliString s(modes, Pauli::I);
  for (int m = 0; m < l.mode; ++m) s[m] = Pauli::Z;
  PauliOperator out(modes);
  s[l.mode] = Pauli::X;
  out.add_term(s, 0.5);
  s[l.mode] = Pauli::Y;
  out.add_term(s, l.dagger ? cplx(0, -0.5) : cplx(0, 0.5));
  return out;
}

inline PauliOperator jordan_wigner(const FermionOperator& op) {
  const int n = op.mode_count();
  PauliOperator out(n);
  for (const auto& [term, c] : op.terms()) {
    PauliOperator product = PauliOperator::identity(n, c);
    for (const Ladder& l : term) product = product * jordan_wigner_ladder(n, l);
    out += product;
  }
  return out;
}

}  // namespace qsekit
