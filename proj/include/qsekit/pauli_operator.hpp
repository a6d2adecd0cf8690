#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fock.hpp"
#include "format.hpp"
#include "linalg.hpp"

namespace qsekit {

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

using PauliString = std::vector<Pauli>;

inline char pauli_letter(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

/// Single-qubit product a*b = phase * result.
inline std::pair<cplx, Pauli> multiply(Pauli a, Pauli b) {
  if (a == Pauli::I) return {1.0, b};
  if (b == Pauli::I) return {1.0, a};
  if (a == b) return {1.0, Pauli::I};
  const int ia = static_cast<int>(a), ib = static_cast<int>(b);
  const auto third = static_cast<Pauli>(6 - ia - ib);
  // XY = iZ, YZ = iX, ZX = iY; reversed order picks up -i.
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {cyclic ? cplx(0, 1) : cplx(0, -1), third};
}

inline std::string to_string(const PauliString& s) {
  std::string out = "[";
  bool first = true;
  for (std::size_t q = 0; q < s.size(); ++q) {
    if (s[q] == Pauli::I) continue;
    if (!first) out += ' ';
    first = false;
    out += pauli_letter(s[q]);
    out += std::to_string(q);
  }
  return out + "]";
}

/// Weighted sum of Pauli strings on `qubit_count` qubits.
class PauliOperator {
 public:
  using Terms = std::map<PauliString, cplx>;
  static constexpr double kPruneTolerance = 1e-14;

  explicit PauliOperator(int qubit_count) : qubits_(qubit_count) {
    if (qubit_count < 0) throw std::invalid_argument("PauliOperator: negative qubit count");
  }
  PauliOperator(PauliString s, cplx coeff) : PauliOperator(static_cast<int>(s.size())) {
    add_term(std::move(s), coeff);
  }

  static PauliOperator identity(int n, cplx coeff = 1.0) {
    return PauliOperator(PauliString(n, Pauli::I), coeff);
  }
  /// Single Pauli `p` on qubit `q`.
  static PauliOperator single(int n, int q, Pauli p, cplx coeff = 1.0) {
    PauliString s(n, Pauli::I);
    s.at(q) = p;
    return PauliOperator(std::move(s), coeff);
  }
  /// Parses "X0 Z2" style labels; empty label is the identity.
  static PauliOperator from_label(int n, const std::string& label, cplx coeff = 1.0) {
    PauliString s(n, Pauli::I);
    std::size_t i = 0;
    while (i < label.size()) {
      if (label[i] == ' ') {
        ++i;
        continue;
      }
      const std::string letters = "IXYZ";
      const auto pos = letters.find(label[i]);
      if (pos == std::string::npos) throw std::invalid_argument("bad Pauli label: " + label);
      std::size_t used = 0;
      const int q = std::stoi(label.substr(i + 1), &used);
      if (q < 0 || q >= n) throw std::out_of_range("Pauli label qubit out of range: " + label);
      s[q] = static_cast<Pauli>(pos);
      i += 1 + used;
    }
    return PauliOperator(std::move(s), coeff);
  }

  int qubit_count() const noexcept { return qubits_; }
  const Terms& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  void add_term(PauliString s, cplx coeff) {
    if (static_cast<int>(s.size()) != qubits_)
      throw std::invalid_argument("PauliOperator: string length does not match qubit count");
    auto [it, inserted] = terms_.try_emplace(std::move(s), coeff);
    if (!inserted) it->second += coeff;
    if (std::abs(it->second) < kPruneTolerance) terms_.erase(it);
  }

  cplx coefficient(const PauliString& s) const {
    auto it = terms_.find(s);
    return it == terms_.end() ? cplx{} : it->second;
  }

  /// Pauli strings are self-adjoint, so only coefficients conjugate.
  PauliOperator adjoint() const {
    PauliOperator out(qubits_);
    for (const auto& [s, c] : terms_) out.add_term(s, std::conj(c));
    return out;
  }

  bool is_hermitian(double tol = 1e-12) const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [&](const auto& t) { return std::abs(t.second.imag()) <= tol; });
  }

  PauliOperator& operator+=(const PauliOperator& o) {
    check_qubits(o);
    for (const auto& [s, c] : o.terms_) add_term(s, c);
    return *this;
  }
  PauliOperator& operator-=(const PauliOperator& o) {
    check_qubits(o);
    for (const auto& [s, c] : o.terms_) add_term(s, -c);
    return *this;
  }
  PauliOperator& operator*=(cplx f) {
    PauliOperator out(qubits_);
    for (const auto& [s, c] : terms_) out.add_term(s, c * f);
    return *this = std::move(out);
  }
  friend PauliOperator operator+(PauliOperator a, const PauliOperator& b) { return a += b; }
  friend PauliOperator operator-(PauliOperator a, const PauliOperator& b) { return a -= b; }
  friend PauliOperator operator*(PauliOperator a, cplx f) { return a *= f; }
  friend PauliOperator operator*(cplx f, PauliOperator a) { return a *= f; }

  friend PauliOperator operator*(const PauliOperator& a, const PauliOperator& b) {
    a.check_qubits(b);
    PauliOperator out(a.qubits_);
    for (const auto& [sa, ca] : a.terms_)
      for (const auto& [sb, cb] : b.terms_) {
        PauliString s(a.qubits_);
        cplx phase = ca * cb;
        for (int q = 0; q < a.qubits_; ++q) {
          auto [ph, p] = multiply(sa[q], sb[q]);
          phase *= ph;
          s[q] = p;
        }
        out.add_term(std::move(s), phase);
      }
    return out;
  }

  std::string str() const {
    std::vector<std::string> lines;
    for (const auto& [s, c] : terms_) lines.push_back(format_coefficient(c) + " " + qsekit::to_string(s));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  }

 private:
  void check_qubits(const PauliOperator& o) const {
    if (o.qubits_ != qubits_) throw std::invalid_argument("PauliOperator: qubit count mismatch");
  }

  int qubits_;
  Terms terms_;
};

/// Accumulates coeff * P into `out`, using that a Pauli string is a signed
/// permutation in the computational basis (qubit 0 = most significant bit).
inline void accumulate_pauli_string(ComplexMatrix& out, const PauliString& s, cplx coeff) {
  const int n = static_cast<int>(s.size());
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::uint64_t flip = 0;
  for (int q = 0; q < n; ++q)
    if (s[q] == Pauli::X || s[q] == Pauli::Y) flip |= mode_mask(n, q);
  for (std::uint64_t b = 0; b < dim; ++b) {
    cplx phase = coeff;
    for (int q = 0; q < n; ++q) {
      const bool bit = (b & mode_mask(n, q)) != 0;
      switch (s[q]) {
        case Pauli::Y: phase *= bit ? cplx(0, -1) : cplx(0, 1); break;
        case Pauli::Z: if (bit) phase = -phase; break;
        default: break;
      }
    }
    out(static_cast<Eigen::Index>(b ^ flip), static_cast<Eigen::Index>(b)) += phase;
  }
}

inline ComplexMatrix pauli_to_dense(const PauliOperator& op) {
  require_dense_modes(op.qubit_count(), "pauli_to_dense");
  const Eigen::Index dim = Eigen::Index{1} << op.qubit_count();
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (const auto& [s, c] : op.terms()) accumulate_pauli_string(out, s, c);
  return out;
}

}  // namespace qsekit
