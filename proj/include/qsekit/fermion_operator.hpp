#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fock.hpp"
#include "format.hpp"
#include "linalg.hpp"

namespace qsekit {

struct Ladder {
  int mode = 0;
  bool dagger = false;

  auto operator<=>(const Ladder&) const = default;
};

using LadderString = std::vector<Ladder>;

inline Ladder cre(int p) { return {p, true}; }
inline Ladder des(int p) { return {p, false}; }

inline std::string to_string(const LadderString& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(s[i].mode);
    if (s[i].dagger) out += '^';
  }
  return out + "]";
}

/// Weighted sum of products of fermionic ladder operators over `mode_count`
/// modes. Products are kept in the order written; call normal_order() to
/// reach the canonical form.
class FermionOperator {
 public:
  using Terms = std::map<LadderString, cplx>;
  static constexpr double kPruneTolerance = 1e-14;

  explicit FermionOperator(int mode_count) : modes_(mode_count) {
    if (mode_count < 0) throw std::invalid_argument("FermionOperator: negative mode count");
  }

  FermionOperator(int mode_count, LadderString term, cplx coeff = 1.0)
      : FermionOperator(mode_count) {
    add_term(std::move(term), coeff);
  }

  static FermionOperator identity(int mode_count, cplx coeff = 1.0) {
    return FermionOperator(mode_count, {}, coeff);
  }
  static FermionOperator creation(int mode_count, int p) {
    return FermionOperator(mode_count, {cre(p)});
  }
  static FermionOperator annihilation(int mode_count, int p) {
    return FermionOperator(mode_count, {des(p)});
  }
  /// c * a_p^dagger a_q
  static FermionOperator excitation(int mode_count, int p, int q, cplx coeff = 1.0) {
    return FermionOperator(mode_count, {cre(p), des(q)}, coeff);
  }

  int mode_count() const noexcept { return modes_; }
  const Terms& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  void add_term(LadderString term, cplx coeff) {
    for (const Ladder& l : term)
      if (l.mode < 0 || l.mode >= modes_)
        throw std::out_of_range("FermionOperator: mode " + std::to_string(l.mode) +
                                " outside [0, " + std::to_string(modes_) + ")");
    auto [it, inserted] = terms_.try_emplace(std::move(term), coeff);
    if (!inserted) it->second += coeff;
    if (std::abs(it->second) < kPruneTolerance) terms_.erase(it);
  }

  cplx coefficient(const LadderString& term) const {
    auto it = terms_.find(term);
    return it == terms_.end() ? cplx{} : it->second;
  }

  /// max(#creations, #annihilations) over all terms; 0 for the zero operator.
  int rank() const {
    int r = 0;
    for (const auto& [term, c] : terms_) {
      const auto n_cre = std::count_if(term.begin(), term.end(), [](Ladder l) { return l.dagger; });
      const auto n_des = static_cast<std::ptrdiff_t>(term.size()) - n_cre;
      r = std::max<int>(r, static_cast<int>(std::max(n_cre, n_des)));
    }
    return r;
  }

  FermionOperator adjoint() const {
    FermionOperator out(modes_);
    for (const auto& [term, c] : terms_) {
      LadderString rev(term.rbegin(), term.rend());
      for (Ladder& l : rev) l.dagger = !l.dagger;
      out.add_term(std::move(rev), std::conj(c));
    }
    return out;
  }

  FermionOperator& operator+=(const FermionOperator& o) {
    check_modes(o);
    for (const auto& [term, c] : o.terms_) add_term(term, c);
    return *this;
  }
  FermionOperator& operator-=(const FermionOperator& o) {
    check_modes(o);
    for (const auto& [term, c] : o.terms_) add_term(term, -c);
    return *this;
  }
  FermionOperator& operator*=(cplx s) {
    if (std::abs(s) == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto it = terms_.begin(); it != terms_.end();) {
      it->second *= s;
      it = std::abs(it->second) < kPruneTolerance ? terms_.erase(it) : std::next(it);
    }
    return *this;
  }

  friend FermionOperator operator+(FermionOperator a, const FermionOperator& b) { return a += b; }
  friend FermionOperator operator-(FermionOperator a, const FermionOperator& b) { return a -= b; }
  friend FermionOperator operator*(FermionOperator a, cplx s) { return a *= s; }
  friend FermionOperator operator*(cplx s, FermionOperator a) { return a *= s; }
  friend FermionOperator operator-(FermionOperator a) { return a *= -1.0; }

  /// Concatenated product; not normal-ordered.
  friend FermionOperator operator*(const FermionOperator& a, const FermionOperator& b) {
    a.check_modes(b);
    FermionOperator out(a.modes_);
    for (const auto& [ta, ca] : a.terms_)
      for (const auto& [tb, cb] : b.terms_) {
        LadderString t;
        t.reserve(ta.size() + tb.size());
        t.insert(t.end(), ta.begin(), ta.end());
        t.insert(t.end(), tb.begin(), tb.end());
        out.add_term(std::move(t), ca * cb);
      }
    return out;
  }

  /// Canonical text: one "coeff [term]" line per term, lines sorted.
  std::string str() const {
    std::vector<std::string> lines;
    lines.reserve(terms_.size());
    for (const auto& [term, c] : terms_)
      lines.push_back(format_coefficient(c) + " " + qsekit::to_string(term));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
  }

 private:
  void check_modes(const FermionOperator& o) const {
    if (o.modes_ != modes_)
      throw std::invalid_argument("FermionOperator: mode count mismatch (" +
                                  std::to_string(modes_) + " vs " + std::to_string(o.modes_) + ")");
  }

  int modes_;
  Terms terms_;
};

inline FermionOperator commutator(const FermionOperator& a, const FermionOperator& b) {
  return a * b - b * a;
}

namespace detail {

// True when `left` must stand to the right of `right` in canonical order:
// creations first (ascending modes), then annihilations (descending modes).
inline bool out_of_order(Ladder left, Ladder right) {
  if (left.dagger != right.dagger) return !left.dagger;
  return left.dagger ? left.mode > right.mode : left.mode < right.mode;
}

}  // namespace detail

/// Rewrites every term with the anticommutation relations so that creations
/// precede annihilations, creations ascend and annihilations descend in mode
/// index. Terms with a repeated ladder operator vanish.
inline FermionOperator normal_order(const FermionOperator& op) {
  FermionOperator out(op.mode_count());
  std::vector<std::pair<LadderString, cplx>> work(op.terms().begin(), op.terms().end());
  while (!work.empty()) {
    auto [term, coeff] = std::move(work.back());
    work.pop_back();
    bool vanished = false;
    // Insertion sort, spawning a contraction term at every a_p a_p^dagger swap.
    for (std::size_t i = 1; i < term.size() && !vanished; ++i) {
      for (std::size_t j = i; j > 0; --j) {
        const Ladder left = term[j - 1];
        const Ladder right = term[j];
        if (left.mode == right.mode && left.dagger == right.dagger) {
          vanished = true;
          break;
        }
        if (!detail::out_of_order(left, right)) break;
        if (!left.dagger && right.dagger && left.mode == right.mode) {
          LadderString contracted;
          contracted.reserve(term.size() - 2);
          contracted.insert(contracted.end(), term.begin(), term.begin() + (j - 1));
          contracted.insert(contracted.end(), term.begin() + (j + 1), term.end());
          work.emplace_back(std::move(contracted), coeff);
        }
        std::swap(term[j - 1], term[j]);
        coeff = -coeff;
      }
    }
    if (!vanished) out.add_term(std::move(term), coeff);
  }
  return out;
}

/// Dense matrix of `op` in the occupation basis, built by acting with each
/// ladder product on every basis state.
inline ComplexMatrix fermion_to_dense(const FermionOperator& op) {
  const int modes = op.mode_count();
  require_dense_modes(modes, "fermion_to_dense");
  const std::uint64_t dim = std::uint64_t{1} << modes;
  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim),
                                          static_cast<Eigen::Index>(dim));
  for (const auto& [term, c] : op.terms()) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      std::uint64_t idx = b;
      int sign = 1;
      bool alive = true;
      for (auto it = term.rbegin(); it != term.rend(); ++it) {
        auto step = apply_ladder(modes, it->mode, it->dagger, idx);
        if (!step) {
          alive = false;
          break;
        }
        idx = step->index;
        sign *= step->sign;
      }
      if (alive) out(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(b)) += double(sign) * c;
    }
  }
  return out;
}

}  // namespace qsekit
