#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fermion_operator.hpp"
#include "fock.hpp"
#include "linalg.hpp"
#include "molecule.hpp"

namespace qsekit {

/// Dense rank-(k,k) tensor T^{i_1..i_k}_{j_1..j_k} over M modes, stored
/// row-major with the upper indices first.
class RdmTensor {
 public:
  RdmTensor() = default;
  RdmTensor(int order, int modes) : order_(order), modes_(modes) {
    if (order < 1 || order > 4) throw std::invalid_argument("RdmTensor: order must be 1..4");
    std::size_t n = 1;
    for (int a = 0; a < 2 * order; ++a) n *= static_cast<std::size_t>(modes);
    data_.assign(n, cplx{});
  }

  int order() const noexcept { return order_; }
  int modes() const noexcept { return modes_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::vector<cplx>& data() noexcept { return data_; }
  const std::vector<cplx>& data() const noexcept { return data_; }

  std::size_t offset(std::span<const int> upper, std::span<const int> lower) const {
    std::size_t off = 0;
    for (int i : upper) off = off * modes_ + static_cast<std::size_t>(i);
    for (int j : lower) off = off * modes_ + static_cast<std::size_t>(j);
    return off;
  }
  cplx& operator()(std::span<const int> upper, std::span<const int> lower) {
    return data_[offset(upper, lower)];
  }
  cplx operator()(std::span<const int> upper, std::span<const int> lower) const {
    return data_[offset(upper, lower)];
  }
  /// All 2k indices in one list: upper then lower.
  cplx at(std::initializer_list<int> idx) const {
    std::size_t off = 0;
    for (int i : idx) off = off * modes_ + static_cast<std::size_t>(i);
    return data_[off];
  }

  RdmTensor& operator+=(const RdmTensor& o) {
    check(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
  }
  RdmTensor& operator-=(const RdmTensor& o) {
    check(o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
  }
  RdmTensor& operator*=(cplx s) {
    for (auto& x : data_) x *= s;
    return *this;
  }
  friend RdmTensor operator+(RdmTensor a, const RdmTensor& b) { return a += b; }
  friend RdmTensor operator-(RdmTensor a, const RdmTensor& b) { return a -= b; }
  friend RdmTensor operator*(double s, RdmTensor a) { return a *= s; }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  void check(const RdmTensor& o) const {
    if (o.order_ != order_ || o.modes_ != modes_) throw std::invalid_argument("RdmTensor: shape mismatch");
  }

  int order_ = 0;
  int modes_ = 0;
  std::vector<cplx> data_;
};

inline double max_abs_diff(const RdmTensor& a, const RdmTensor& b) { return (a - b).max_abs(); }

/// k-RDMs with the 1/k! normalization,
///   kD^{i_1..i_k}_{j_1..j_k} = 1/k! Tr[a+_{i_1}..a+_{i_k} a_{j_k}..a_{j_1} rho].
struct RdmSet {
  int modes = 0;
  std::array<std::optional<RdmTensor>, 4> d;

  bool has(int k) const { return k >= 1 && k <= 4 && d[k - 1].has_value(); }
  int max_order() const {
    int k = 0;
    while (k < 4 && d[k]) ++k;
    return k;
  }
  const RdmTensor& operator[](int k) const {
    if (!has(k)) throw std::invalid_argument("RdmSet: " + std::to_string(k) + "-RDM not available");
    return *d[k - 1];
  }
  RdmTensor& operator[](int k) {
    if (!has(k)) throw std::invalid_argument("RdmSet: " + std::to_string(k) + "-RDM not available");
    return *d[k - 1];
  }
};

/// Cumulants Delta_1..Delta_4, same layout as RdmSet.
struct CumulantSet {
  int modes = 0;
  std::array<std::optional<RdmTensor>, 4> delta;

  bool has(int k) const { return k >= 1 && k <= 4 && delta[k - 1].has_value(); }
  const RdmTensor& operator[](int k) const {
    if (!has(k)) throw std::invalid_argument("CumulantSet: cumulant " + std::to_string(k) + " not available");
    return *delta[k - 1];
  }
};

namespace detail {

struct Permutation {
  std::vector<int> map;
  int sign;
};

inline const std::vector<Permutation>& permutations(int n) {
  static const auto table = [] {
    std::array<std::vector<Permutation>, 5> t;
    for (int k = 0; k <= 4; ++k) {
      std::vector<int> p(k);
      std::iota(p.begin(), p.end(), 0);
      do {
        int inv = 0;
        for (int a = 0; a < k; ++a)
          for (int b = a + 1; b < k; ++b)
            if (p[a] > p[b]) ++inv;
        t[k].push_back({p, inv % 2 ? -1 : 1});
      } while (std::next_permutation(p.begin(), p.end()));
    }
    return t;
  }();
  return table.at(n);
}

inline std::vector<std::vector<int>> combinations(int modes, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> c(k);
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == k) {
      out.push_back(c);
      return;
    }
    for (int v = start; v < modes; ++v) {
      c[pos] = v;
      rec(pos + 1, v + 1);
    }
  };
  rec(0, 0);
  return out;
}

inline double factorial(int k) {
  double f = 1.0;
  for (int a = 2; a <= k; ++a) f *= a;
  return f;
}

// Builds a tensor antisymmetric in its upper and in its lower indices from
// its values on strictly increasing index tuples.
template <class F>
RdmTensor antisymmetric_tensor(int order, int modes, F&& value) {
  RdmTensor t(order, modes);
  const auto combos = combinations(modes, order);
  const auto& perms = permutations(order);
  std::vector<int> up(order), lo(order);
  for (const auto& ci : combos)
    for (const auto& cj : combos) {
      const cplx v = value(ci, cj);
      if (v == cplx{}) continue;
      for (const auto& pi : perms) {
        for (int a = 0; a < order; ++a) up[a] = ci[pi.map[a]];
        for (const auto& pj : perms) {
          for (int a = 0; a < order; ++a) lo[a] = cj[pj.map[a]];
          t(up, lo) = double(pi.sign * pj.sign) * v;
        }
      }
    }
  return t;
}

// Image of every basis state under a_{c_k} ... a_{c_1} (a_{c_1} acting first).
struct AnnihilationMap {
  std::vector<std::int64_t> image;  // -1 when annihilated
  std::vector<int> sign;
  std::vector<std::int64_t> preimage;
  std::vector<int> preimage_sign;
};

inline AnnihilationMap annihilation_map(int modes, const std::vector<int>& combo) {
  const std::uint64_t dim = std::uint64_t{1} << modes;
  AnnihilationMap m{std::vector<std::int64_t>(dim, -1), std::vector<int>(dim, 0),
                    std::vector<std::int64_t>(dim, -1), std::vector<int>(dim, 0)};
  for (std::uint64_t b = 0; b < dim; ++b) {
    std::uint64_t idx = b;
    int sign = 1;
    bool alive = true;
    for (int p : combo) {
      auto step = apply_ladder(modes, p, false, idx);
      if (!step) {
        alive = false;
        break;
      }
      idx = step->index;
      sign *= step->sign;
    }
    if (!alive) continue;
    m.image[b] = static_cast<std::int64_t>(idx);
    m.sign[b] = sign;
    m.preimage[idx] = static_cast<std::int64_t>(b);
    m.preimage_sign[idx] = sign;
  }
  return m;
}

// Tr[X_I^H Y_J rho] for annihilation strings X_I, Y_J; rho(b, c) accessor.
template <class Rho>
cplx ladder_trace(const AnnihilationMap& x, const AnnihilationMap& y, Rho&& rho) {
  cplx acc{};
  const auto dim = static_cast<std::int64_t>(x.image.size());
  for (std::int64_t c = 0; c < dim; ++c) {
    const std::int64_t e = x.image[c];
    if (e < 0) continue;
    const std::int64_t b = y.preimage[e];
    if (b < 0) continue;
    acc += double(x.sign[c] * y.preimage_sign[e]) * rho(b, c);
  }
  return acc;
}

template <class Rho>
RdmSet rdms_impl(int modes, int max_k, Rho&& rho) {
  if (max_k < 1 || max_k > 4) throw std::invalid_argument("compute_rdms: max_k must be 1..4");
  if (max_k == 4 && modes > 8) throw std::invalid_argument("compute_rdms: 4-RDM limited to 8 modes");
  if (modes > kMaxDenseModes) throw std::invalid_argument("compute_rdms: too many modes");
  RdmSet out;
  out.modes = modes;
  for (int k = 1; k <= max_k; ++k) {
    if (k > modes) {
      out.d[k - 1] = RdmTensor(k, modes);
      continue;
    }
    const auto combos = combinations(modes, k);
    std::vector<AnnihilationMap> maps;
    maps.reserve(combos.size());
    for (const auto& c : combos) maps.push_back(annihilation_map(modes, c));
    std::map<std::vector<int>, std::size_t> slot;
    for (std::size_t n = 0; n < combos.size(); ++n) slot[combos[n]] = n;
    const double norm = 1.0 / factorial(k);
    out.d[k - 1] = antisymmetric_tensor(k, modes, [&](const std::vector<int>& ci, const std::vector<int>& cj) {
      return norm * ladder_trace(maps[slot[ci]], maps[slot[cj]], rho);
    });
  }
  return out;
}

}  // namespace detail

/// RDMs of a pure state |psi>.
inline RdmSet compute_rdms(const ComplexVector& psi, int max_k) {
  const int modes = modes_for_dim(psi.size());
  return detail::rdms_impl(modes, max_k,
                           [&](std::int64_t b, std::int64_t c) { return psi(b) * std::conj(psi(c)); });
}

/// RDMs of a density matrix.
inline RdmSet compute_rdms(const ComplexMatrix& rho, int max_k) {
  require_square(rho, "compute_rdms");
  const int modes = modes_for_dim(rho.rows());
  return detail::rdms_impl(modes, max_k, [&](std::int64_t b, std::int64_t c) { return rho(b, c); });
}

/// Grassmann wedge product: (1/N!)^2 sum over parity-signed permutations of
/// the upper and of the lower indices of a (x) b, with N = order(a)+order(b).
inline RdmTensor wedge(const RdmTensor& a, const RdmTensor& b) {
  if (a.modes() != b.modes()) throw std::invalid_argument("wedge: mode count mismatch");
  const int m = a.order(), n = b.order(), total = m + n;
  if (total > 4) throw std::invalid_argument("wedge: result order above 4");
  const auto& perms = detail::permutations(total);
  const double norm = 1.0 / (detail::factorial(total) * detail::factorial(total));
  std::vector<int> au(m), al(m), bu(n), bl(n);
  return detail::antisymmetric_tensor(total, a.modes(), [&](const std::vector<int>& ci, const std::vector<int>& cj) {
    cplx acc{};
    for (const auto& pi : perms) {
      for (int x = 0; x < m; ++x) au[x] = ci[pi.map[x]];
      for (int x = 0; x < n; ++x) bu[x] = ci[pi.map[m + x]];
      for (const auto& pj : perms) {
        for (int x = 0; x < m; ++x) al[x] = cj[pj.map[x]];
        for (int x = 0; x < n; ++x) bl[x] = cj[pj.map[m + x]];
        acc += double(pi.sign * pj.sign) * a(au, al) * b(bu, bl);
      }
    }
    return norm * acc;
  });
}

namespace detail {

// Disconnected (product) part of the k-th order expansion given cumulants
// Delta_1..Delta_{k-1}; missing cumulants count as zero.
inline RdmTensor disconnected_part(int k, int modes, const std::array<const RdmTensor*, 4>& c) {
  RdmTensor out(k, modes);
  auto add = [&](double coeff, const RdmTensor& t) {
    RdmTensor s = t;
    s *= coeff;
    out += s;
  };
  const RdmTensor* d1 = c[0];
  const RdmTensor* d2 = c[1];
  const RdmTensor* d3 = c[2];
  if (k == 2) {
    if (d1) add(1.0, wedge(*d1, *d1));
  } else if (k == 3) {
    if (d2 && d1) add(3.0, wedge(*d2, *d1));
    if (d1) add(1.0, wedge(wedge(*d1, *d1), *d1));
  } else if (k == 4) {
    if (d3 && d1) add(4.0, wedge(*d3, *d1));
    if (d2) add(3.0, wedge(*d2, *d2));
    if (d1) {
      const RdmTensor w11 = wedge(*d1, *d1);
      if (d2) add(6.0, wedge(*d2, w11));
      add(1.0, wedge(wedge(w11, *d1), *d1));
    }
  }
  return out;
}

}  // namespace detail

/// Inverts the cumulant expansion order by order up to the highest RDM present.
inline CumulantSet cumulants_from_rdms(const RdmSet& rdms) {
  const int top = rdms.max_order();
  if (top < 1) throw std::invalid_argument("cumulants_from_rdms: 1-RDM missing");
  for (int k = top + 1; k <= 4; ++k)
    if (rdms.has(k)) throw std::invalid_argument("cumulants_from_rdms: lower-order RDM missing");
  CumulantSet out;
  out.modes = rdms.modes;
  std::array<const RdmTensor*, 4> known{};
  for (int k = 1; k <= top; ++k) {
    RdmTensor delta = rdms[k];
    if (k > 1) delta -= detail::disconnected_part(k, rdms.modes, known);
    out.delta[k - 1] = std::move(delta);
    known[k - 1] = &*out.delta[k - 1];
  }
  return out;
}

/// Re-expands RDMs 1..max_order from cumulants, treating every Delta_k with
/// k > zero_above as zero.
inline RdmSet reconstruct_rdms(const CumulantSet& cumulants, int zero_above, int max_order = 4) {
  if (zero_above < 1) throw std::invalid_argument("reconstruct_rdms: zero_above must be >= 1");
  if (max_order < 1 || max_order > 4) throw std::invalid_argument("reconstruct_rdms: max_order must be 1..4");
  std::array<const RdmTensor*, 4> used{};
  for (int k = 1; k <= std::min(zero_above, 4); ++k) {
    if (k > max_order) break;
    if (!cumulants.has(k))
      throw std::invalid_argument("reconstruct_rdms: cumulant " + std::to_string(k) + " missing");
    used[k - 1] = &cumulants[k];
  }
  RdmSet out;
  out.modes = cumulants.modes;
  for (int k = 1; k <= max_order; ++k) {
    RdmTensor dk = detail::disconnected_part(k, cumulants.modes, used);
    if (used[k - 1]) dk += *used[k - 1];
    out.d[k - 1] = std::move(dk);
  }
  return out;
}

/// <H> = core + sum h_ik 1D^i_k + sum h_ijkl 2D^{ij}_{lk}.
inline double contract_energy(const SpinOrbitalIntegrals& ints, const RdmSet& rdms) {
  if (ints.modes != rdms.modes) throw std::invalid_argument("contract_energy: mode count mismatch");
  const int m = ints.modes;
  const RdmTensor& d1 = rdms[1];
  const RdmTensor& d2 = rdms[2];
  cplx e = ints.core_energy;
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) e += ints.h1(i, k) * d1.at({i, k});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const double h = ints.h2(i, j, k, l);
          if (h != 0.0) e += h * d2.at({i, j, l, k});
        }
  return e.real();
}

/// O = constant + sum_pr one(p,r) a+_p a_r + sum_pqrs two(p,q,r,s) a+_p a+_q a_r a_s.
struct BodyOperator {
  int modes = 0;
  cplx constant{};
  ComplexMatrix one;
  std::vector<cplx> two;

  explicit BodyOperator(int m = 0)
      : modes(m), one(ComplexMatrix::Zero(m, m)), two(static_cast<std::size_t>(m) * m * m * m) {}

  std::size_t index(int p, int q, int r, int s) const {
    return ((static_cast<std::size_t>(p) * modes + q) * modes + r) * modes + s;
  }
  cplx v(int p, int q, int r, int s) const { return two[index(p, q, r, s)]; }

  static BodyOperator from_integrals(const SpinOrbitalIntegrals& ints) {
    BodyOperator op(ints.modes);
    op.constant = ints.core_energy;
    op.one = ints.one_body.cast<cplx>();
    for (std::size_t n = 0; n < op.two.size(); ++n) op.two[n] = 0.5 * ints.two_body[n];
    return op;
  }

  /// Accepts number-conserving operators of rank <= 2.
  static BodyOperator from_fermion(const FermionOperator& f) {
    BodyOperator op(f.mode_count());
    const FermionOperator ordered = normal_order(f);
    for (const auto& [term, c] : ordered.terms()) {
      if (term.empty()) {
        op.constant += c;
      } else if (term.size() == 2 && term[0].dagger && !term[1].dagger) {
        op.one(term[0].mode, term[1].mode) += c;
      } else if (term.size() == 4 && term[0].dagger && term[1].dagger && !term[2].dagger && !term[3].dagger) {
        op.two[op.index(term[0].mode, term[1].mode, term[2].mode, term[3].mode)] += c;
      } else {
        throw std::invalid_argument("BodyOperator: term " + to_string(term) +
                                    " is not a number-conserving one- or two-body term");
      }
    }
    return op;
  }

  FermionOperator to_fermion() const {
    FermionOperator f = FermionOperator::identity(modes, constant);
    for (int p = 0; p < modes; ++p)
      for (int r = 0; r < modes; ++r)
        if (one(p, r) != cplx{}) f.add_term({cre(p), des(r)}, one(p, r));
    for (int p = 0; p < modes; ++p)
      for (int q = 0; q < modes; ++q)
        for (int r = 0; r < modes; ++r)
          for (int s = 0; s < modes; ++s)
            if (v(p, q, r, s) != cplx{}) f.add_term({cre(p), cre(q), des(r), des(s)}, v(p, q, r, s));
    return f;
  }

  cplx expectation(const RdmSet& rdms) const {
    const RdmTensor& d1 = rdms[1];
    cplx e = constant;
    for (int p = 0; p < modes; ++p)
      for (int r = 0; r < modes; ++r) e += one(p, r) * d1.at({p, r});
    if (rdms.has(2)) {
      const RdmTensor& d2 = rdms[2];
      for (int p = 0; p < modes; ++p)
        for (int q = 0; q < modes; ++q)
          for (int r = 0; r < modes; ++r)
            for (int s = 0; s < modes; ++s) e += 2.0 * v(p, q, r, s) * d2.at({p, q, s, r});
    }
    return e;
  }
};

}  // namespace qsekit
