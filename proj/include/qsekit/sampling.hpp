#pragma once

// Shot-noise simulation of Pauli-string measurements and the RDMs built
// from them. Everything is driven by explicit seeds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jordan_wigner.hpp"
#include "rdm.hpp"

namespace qsekit {

struct PauliEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace detail {

inline const PauliString& single_string(const PauliOperator& p) {
  if (p.terms().size() != 1) throw std::invalid_argument("estimate_pauli: expected a single Pauli string");
  const auto& [s, c] = *p.terms().begin();
  if (std::abs(c - cplx(1.0)) > 1e-14)
    throw std::invalid_argument("estimate_pauli: string coefficient must be 1");
  return s;
}

inline double exact_string_value(const ComplexMatrix& rho, const PauliString& s) {
  return trace_product(pauli_to_dense(PauliOperator(s, 1.0)), rho).real();
}

inline PauliEstimate sample_string(double mean, long long shots, std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("estimate_pauli: shots must be >= 1");
  const double p_plus = std::clamp((1.0 + mean) / 2.0, 0.0, 1.0);
  std::mt19937_64 rng(seed);
  long long plus = 0;
  for (long long n = 0; n < shots; ++n) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < p_plus) ++plus;
  }
  const double nd = static_cast<double>(shots);
  const double est = (2.0 * plus - nd) / nd;
  double se = 0.0;
  if (shots > 1) {
    // outcomes are +-1: sample variance = n/(n-1) * (1 - est^2)
    const double var = std::max(0.0, nd / (nd - 1.0) * (1.0 - est * est));
    se = std::sqrt(var / nd);
  }
  return {est, se};
}

}  // namespace detail

/// Estimates <P> for a single Pauli string from `shots` simulated +-1
/// measurements with success probability (1 + <P>)/2.
inline PauliEstimate estimate_pauli(const ComplexMatrix& rho, const PauliOperator& pauli, long long shots,
                                    std::uint64_t seed) {
  const PauliString& s = detail::single_string(pauli);
  return detail::sample_string(detail::exact_string_value(rho, s), shots, seed);
}

inline PauliEstimate estimate_pauli(const ComplexVector& psi, const PauliOperator& pauli, long long shots,
                                    std::uint64_t seed) {
  const PauliString& s = detail::single_string(pauli);
  const ComplexMatrix p = pauli_to_dense(PauliOperator(s, 1.0));
  return detail::sample_string(psi.dot(p * psi).real(), shots, seed);
}

/// RDMs through order max_k assembled from shot estimates of every Pauli
/// string in the Jordan-Wigner images of the ladder products. Each unique
/// string gets its own stream seeded by splitmix64(seed + string index).
inline RdmSet estimate_rdms(const ComplexMatrix& rho, int max_k, long long shots, std::uint64_t seed) {
  require_square(rho, "estimate_rdms");
  const int modes = modes_for_dim(rho.rows());
  if (max_k < 1 || max_k > 4) throw std::invalid_argument("estimate_rdms: max_k must be 1..4");

  // Operators per (order, upper combo, lower combo), then strings.
  struct Entry {
    int k;
    std::vector<int> up, lo;
    PauliOperator op;
  };
  std::vector<Entry> entries;
  std::map<PauliString, double> values;
  for (int k = 1; k <= std::min(max_k, modes); ++k) {
    const auto combos = detail::combinations(modes, k);
    for (const auto& ci : combos)
      for (const auto& cj : combos) {
        LadderString t;
        for (int p : ci) t.push_back(cre(p));
        for (auto it = cj.rbegin(); it != cj.rend(); ++it) t.push_back(des(*it));
        PauliOperator op = jordan_wigner(FermionOperator(modes, t));
        for (const auto& [s, c] : op.terms()) values.emplace(s, 0.0);
        entries.push_back({k, ci, cj, std::move(op)});
      }
  }
  std::uint64_t index = 0;
  for (auto& [s, v] : values) {
    const bool trivial = std::all_of(s.begin(), s.end(), [](Pauli p) { return p == Pauli::I; });
    v = trivial ? 1.0 : detail::sample_string(detail::exact_string_value(rho, s), shots, splitmix64(seed + index)).estimate;
    ++index;
  }

  RdmSet out;
  out.modes = modes;
  for (int k = 1; k <= max_k; ++k) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, cplx> vals;
    const double norm = 1.0 / detail::factorial(k);
    for (const auto& e : entries) {
      if (e.k != k) continue;
      cplx acc{};
      for (const auto& [s, c] : e.op.terms()) acc += c * values.at(s);
      vals[{e.up, e.lo}] = norm * acc;
    }
    out.d[k - 1] = k > modes ? RdmTensor(k, modes)
                             : detail::antisymmetric_tensor(k, modes, [&](const std::vector<int>& ci,
                                                                          const std::vector<int>& cj) {
                                 return vals.at({ci, cj});
                               });
  }
  return out;
}

}  // namespace qsekit
