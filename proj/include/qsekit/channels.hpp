#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fock.hpp"
#include "linalg.hpp"

namespace qsekit {

enum class ChannelKind { dephasing, amplitude_phase, depolarizing };

inline std::string to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::dephasing: return "dephasing";
    case ChannelKind::amplitude_phase: return "ap";
    case ChannelKind::depolarizing: return "depol";
  }
  return "?";
}

inline ChannelKind parse_channel_kind(const std::string& s) {
  if (s == "dephasing" || s == "ph") return ChannelKind::dephasing;
  if (s == "ap" || s == "amplitude_phase") return ChannelKind::amplitude_phase;
  if (s == "depol" || s == "depolarizing") return ChannelKind::depolarizing;
  throw std::invalid_argument("unknown channel '" + s + "' (expected dephasing|ap|depol)");
}

/// Noise strength as the ratios of preparation time to the qubit decay (T1)
/// and dephasing (T2) times. The depolarizing channel reads tp_over_t2.
struct ChannelSpec {
  ChannelKind kind = ChannelKind::dephasing;
  double tp_over_t1 = 0.0;
  double tp_over_t2 = 0.0;
};

/// Per-qubit Kraus set of a channel acting identically and independently on
/// every qubit of a register.
struct LocalNoise {
  std::vector<ComplexMatrix> kraus;
  int qubits = 0;
};

struct KrausChannel {
  std::vector<ComplexMatrix> kraus_ops;
  std::string label;
  std::optional<LocalNoise> local;

  Eigen::Index dim() const { return kraus_ops.front().rows(); }
};

inline constexpr double kCompletenessTolerance = 1e-12;

inline double completeness_error(const std::vector<ComplexMatrix>& ops) {
  const Eigen::Index d = ops.front().rows();
  ComplexMatrix acc = ComplexMatrix::Zero(d, d);
  for (const auto& k : ops) acc.noalias() += k.adjoint() * k;
  return max_abs(acc - ComplexMatrix::Identity(d, d));
}

/// Validating constructor: same-dimension square operators, sum K^H K = I.
inline KrausChannel make_channel(std::vector<ComplexMatrix> ops, std::string label,
                                 std::optional<LocalNoise> local = std::nullopt) {
  if (ops.empty()) throw std::invalid_argument("KrausChannel: at least one Kraus operator required");
  const Eigen::Index d = ops.front().rows();
  for (const auto& k : ops)
    if (k.rows() != d || k.cols() != d)
      throw std::invalid_argument("KrausChannel: Kraus operators must share one square dimension");
  const double err = completeness_error(ops);
  if (err > kCompletenessTolerance)
    throw std::invalid_argument("KrausChannel '" + label + "': completeness violated by " +
                                std::to_string(err));
  return {std::move(ops), std::move(label), std::move(local)};
}

inline KrausChannel identity_channel(Eigen::Index dim) {
  return make_channel({ComplexMatrix::Identity(dim, dim)}, "identity");
}

inline ComplexMatrix pauli_matrix(char which) {
  ComplexMatrix m(2, 2);
  switch (which) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli_matrix: expected I, X, Y or Z");
  }
  return m;
}

/// Phase damping F_P: {sqrt(1 - p/2) I, sqrt(p/2) Z}; coherences scale by 1 - p.
inline KrausChannel phase_damping(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("phase_damping: probability outside [0,1]");
  return make_channel({std::sqrt(1.0 - p / 2) * pauli_matrix('I'), std::sqrt(p / 2) * pauli_matrix('Z')},
                      "dephasing");
}

/// Amplitude damping F_A with decay probability p.
inline KrausChannel amplitude_damping(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("amplitude_damping: probability outside [0,1]");
  ComplexMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - p);
  k1 << 0, std::sqrt(p), 0, 0;
  return make_channel({k0, k1}, "amplitude_damping");
}

inline KrausChannel depolarizing(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("depolarizing: probability outside [0,1]");
  const double w = std::sqrt(p / 3);
  return make_channel({std::sqrt(1.0 - p) * pauli_matrix('I'), w * pauli_matrix('X'),
                       w * pauli_matrix('Y'), w * pauli_matrix('Z')},
                      "depolarizing");
}

/// Kraus set {B_j A_i}: `first` acts, then `second`.
inline KrausChannel compose(const KrausChannel& first, const KrausChannel& second) {
  if (first.dim() != second.dim()) throw std::invalid_argument("compose: channel dimension mismatch");
  std::vector<ComplexMatrix> ops;
  ops.reserve(first.kraus_ops.size() * second.kraus_ops.size());
  for (const auto& a : first.kraus_ops)
    for (const auto& b : second.kraus_ops) ops.push_back(b * a);
  std::optional<LocalNoise> local;
  if (first.local && second.local && first.local->qubits == second.local->qubits) {
    LocalNoise ln{{}, first.local->qubits};
    for (const auto& a : first.local->kraus)
      for (const auto& b : second.local->kraus) ln.kraus.push_back(b * a);
    local = std::move(ln);
  }
  return make_channel(std::move(ops), second.label + "*" + first.label, std::move(local));
}

/// Single-qubit channel for the given noise spec. The amplitude+phase channel
/// is F_P(p~) after F_A(p) with p = 1 - exp(-Tp/T1) and p~ fixed so that the
/// coherences decay exactly as exp(-Tp/T2); that requires T2 <= 2 T1.
inline KrausChannel single_qubit_channel(const ChannelSpec& spec) {
  if (!std::isfinite(spec.tp_over_t1) || !std::isfinite(spec.tp_over_t2) || spec.tp_over_t1 < 0.0 ||
      spec.tp_over_t2 < 0.0)
    throw std::invalid_argument("ChannelSpec: time ratios must be finite and non-negative");
  switch (spec.kind) {
    case ChannelKind::dephasing:
      return phase_damping(1.0 - std::exp(-spec.tp_over_t2));
    case ChannelKind::depolarizing: {
      auto ch = depolarizing(1.0 - std::exp(-spec.tp_over_t2));
      return ch;
    }
    case ChannelKind::amplitude_phase: {
      const double p = 1.0 - std::exp(-spec.tp_over_t1);
      const double excess = spec.tp_over_t2 - 0.5 * spec.tp_over_t1;
      if (excess < -1e-15)
        throw std::invalid_argument(
            "amplitude_phase: Tp/T2 < Tp/(2 T1) (T2 > 2 T1) admits no completely positive channel");
      const double p_tilde = 1.0 - std::exp(-std::max(excess, 0.0));
      auto ch = compose(amplitude_damping(p), phase_damping(p_tilde));
      ch.label = "ap";
      return ch;
    }
  }
  throw std::logic_error("single_qubit_channel: unhandled kind");
}

inline constexpr std::size_t kMaxLiftedKraus = 65536;

/// Independent copies of a single-qubit channel on each of n qubits. The full
/// product Kraus set is stored; the factors are kept for fast application.
inline KrausChannel lift_to_register(const KrausChannel& per_qubit, int n) {
  if (per_qubit.dim() != 2) throw std::invalid_argument("lift_to_register: expected a single-qubit channel");
  if (n < 1 || n > kMaxDenseModes) throw std::invalid_argument("lift_to_register: qubit count out of range");
  double count = std::pow(static_cast<double>(per_qubit.kraus_ops.size()), n);
  if (count > static_cast<double>(kMaxLiftedKraus))
    throw std::invalid_argument("lift_to_register: " + std::to_string(static_cast<long long>(count)) +
                                " Kraus operators exceed the limit of " + std::to_string(kMaxLiftedKraus));
  std::vector<ComplexMatrix> ops = per_qubit.kraus_ops;
  for (int q = 1; q < n; ++q) {
    std::vector<ComplexMatrix> next;
    next.reserve(ops.size() * per_qubit.kraus_ops.size());
    for (const auto& a : ops)
      for (const auto& k : per_qubit.kraus_ops) next.push_back(kron(a, k));
    ops = std::move(next);
  }
  return make_channel(std::move(ops), per_qubit.label + "^" + std::to_string(n),
                      LocalNoise{per_qubit.kraus_ops, n});
}

inline KrausChannel register_channel(const ChannelSpec& spec, int qubits) {
  return lift_to_register(single_qubit_channel(spec), qubits);
}

namespace detail {

// out = K_q * m, with K acting on qubit q of an n-qubit register.
inline ComplexMatrix left_local(const ComplexMatrix& k, int n, int q, const ComplexMatrix& m) {
  const std::uint64_t bit = mode_mask(n, q);
  ComplexMatrix out(m.rows(), m.cols());
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    if (static_cast<std::uint64_t>(b) & bit) continue;
    const Eigen::Index b1 = static_cast<Eigen::Index>(static_cast<std::uint64_t>(b) | bit);
    out.row(b) = k(0, 0) * m.row(b) + k(0, 1) * m.row(b1);
    out.row(b1) = k(1, 0) * m.row(b) + k(1, 1) * m.row(b1);
  }
  return out;
}

}  // namespace detail

/// rho -> sum_i K_i rho K_i^H. Register channels with local factors are applied
/// one qubit at a time.
inline ComplexMatrix apply_channel(const KrausChannel& ch, const ComplexMatrix& rho) {
  if (rho.rows() != ch.dim() || rho.cols() != ch.dim())
    throw std::invalid_argument("apply_channel: density matrix dimension does not match channel");
  if (ch.local) {
    ComplexMatrix cur = rho;
    const int n = ch.local->qubits;
    for (int q = 0; q < n; ++q) {
      ComplexMatrix acc = ComplexMatrix::Zero(cur.rows(), cur.cols());
      for (const auto& k : ch.local->kraus) {
        ComplexMatrix left = detail::left_local(k, n, q, cur);
        // (K left^H)^H = left K^H
        acc += detail::left_local(k, n, q, left.adjoint()).adjoint();
      }
      cur = std::move(acc);
    }
    return cur;
  }
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& k : ch.kraus_ops) out.noalias() += k * rho * k.adjoint();
  return out;
}

/// Apply through the explicit Kraus list even when local factors exist.
inline ComplexMatrix apply_channel_full(const KrausChannel& ch, const ComplexMatrix& rho) {
  KrausChannel plain{ch.kraus_ops, ch.label, std::nullopt};
  return apply_channel(plain, rho);
}

}  // namespace qsekit
