#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "fermion_operator.hpp"
#include "symmetry.hpp"

namespace qsekit {

/// Restricted molecular integrals in Hartree. `two_body` is stored in
/// chemist notation (pq|rs), flattened row-major over four spatial indices.
struct MolecularIntegrals {
  int norb = 0;
  int nelec = 0;
  int ms2 = 0;
  double core_energy = 0.0;
  Eigen::MatrixXd one_body;
  std::vector<double> two_body;

  MolecularIntegrals() = default;
  MolecularIntegrals(int n_orb, int n_elec, int two_sz)
      : norb(n_orb),
        nelec(n_elec),
        ms2(two_sz),
        one_body(Eigen::MatrixXd::Zero(n_orb, n_orb)),
        two_body(static_cast<std::size_t>(n_orb) * n_orb * n_orb * n_orb, 0.0) {}

  std::size_t index(int p, int q, int r, int s) const {
    return ((static_cast<std::size_t>(p) * norb + q) * norb + r) * norb + s;
  }
  double eri(int p, int q, int r, int s) const { return two_body[index(p, q, r, s)]; }

  /// Writes (pq|rs) together with its seven symmetry images.
  void set_eri(int p, int q, int r, int s, double v) {
    for (auto [a, b] : {std::pair{p, q}, std::pair{q, p}})
      for (auto [c, d] : {std::pair{r, s}, std::pair{s, r}}) {
        two_body[index(a, b, c, d)] = v;
        two_body[index(c, d, a, b)] = v;
      }
  }

  int modes() const { return 2 * norb; }
};

namespace detail {

inline double parse_fortran_double(std::string token, const std::string& source, int line) {
  std::replace(token.begin(), token.end(), 'D', 'E');
  std::replace(token.begin(), token.end(), 'd', 'e');
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ParseError(source, line, "malformed numeric field '" + token + "'");
  }
  if (used != token.size()) throw ParseError(source, line, "malformed numeric field '" + token + "'");
  return v;
}

inline int parse_index(const std::string& token, const std::string& source, int line) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(token, &used);
  } catch (const std::exception&) {
    throw ParseError(source, line, "malformed index '" + token + "'");
  }
  if (used != token.size()) throw ParseError(source, line, "malformed index '" + token + "'");
  return v;
}

}  // namespace detail

/// Parses FCIDUMP text: an `&FCI ... &END` (or `/`) namelist with NORB,
/// NELEC and MS2, followed by `value i j k l` records with 1-based indices.
inline MolecularIntegrals parse_fcidump(const std::string& text,
                                        const std::string& source = "<fcidump>") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string header;
  bool started = false, ended = false;
  int header_line = 0;
  while (!ended && std::getline(in, line)) {
    ++lineno;
    std::string chunk = line;
    if (!started) {
      const auto pos = chunk.find("&FCI");
      if (pos == std::string::npos) {
        if (chunk.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw ParseError(source, lineno, "expected '&FCI' namelist header");
      }
      started = true;
      header_line = lineno;
      chunk = chunk.substr(pos + 4);
    }
    auto end_pos = chunk.find("&END");
    if (end_pos == std::string::npos) end_pos = chunk.find('/');
    if (end_pos != std::string::npos) {
      chunk = chunk.substr(0, end_pos);
      ended = true;
    }
    header += chunk + " ";
  }
  if (!started) throw ParseError(source, lineno, "missing '&FCI' namelist header");
  if (!ended) throw ParseError(source, lineno, "unterminated '&FCI' namelist");

  std::map<std::string, std::string> keys;
  const std::regex key_re(R"(([A-Za-z_][A-Za-z0-9_]*)\s*=)");
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> found;
  for (auto it = std::sregex_iterator(header.begin(), header.end(), key_re); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    found.push_back({m[1].str(), {static_cast<std::size_t>(m.position(0)),
                                  static_cast<std::size_t>(m.position(0) + m.length(0))}});
  }
  for (std::size_t k = 0; k < found.size(); ++k) {
    const std::size_t from = found[k].second.second;
    const std::size_t to = k + 1 < found.size() ? found[k + 1].second.first : header.size();
    std::string value = header.substr(from, to - from);
    std::replace(value.begin(), value.end(), ',', ' ');
    std::string key = found[k].first;
    std::transform(key.begin(), key.end(), key.begin(), ::toupper);
    keys[key] = value;
  }
  auto scalar = [&](const char* name) {
    auto it = keys.find(name);
    if (it == keys.end()) throw ParseError(source, header_line, std::string("missing header key ") + name);
    std::istringstream vs(it->second);
    std::string tok;
    if (!(vs >> tok)) throw ParseError(source, header_line, std::string("empty value for ") + name);
    return detail::parse_index(tok, source, header_line);
  };
  const int norb = scalar("NORB");
  const int nelec = scalar("NELEC");
  const int ms2 = scalar("MS2");
  if (norb <= 0) throw ParseError(source, header_line, "NORB must be positive");
  if (nelec < 0 || nelec > 2 * norb) throw ParseError(source, header_line, "NELEC out of range");
  if (auto it = keys.find("UHF"); it != keys.end()) {
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), ::toupper);
    if (v.find('T') != std::string::npos)
      throw ParseError(source, header_line, "unrestricted integrals are not supported");
  }

  MolecularIntegrals ints(norb, nelec, ms2);
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 5)
      throw ParseError(source, lineno, "expected 'value i j k l', got " + std::to_string(tok.size()) + " fields");
    const double v = detail::parse_fortran_double(tok[0], source, lineno);
    int idx[4];
    for (int a = 0; a < 4; ++a) {
      idx[a] = detail::parse_index(tok[a + 1], source, lineno);
      if (idx[a] < 0 || idx[a] > norb)
        throw ParseError(source, lineno, "index " + std::to_string(idx[a]) + " outside [0, " +
                                             std::to_string(norb) + "]");
    }
    const auto [i, j, k, l] = idx;
    if (i == 0 && j == 0 && k == 0 && l == 0) {
      ints.core_energy = v;
    } else if (k == 0 && l == 0) {
      if (j == 0) continue;  // orbital energy record
      if (i == 0) throw ParseError(source, lineno, "invalid one-body index pattern");
      ints.one_body(i - 1, j - 1) = v;
      ints.one_body(j - 1, i - 1) = v;
    } else {
      if (i == 0 || j == 0 || k == 0 || l == 0)
        throw ParseError(source, lineno, "invalid two-body index pattern");
      ints.set_eri(i - 1, j - 1, k - 1, l - 1, v);
    }
  }
  return ints;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline MolecularIntegrals load_fcidump(const std::filesystem::path& path) {
  return parse_fcidump(read_text_file(path), path.string());
}

/// Inverse of parse_fcidump; values carry 17 significant digits.
inline std::string write_fcidump(const MolecularIntegrals& ints) {
  std::ostringstream out;
  out << " &FCI NORB=" << ints.norb << ",NELEC=" << ints.nelec << ",MS2=" << ints.ms2 << ",\n  ORBSYM=";
  for (int p = 0; p < ints.norb; ++p) out << "1,";
  out << "\n  ISYM=1,\n &END\n";
  char buf[96];
  const int n = ints.norb;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s) {
          if (p * (p + 1) / 2 + q < r * (r + 1) / 2 + s) continue;
          const double v = ints.eri(p, q, r, s);
          if (v == 0.0) continue;
          std::snprintf(buf, sizeof buf, "%.17g %d %d %d %d\n", v, p + 1, q + 1, r + 1, s + 1);
          out << buf;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q) {
      if (ints.one_body(p, q) == 0.0) continue;
      std::snprintf(buf, sizeof buf, "%.17g %d %d 0 0\n", ints.one_body(p, q), p + 1, q + 1);
      out << buf;
    }
  std::snprintf(buf, sizeof buf, "%.17g 0 0 0 0\n", ints.core_energy);
  out << buf;
  return out.str();
}

/// Spin-orbital integrals in the convention of
///   H = core + sum h_pq a+_p a_q + 1/2 sum h_pqrs a+_p a+_q a_r a_s,
/// where h_pqrs = <pq|sr> couples phi_p*(1) phi_q*(2) phi_s(1) phi_r(2).
struct SpinOrbitalIntegrals {
  int modes = 0;
  double core_energy = 0.0;
  Eigen::MatrixXd one_body;
  std::vector<double> two_body;

  std::size_t index(int p, int q, int r, int s) const {
    return ((static_cast<std::size_t>(p) * modes + q) * modes + r) * modes + s;
  }
  double h1(int p, int q) const { return one_body(p, q); }
  double h2(int p, int q, int r, int s) const { return two_body[index(p, q, r, s)]; }
};

inline int spin_of(int mode) { return mode & 1; }
inline int orbital_of(int mode) { return mode >> 1; }

inline SpinOrbitalIntegrals to_spin_orbital(const MolecularIntegrals& ints) {
  SpinOrbitalIntegrals so;
  so.modes = ints.modes();
  so.core_energy = ints.core_energy;
  const int m = so.modes;
  so.one_body = Eigen::MatrixXd::Zero(m, m);
  so.two_body.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      if (spin_of(p) == spin_of(q)) so.one_body(p, q) = ints.one_body(orbital_of(p), orbital_of(q));
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) {
          if (spin_of(p) != spin_of(s) || spin_of(q) != spin_of(r)) continue;
          // chemist (ps|qr)
          so.two_body[so.index(p, q, r, s)] =
              ints.eri(orbital_of(p), orbital_of(s), orbital_of(q), orbital_of(r));
        }
  return so;
}

inline FermionOperator assemble_hamiltonian(const SpinOrbitalIntegrals& so) {
  const int m = so.modes;
  FermionOperator h = FermionOperator::identity(m, so.core_energy);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      if (so.h1(p, q) != 0.0) h.add_term({cre(p), des(q)}, so.h1(p, q));
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      if (p == q) continue;
      for (int r = 0; r < m; ++r)
        for (int s = 0; s < m; ++s) {
          if (r == s) continue;
          const double v = so.h2(p, q, r, s);
          if (v != 0.0) h.add_term({cre(p), cre(q), des(r), des(s)}, 0.5 * v);
        }
    }
  return normal_order(h);
}

inline FermionOperator assemble_hamiltonian(const MolecularIntegrals& ints) {
  return assemble_hamiltonian(to_spin_orbital(ints));
}

/// Aufbau occupation string ("1100" style) of the closed/open-shell reference
/// determinant in the spin-orbital convention.
inline std::string reference_occupation(const MolecularIntegrals& ints) {
  const int n_alpha = (ints.nelec + ints.ms2) / 2;
  const int n_beta = (ints.nelec - ints.ms2) / 2;
  std::string occ(ints.modes(), '0');
  for (int p = 0; p < n_alpha; ++p) occ[alpha_mode(p)] = '1';
  for (int p = 0; p < n_beta; ++p) occ[beta_mode(p)] = '1';
  return occ;
}

struct SweepPoint {
  double bond_length = 0.0;  // Angstrom
  MolecularIntegrals integrals;
  std::string label;
};

/// Reads a two-column manifest `bond_length path` (paths relative to the
/// manifest directory, `#` comments) and returns points sorted by bond length.
inline std::vector<SweepPoint> load_sweep(const std::filesystem::path& manifest) {
  const std::string text = read_text_file(manifest);
  const auto base = manifest.parent_path();
  std::istringstream in(text);
  std::vector<SweepPoint> points;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string r_tok, path_tok, extra;
    if (!(ls >> r_tok)) continue;
    if (!(ls >> path_tok) || (ls >> extra))
      throw ParseError(manifest.string(), lineno, "expected 'bond_length path'");
    const double r = detail::parse_fortran_double(r_tok, manifest.string(), lineno);
    if (!(r > 0.0)) throw ParseError(manifest.string(), lineno, "bond length must be positive");
    for (const auto& p : points)
      if (p.bond_length == r)
        throw ParseError(manifest.string(), lineno, "duplicate bond length " + r_tok);
    std::filesystem::path file = path_tok;
    if (file.is_relative()) file = base / file;
    if (!std::filesystem::exists(file))
      throw std::runtime_error(manifest.string() + ":" + std::to_string(lineno) + ": missing file '" +
                               file.string() + "'");
    points.push_back({r, load_fcidump(file), file.stem().string()});
  }
  std::sort(points.begin(), points.end(),
            [](const SweepPoint& a, const SweepPoint& b) { return a.bond_length < b.bond_length; });
  return points;
}

}  // namespace qsekit
