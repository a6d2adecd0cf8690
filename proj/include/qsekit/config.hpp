#pragma once

// Experiment configuration: a flat `key = value` file with `[section]`
// headers and `#`/`;` comments. Every key is known; unknown ones are errors.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "channels.hpp"
#include "error.hpp"
#include "molecule.hpp"
#include "qse.hpp"
#include "symmetry.hpp"

namespace qsekit {

enum class ExperimentKind { fidelity_sweep, spectrum, qse_repair, ground_channels, approx_spectrum, single_point };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::fidelity_sweep: return "fidelity-sweep";
    case ExperimentKind::spectrum: return "spectrum";
    case ExperimentKind::qse_repair: return "qse-repair";
    case ExperimentKind::ground_channels: return "ground-channels";
    case ExperimentKind::approx_spectrum: return "approx-spectrum";
    case ExperimentKind::single_point: return "single-point";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::fidelity_sweep, ExperimentKind::spectrum, ExperimentKind::qse_repair,
                 ExperimentKind::ground_channels, ExperimentKind::approx_spectrum, ExperimentKind::single_point})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment '" + s + "'");
}

struct PenaltySpec {
  SymmetryKind kind = SymmetryKind::number;
  double target = 0.0;
  double weight = 0.0;
  bool operator==(const PenaltySpec&) const = default;
};

struct ProjectionSpec {
  SymmetryKind kind = SymmetryKind::number;
  double target = 0.0;
  double window = 0.5;
  bool operator==(const ProjectionSpec&) const = default;
};

struct ShotSpec {
  long long count = 0;
  std::uint64_t seed = 0;
  bool operator==(const ShotSpec&) const = default;
};

/// Which state the subspace is expanded around.
enum class ReferenceKind { exact, vcs, novar, both };

inline std::string to_string(ReferenceKind r) {
  switch (r) {
    case ReferenceKind::exact: return "exact";
    case ReferenceKind::vcs: return "vcs";
    case ReferenceKind::novar: return "novar";
    case ReferenceKind::both: return "both";
  }
  return "?";
}

inline ReferenceKind parse_reference_kind(const std::string& s) {
  for (auto r : {ReferenceKind::exact, ReferenceKind::vcs, ReferenceKind::novar, ReferenceKind::both})
    if (to_string(r) == s) return r;
  throw ConfigError("unknown reference '" + s + "' (expected exact|vcs|novar|both)");
}

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::single_point;
  std::string sweep;    // manifest path as written
  std::string fcidump;  // single-point input
  std::string output;
  int threads = 1;

  std::vector<ChannelKind> channels;
  double tp_over_t1 = 0.0;
  double tp_over_t2 = 0.0;
  std::vector<PenaltySpec> penalties;
  std::vector<ChannelKind> constrained_channels;  // ground-channels: extra penalized curves
  std::vector<PenaltySpec> constraints;

  BasisKind subspace = BasisKind::fermionic;
  int order = 1;
  double metric_cutoff = kDefaultQseCutoff;
  ReferenceKind reference = ReferenceKind::exact;
  std::optional<ProjectionSpec> projection;

  bool zc_truncate = true;
  bool za_exact_d3 = false;
  std::optional<ShotSpec> shots;

  // Directory relative paths are resolved against (not serialized).
  std::filesystem::path base_dir;

  bool operator==(const ExperimentConfig& o) const {
    return experiment == o.experiment && sweep == o.sweep && fcidump == o.fcidump && output == o.output &&
           threads == o.threads && channels == o.channels && tp_over_t1 == o.tp_over_t1 &&
           tp_over_t2 == o.tp_over_t2 && penalties == o.penalties &&
           constrained_channels == o.constrained_channels && constraints == o.constraints &&
           subspace == o.subspace && order == o.order && metric_cutoff == o.metric_cutoff &&
           reference == o.reference && projection == o.projection && zc_truncate == o.zc_truncate &&
           za_exact_d3 == o.za_exact_d3 && shots == o.shots;
  }

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path = p;
    return path.is_relative() ? base_dir / path : path;
  }

  ChannelSpec channel_spec(ChannelKind k) const { return {k, tp_over_t1, tp_over_t2}; }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double config_real(const std::string& v, const std::string& where) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) throw ConfigError(where + ": expected a real, got '" + v + "'");
  return x;
}

template <class Int>
Int config_int(const std::string& v, const std::string& where) {
  Int x{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) throw ConfigError(where + ": expected an integer, got '" + v + "'");
  return x;
}

inline bool config_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(where + ": expected true/false, got '" + v + "'");
}

inline PenaltySpec config_penalty(const std::string& key, const std::string& v, const std::string& where) {
  const auto parts = split_list(v);
  if (parts.size() != 2) throw ConfigError(where + ": expected 'target, weight'");
  PenaltySpec p;
  try {
    p.kind = parse_symmetry_kind(key);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  p.target = config_real(parts[0], where);
  p.weight = config_real(parts[1], where);
  if (p.weight < 0.0) throw ConfigError(where + ": penalty weight must be non-negative");
  return p;
}

inline std::vector<ChannelKind> config_channels(const std::string& v, const std::string& where) {
  std::vector<ChannelKind> out;
  for (const auto& s : split_list(v)) {
    try {
      out.push_back(parse_channel_kind(s));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (out.empty()) throw ConfigError(where + ": empty channel list");
  return out;
}

// Shortest text that parses back to the same double.
inline std::string exact_real(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string join_channels(const std::vector<ChannelKind>& ks) {
  std::string out;
  for (std::size_t i = 0; i < ks.size(); ++i) out += (i ? ", " : "") + to_string(ks[i]);
  return out;
}

}  // namespace detail

/// Parses configuration text. `source` names the text in error messages.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  using namespace detail;
  ExperimentConfig c;
  bool have_experiment = false;
  std::optional<ProjectionSpec> proj;
  bool proj_seen = false;
  ShotSpec shots;
  bool shots_count = false, shots_seed = false;

  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen_keys;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    if (auto h = line.find_first_of("#;"); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::vector<std::string> known = {"experiment", "channel",    "penalties", "constrained",
                                                     "subspace",   "projection", "approx",    "shots"};
      if (std::find(known.begin(), known.end(), section) == known.end())
        throw ConfigError(where + ": unknown section [" + section + "]");
      if (section == "projection") proj_seen = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
    if (!seen_keys.insert(section + "." + key).second)
      throw ConfigError(where + ": duplicate key '" + key + "' in [" + section + "]");
    const std::string at = where + " [" + section + "] " + key;
    auto unknown = [&] { return ConfigError(where + ": unknown key '" + key + "' in [" + section + "]"); };

    if (section == "experiment") {
      if (key == "kind") {
        c.experiment = parse_experiment_kind(val);
        have_experiment = true;
      } else if (key == "sweep") {
        c.sweep = val;
      } else if (key == "fcidump") {
        c.fcidump = val;
      } else if (key == "output") {
        c.output = val;
      } else if (key == "threads") {
        c.threads = config_int<int>(val, at);
        if (c.threads < 1) throw ConfigError(at + ": threads must be >= 1");
      } else {
        throw unknown();
      }
    } else if (section == "channel") {
      if (key == "channel") {
        c.channels = config_channels(val, at);
      } else if (key == "tp_over_t1") {
        c.tp_over_t1 = config_real(val, at);
      } else if (key == "tp_over_t2") {
        c.tp_over_t2 = config_real(val, at);
      } else {
        throw unknown();
      }
    } else if (section == "penalties") {
      c.penalties.push_back(config_penalty(key, val, at));
    } else if (section == "constrained") {
      if (key == "channel")
        c.constrained_channels = config_channels(val, at);
      else
        c.constraints.push_back(config_penalty(key, val, at));
    } else if (section == "subspace") {
      if (key == "kind") {
        try {
          c.subspace = parse_basis_kind(val);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(at + ": " + e.what());
        }
      } else if (key == "order") {
        c.order = config_int<int>(val, at);
      } else if (key == "metric_cutoff") {
        c.metric_cutoff = config_real(val, at);
      } else if (key == "reference") {
        c.reference = parse_reference_kind(val);
      } else {
        throw unknown();
      }
    } else if (section == "projection") {
      if (!proj) proj.emplace();
      if (key == "symmetry") {
        try {
          proj->kind = parse_symmetry_kind(val);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(at + ": " + e.what());
        }
      } else if (key == "target") {
        proj->target = config_real(val, at);
      } else if (key == "window") {
        proj->window = config_real(val, at);
      } else {
        throw unknown();
      }
    } else if (section == "approx") {
      if (key == "zc_truncate")
        c.zc_truncate = config_bool(val, at);
      else if (key == "za_exact_d3")
        c.za_exact_d3 = config_bool(val, at);
      else
        throw unknown();
    } else if (section == "shots") {
      if (key == "count") {
        shots.count = config_int<long long>(val, at);
        shots_count = true;
      } else if (key == "seed") {
        shots.seed = config_int<std::uint64_t>(val, at);
        shots_seed = true;
      } else {
        throw unknown();
      }
    }
  }
  if (!have_experiment) throw ConfigError(source + ": [experiment] kind is required");
  if (proj_seen) {
    if (!proj) throw ConfigError(source + ": [projection] section is empty");
    c.projection = proj;
  }
  if (shots_count || shots_seed) {
    if (!shots_count) throw ConfigError(source + ": [shots] needs a count");
    c.shots = shots;
  }
  return c;
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "[experiment]\nkind = " << to_string(c.experiment) << '\n';
  if (!c.sweep.empty()) o << "sweep = " << c.sweep << '\n';
  if (!c.fcidump.empty()) o << "fcidump = " << c.fcidump << '\n';
  if (!c.output.empty()) o << "output = " << c.output << '\n';
  o << "threads = " << c.threads << '\n';

  o << "\n[channel]\n";
  if (!c.channels.empty()) o << "channel = " << detail::join_channels(c.channels) << '\n';
  o << "tp_over_t1 = " << detail::exact_real(c.tp_over_t1) << '\n';
  o << "tp_over_t2 = " << detail::exact_real(c.tp_over_t2) << '\n';

  auto penalties = [&](const std::vector<PenaltySpec>& ps) {
    for (const auto& p : ps)
      o << to_string(p.kind) << " = " << detail::exact_real(p.target) << ", " << detail::exact_real(p.weight) << '\n';
  };
  if (!c.penalties.empty()) {
    o << "\n[penalties]\n";
    penalties(c.penalties);
  }
  if (!c.constrained_channels.empty() || !c.constraints.empty()) {
    o << "\n[constrained]\n";
    if (!c.constrained_channels.empty()) o << "channel = " << detail::join_channels(c.constrained_channels) << '\n';
    penalties(c.constraints);
  }
  o << "\n[subspace]\nkind = " << to_string(c.subspace) << "\norder = " << c.order
    << "\nmetric_cutoff = " << detail::exact_real(c.metric_cutoff) << "\nreference = " << to_string(c.reference) << '\n';
  if (c.projection)
    o << "\n[projection]\nsymmetry = " << to_string(c.projection->kind) << "\ntarget = "
      << detail::exact_real(c.projection->target) << "\nwindow = " << detail::exact_real(c.projection->window) << '\n';
  o << "\n[approx]\nzc_truncate = " << (c.zc_truncate ? "true" : "false")
    << "\nza_exact_d3 = " << (c.za_exact_d3 ? "true" : "false") << '\n';
  if (c.shots) o << "\n[shots]\ncount = " << c.shots->count << "\nseed = " << c.shots->seed << '\n';
  return o.str();
}

/// Semantic checks: required keys per experiment, value ranges, and that
/// referenced input files exist. Throws ConfigError.
inline void validate_config(const ExperimentConfig& c) {
  const std::string e = to_string(c.experiment);
  const bool sweep_based = c.experiment != ExperimentKind::single_point;
  if (sweep_based) {
    if (c.sweep.empty()) throw ConfigError(e + ": [experiment] sweep is required");
    if (!std::filesystem::exists(c.resolve(c.sweep)))
      throw ConfigError(e + ": sweep manifest '" + c.resolve(c.sweep).string() + "' does not exist");
  } else {
    if (c.fcidump.empty()) throw ConfigError(e + ": [experiment] fcidump is required");
    if (!std::filesystem::exists(c.resolve(c.fcidump)))
      throw ConfigError(e + ": FCIDUMP '" + c.resolve(c.fcidump).string() + "' does not exist");
  }
  if (c.tp_over_t1 < 0.0 || c.tp_over_t2 < 0.0) throw ConfigError(e + ": time ratios must be non-negative");
  const bool needs_channel = c.experiment == ExperimentKind::fidelity_sweep ||
                             c.experiment == ExperimentKind::qse_repair ||
                             c.experiment == ExperimentKind::ground_channels;
  if (needs_channel && c.channels.empty()) throw ConfigError(e + ": [channel] channel is required");
  if (c.experiment == ExperimentKind::qse_repair && c.channels.size() != 1)
    throw ConfigError(e + ": exactly one channel expected");
  for (auto k : c.channels) {
    try {
      (void)single_qubit_channel(c.channel_spec(k));
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(e + ": " + ex.what());
    }
  }
  if (!c.constraints.empty() && c.constrained_channels.empty())
    throw ConfigError(e + ": [constrained] penalties given without a channel");
  if (c.order < 1 || c.order > 2) throw ConfigError(e + ": [subspace] order must be 1 or 2");
  if (!(c.metric_cutoff > 0.0 && c.metric_cutoff < 1.0))
    throw ConfigError(e + ": [subspace] metric_cutoff must lie in (0, 1)");
  if (c.experiment == ExperimentKind::approx_spectrum && (c.subspace != BasisKind::fermionic || c.order != 1))
    throw ConfigError(e + ": approximate methods are defined on the fermionic order-1 subspace");
  if (c.experiment == ExperimentKind::qse_repair && c.reference == ReferenceKind::exact)
    throw ConfigError(e + ": reference must be vcs, novar or both");
  if (c.projection && !(c.projection->window >= 0.0)) throw ConfigError(e + ": [projection] window must be >= 0");
  if (c.shots && c.shots->count < 1) throw ConfigError(e + ": [shots] count must be >= 1");
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& ex) {
    throw ConfigError(ex.what());
  }
  ExperimentConfig c = parse_config(text, path.string());
  c.base_dir = path.parent_path();
  return c;
}

}  // namespace qsekit
