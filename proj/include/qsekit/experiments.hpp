#pragma once

// Batch experiments over bond-length sweeps. Each produces a CSV document
// with a fixed column order and rows in a fixed (curve, R) order, whatever
// the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "channels.hpp"
#include "config.hpp"
#include "error.hpp"
#include "format.hpp"
#include "molecule.hpp"
#include "qse.hpp"
#include "rdm.hpp"
#include "sampling.hpp"
#include "sector.hpp"
#include "symmetry.hpp"
#include "vcs.hpp"

namespace qsekit {

struct ExperimentResult {
  std::string text;  // CSV (or the report for single-point)
  std::size_t rows = 0;
  std::size_t points = 0;
  int continuation_events = 0;
  std::vector<std::string> notes;
};

/// Runs f(0..n-1) on up to `threads` workers. The exception thrown by the
/// lowest failing index is rethrown, so failures are reported
/// deterministically too.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace detail {

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    line(cells);
    ++rows_;
  }
  std::string str() const { return out_.str(); }
  std::size_t rows() const { return rows_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }
  std::size_t width_;
  std::size_t rows_ = 0;
  std::ostringstream out_;
};

inline std::string num(double x) { return std::isnan(x) ? "nan" : format_real(x); }
inline std::string num(Eigen::Index x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointModel {
  double bond_length = 0.0;
  MolecularIntegrals integrals;
  SpinOrbitalIntegrals spin_orbital;
  ComplexMatrix h;
  int modes = 0;
  int nelec = 0;
};

inline PointModel make_point(double r, const MolecularIntegrals& ints) {
  PointModel p;
  p.bond_length = r;
  p.integrals = ints;
  p.spin_orbital = to_spin_orbital(ints);
  p.h = fermion_to_dense(assemble_hamiltonian(p.spin_orbital));
  p.modes = ints.modes();
  p.nelec = ints.nelec;
  return p;
}

inline std::vector<PointModel> load_points(const ExperimentConfig& c) {
  std::vector<PointModel> out;
  for (const auto& sp : load_sweep(c.resolve(c.sweep))) out.push_back(make_point(sp.bond_length, sp.integrals));
  return out;
}

/// Dense N and (for even mode counts) S^2 keyed by their symmetry names.
inline std::map<std::string, ComplexMatrix> symmetry_matrices(int modes) {
  std::map<std::string, ComplexMatrix> out;
  out[to_string(SymmetryKind::number)] = fermion_to_dense(symmetry_operator(SymmetryKind::number, modes));
  if (modes % 2 == 0) {
    out[to_string(SymmetryKind::sz)] = fermion_to_dense(symmetry_operator(SymmetryKind::sz, modes));
    out[to_string(SymmetryKind::s_squared)] = fermion_to_dense(symmetry_operator(SymmetryKind::s_squared, modes));
  }
  return out;
}

inline double sym_value(const std::map<std::string, ComplexMatrix>& syms, SymmetryKind k, const ComplexVector& v) {
  auto it = syms.find(to_string(k));
  return it == syms.end() ? kNaN : expectation(it->second, v);
}

inline double sub_value(const SubspaceProblem& p, SymmetryKind k, const ComplexVector& c) {
  return p.symmetry_subs.count(to_string(k)) ? subspace_expectation(p, to_string(k), c) : kNaN;
}

inline std::vector<Penalty> make_penalties(const std::vector<PenaltySpec>& specs, int modes) {
  std::vector<Penalty> out;
  for (const auto& s : specs) out.push_back(symmetry_penalty(s.kind, modes, s.target, s.weight));
  return out;
}

inline ExpansionBasis make_basis(const ExperimentConfig& c, int modes) {
  return c.subspace == BasisKind::fermionic ? fermionic_basis(modes, c.order) : qubit_basis(modes, c.order);
}

/// Runs `f` and prefixes numerical failures with the sweep point.
template <class F>
auto at_point(double r, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const NumericalError& e) {
    throw NumericalError("R=" + format_real(r) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

inline ExperimentResult fidelity_sweep(const ExperimentConfig& c, int threads) {
  const auto pts = load_points(c);
  std::vector<ComplexVector> exact(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) exact[i] = sector_ground_state(pts[i].h, pts[i].nelec);

  struct Row {
    double fid_vcs, fid_novar, fid_exact, e_vcs, e_novar, e_exact, n_vcs, s2_vcs;
    Eigen::Index degeneracy;
  };
  std::vector<std::vector<Row>> curves(c.channels.size());
  std::vector<int> continued(c.channels.size(), 0);
  parallel_for(c.channels.size(), threads, [&](std::size_t ci) {
    ComplexVector prev;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      at_point(p.bond_length, [&] {
        const auto ch = register_channel(c.channel_spec(c.channels[ci]), p.modes);
        const auto syms = symmetry_matrices(p.modes);
        const auto vcs = solve_vcs(p.h, ch, make_penalties(c.penalties, p.modes), prev.size() ? &prev : nullptr);
        const auto novar = propagate_input(p.h, ch, exact[i]);
        prev = vcs.input_state;
        continued[ci] += vcs.continued ? 1 : 0;
        curves[ci].push_back({vcs.fidelity_io, novar.fidelity_io, fidelity(vcs.output_rho, exact[i]), vcs.energy,
                              novar.energy, expectation(p.h, exact[i]), sym_value(syms, SymmetryKind::number, vcs.input_state),
                              sym_value(syms, SymmetryKind::s_squared, vcs.input_state), vcs.ground_degeneracy});
      });
    }
  });

  Csv csv({"R", "channel", "fidelity_vcs", "fidelity_novar", "fidelity_vs_exact", "energy_vcs", "energy_novar",
           "energy_exact", "number_vcs", "s_squared_vcs", "degeneracy"});
  ExperimentResult res;
  for (std::size_t ci = 0; ci < c.channels.size(); ++ci) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Row& r = curves[ci][i];
      csv.row({num(pts[i].bond_length), to_string(c.channels[ci]), num(r.fid_vcs), num(r.fid_novar),
               num(r.fid_exact), num(r.e_vcs), num(r.e_novar), num(r.e_exact), num(r.n_vcs), num(r.s2_vcs),
               num(r.degeneracy)});
    }
    res.continuation_events += continued[ci];
  }
  res.text = csv.str();
  res.rows = csv.rows();
  res.points = pts.size();
  return res;
}

inline ExperimentResult spectrum(const ExperimentConfig& c, int threads) {
  const auto pts = load_points(c);
  struct Level {
    std::string curve;
    int level;
    double energy, number, s2;
  };
  std::vector<std::vector<Level>> out(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    const auto& p = pts[i];
    at_point(p.bond_length, [&] {
      const auto syms = symmetry_matrices(p.modes);
      auto& rows = out[i];
      auto add_dense = [&](const std::string& curve, const Spectrum& s) {
        for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
          const ComplexVector v = s.eigenvectors.col(k);
          rows.push_back({curve, static_cast<int>(k), s.eigenvalues(k), sym_value(syms, SymmetryKind::number, v),
                          sym_value(syms, SymmetryKind::s_squared, v)});
        }
      };
      auto add_sub = [&](const std::string& curve, const SubspaceProblem& prob, const Spectrum& s) {
        for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
          const ComplexVector v = s.eigenvectors.col(k);
          rows.push_back({curve, static_cast<int>(k), s.eigenvalues(k), sub_value(prob, SymmetryKind::number, v),
                          sub_value(prob, SymmetryKind::s_squared, v)});
        }
      };
      add_dense("fci_all", hermitian_eigensolve(p.h));
      add_dense("fci", sector_spectrum(p.h, p.nelec));
      const ComplexVector g = sector_ground_state(p.h, p.nelec);
      const auto prob = build_subspace_direct(make_basis(c, p.modes), p.h, g * g.adjoint(), syms);
      add_sub("qse", prob, solve_subspace(prob, c.metric_cutoff));
      if (c.projection) {
        const auto pr = project_symmetry(prob, to_string(c.projection->kind), c.projection->target,
                                         c.projection->window, c.metric_cutoff);
        add_sub("qse_projected", pr, solve_subspace(pr, c.metric_cutoff));
      }
    });
  });
  Csv csv({"R", "curve", "level", "energy", "number", "s_squared"});
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (const auto& l : out[i])
      csv.row({num(pts[i].bond_length), l.curve, num(l.level), num(l.energy), num(l.number), num(l.s2)});
  ExperimentResult res;
  res.text = csv.str();
  res.rows = csv.rows();
  res.points = pts.size();
  return res;
}

inline ExperimentResult qse_repair(const ExperimentConfig& c, int threads) {
  const auto pts = load_points(c);
  std::vector<ReferenceKind> refs;
  if (c.reference == ReferenceKind::both)
    refs = {ReferenceKind::vcs, ReferenceKind::novar};
  else
    refs = {c.reference};
  const ChannelKind kind = c.channels.front();

  struct Row {
    double e_exact, e_channel, e_qse, e_proj, s2_input, s2_qse, s2_proj, n_qse, n_proj;
    Eigen::Index retained, projected;
  };
  std::vector<std::vector<Row>> curves(refs.size());
  std::vector<int> continued(refs.size(), 0);
  std::vector<std::vector<std::string>> notes(refs.size());
  parallel_for(refs.size(), threads, [&](std::size_t ri) {
    ComplexVector prev;
    for (const auto& p : pts) {
      at_point(p.bond_length, [&] {
        const auto syms = symmetry_matrices(p.modes);
        const auto ch = register_channel(c.channel_spec(kind), p.modes);
        const ComplexVector g = sector_ground_state(p.h, p.nelec);
        VcsSolution sol;
        if (refs[ri] == ReferenceKind::vcs) {
          sol = solve_vcs(p.h, ch, make_penalties(c.penalties, p.modes), prev.size() ? &prev : nullptr);
          prev = sol.input_state;
          continued[ri] += sol.continued ? 1 : 0;
        } else {
          sol = propagate_input(p.h, ch, g);
        }
        const auto prob = build_subspace_direct(make_basis(c, p.modes), p.h, sol.output_rho, syms);
        const Spectrum sp = solve_subspace(prob, c.metric_cutoff);
        const ComplexVector c0 = sp.eigenvectors.col(0);
        Row r{expectation(p.h, g),
              sol.energy,
              sp.eigenvalues(0),
              kNaN,
              sym_value(syms, SymmetryKind::s_squared, sol.input_state),
              sub_value(prob, SymmetryKind::s_squared, c0),
              kNaN,
              sub_value(prob, SymmetryKind::number, c0),
              kNaN,
              sp.retained_dim,
              0};
        if (c.projection) {
          try {
            const auto pr = project_symmetry(prob, to_string(c.projection->kind), c.projection->target,
                                             c.projection->window, c.metric_cutoff);
            const Spectrum ps = solve_subspace(pr, c.metric_cutoff);
            const ComplexVector d0 = ps.eigenvectors.col(0);
            r.e_proj = ps.eigenvalues(0);
            r.s2_proj = sub_value(pr, SymmetryKind::s_squared, d0);
            r.n_proj = sub_value(pr, SymmetryKind::number, d0);
            r.projected = ps.retained_dim;
          } catch (const NumericalError& e) {
            notes[ri].push_back(to_string(refs[ri]) + " R=" + format_real(p.bond_length) + ": " + e.what());
          }
        }
        curves[ri].push_back(r);
      });
    }
  });
  Csv csv({"R", "reference", "energy_exact", "energy_channel", "energy_qse", "energy_qse_projected", "s_squared_input",
           "s_squared_qse", "s_squared_qse_projected", "number_qse", "number_qse_projected", "retained_dim",
           "projected_dim"});
  ExperimentResult res;
  for (std::size_t ri = 0; ri < refs.size(); ++ri) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Row& r = curves[ri][i];
      csv.row({num(pts[i].bond_length), to_string(refs[ri]), num(r.e_exact), num(r.e_channel), num(r.e_qse),
               num(r.e_proj), num(r.s2_input), num(r.s2_qse), num(r.s2_proj), num(r.n_qse), num(r.n_proj),
               num(r.retained), num(r.projected)});
    }
    res.continuation_events += continued[ri];
    res.notes.insert(res.notes.end(), notes[ri].begin(), notes[ri].end());
  }
  res.text = csv.str();
  res.rows = csv.rows();
  res.points = pts.size();
  return res;
}

inline ExperimentResult ground_channels(const ExperimentConfig& c, int threads) {
  const auto pts = load_points(c);
  struct Curve {
    std::string name;
    std::optional<ChannelKind> channel;
    std::vector<PenaltySpec> penalties;
  };
  std::vector<Curve> curves = {{"exact", std::nullopt, {}}, {"rhf", std::nullopt, {}}};
  for (auto k : c.channels) curves.push_back({to_string(k), k, c.penalties});
  for (auto k : c.constrained_channels) {
    std::vector<PenaltySpec> ps = c.penalties;
    ps.insert(ps.end(), c.constraints.begin(), c.constraints.end());
    curves.push_back({to_string(k) + "_constrained", k, ps});
  }
  struct Row {
    double energy, number, s2, fid;
  };
  std::vector<std::vector<Row>> out(curves.size());
  std::vector<int> continued(curves.size(), 0);
  parallel_for(curves.size(), threads, [&](std::size_t ci) {
    const Curve& cv = curves[ci];
    ComplexVector prev;
    for (const auto& p : pts) {
      at_point(p.bond_length, [&] {
        const auto syms = symmetry_matrices(p.modes);
        auto report = [&](double e, const ComplexVector& v, double fid) {
          out[ci].push_back({e, sym_value(syms, SymmetryKind::number, v), sym_value(syms, SymmetryKind::s_squared, v), fid});
        };
        if (!cv.channel) {
          const ComplexVector v = cv.name == "exact" ? sector_ground_state(p.h, p.nelec)
                                                     : occupation_state(reference_occupation(p.integrals));
          report(expectation(p.h, v), v, 1.0);
          return;
        }
        const auto ch = register_channel(c.channel_spec(*cv.channel), p.modes);
        const auto sol = solve_vcs(p.h, ch, make_penalties(cv.penalties, p.modes), prev.size() ? &prev : nullptr);
        prev = sol.input_state;
        continued[ci] += sol.continued ? 1 : 0;
        report(sol.energy, sol.input_state, sol.fidelity_io);
      });
    }
  });
  Csv csv({"R", "curve", "energy", "number", "s_squared", "fidelity_io"});
  ExperimentResult res;
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Row& r = out[ci][i];
      csv.row({num(pts[i].bond_length), curves[ci].name, num(r.energy), num(r.number), num(r.s2), num(r.fid)});
    }
    res.continuation_events += continued[ci];
  }
  res.text = csv.str();
  res.rows = csv.rows();
  res.points = pts.size();
  return res;
}

inline ExperimentResult approx_spectrum(const ExperimentConfig& c, int threads) {
  const auto pts = load_points(c);
  struct Levels {
    Eigen::VectorXd exact, zc, za;
  };
  std::vector<Levels> out(pts.size());
  const int top_order = (!c.zc_truncate || c.za_exact_d3) ? 3 : 2;
  // Sampled RDMs give metrics that are PSD only up to shot noise; directions
  // at that scale are discarded rather than treated as an error.
  const double noise = c.shots ? 5.0 / std::sqrt(static_cast<double>(c.shots->count)) : 0.0;
  const double cutoff = std::max(c.metric_cutoff, noise);
  const double negative_tol = std::max(1e-8, noise);
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    const auto& p = pts[i];
    at_point(p.bond_length, [&] {
      const ComplexVector g = sector_ground_state(p.h, p.nelec);
      const ComplexMatrix rho = g * g.adjoint();
      const RdmSet rdms = c.shots ? estimate_rdms(rho, top_order, c.shots->count, c.shots->seed + 1000003ULL * i)
                                  : compute_rdms(g, top_order);
      const auto body = BodyOperator::from_integrals(p.spin_orbital);
      const ApproxOptions opt{c.zc_truncate, c.za_exact_d3};
      out[i].exact = solve_subspace(build_subspace_direct(fermionic_basis(p.modes, 1), p.h, rho), c.metric_cutoff).eigenvalues;
      out[i].zc =
          solve_subspace(approximate_lr(ApproxMethod::ZC, body, rdms, detail::kNaN, opt), cutoff, negative_tol).eigenvalues;
      out[i].za =
          solve_subspace(approximate_lr(ApproxMethod::ZA, body, rdms, detail::kNaN, opt), cutoff, negative_tol).eigenvalues;
    });
  });
  Csv csv({"R", "method", "level", "energy", "error"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Levels& l = out[i];
    auto emit = [&](const std::string& method, const Eigen::VectorXd& ev) {
      for (Eigen::Index k = 0; k < ev.size(); ++k)
        csv.row({num(pts[i].bond_length), method, num(static_cast<int>(k)), num(ev(k)),
                 num(k < l.exact.size() ? ev(k) - l.exact(k) : kNaN)});
    };
    emit("exact", l.exact);
    emit("ZC", l.zc);
    emit("ZA", l.za);
  }
  ExperimentResult res;
  res.text = csv.str();
  res.rows = csv.rows();
  res.points = pts.size();
  return res;
}

inline ExperimentResult single_point(const ExperimentConfig& c) {
  const auto path = c.resolve(c.fcidump);
  const PointModel p = make_point(0.0, load_fcidump(path));
  const auto syms = symmetry_matrices(p.modes);
  std::ostringstream o;
  auto line = [&](const std::string& k, const std::string& v) { o << "  " << k << ": " << v << '\n'; };
  o << "fcidump: " << path.string() << '\n';
  line("orbitals", std::to_string(p.integrals.norb));
  line("electrons", std::to_string(p.nelec));
  line("spin orbitals", std::to_string(p.modes));
  line("core energy", num(p.integrals.core_energy));

  const Spectrum fci = sector_spectrum(p.h, p.nelec);
  const ComplexVector g = sector_ground_state(p.h, p.nelec);
  o << "exact (N_e = " << p.nelec << " sector)\n";
  std::string levels;
  for (Eigen::Index k = 0; k < fci.eigenvalues.size(); ++k) levels += (k ? " " : "") + num(fci.eigenvalues(k));
  line("levels", levels);
  line("ground energy", num(fci.eigenvalues(0)));
  line("<N>", num(sym_value(syms, SymmetryKind::number, g)));
  line("<S^2>", num(sym_value(syms, SymmetryKind::s_squared, g)));
  const ComplexVector hf = occupation_state(reference_occupation(p.integrals));
  line("reference determinant energy", num(expectation(p.h, hf)));

  ComplexMatrix rho = g * g.adjoint();
  for (auto k : c.channels) {
    const auto ch = register_channel(c.channel_spec(k), p.modes);
    const auto vcs = solve_vcs(p.h, ch, make_penalties(c.penalties, p.modes));
    const auto nov = propagate_input(p.h, ch, g);
    o << "channel " << to_string(k) << " (tp/T1 = " << num(c.tp_over_t1) << ", tp/T2 = " << num(c.tp_over_t2) << ")\n";
    line("vcs energy", num(vcs.energy));
    line("vcs fidelity (input/output)", num(vcs.fidelity_io));
    line("vcs fidelity (vs exact)", num(fidelity(vcs.output_rho, g)));
    line("vcs input <N>", num(sym_value(syms, SymmetryKind::number, vcs.input_state)));
    line("vcs input <S^2>", num(sym_value(syms, SymmetryKind::s_squared, vcs.input_state)));
    line("vcs ground degeneracy", num(vcs.ground_degeneracy));
    line("no-variation energy", num(nov.energy));
    line("no-variation fidelity", num(nov.fidelity_io));
    if (k == c.channels.front()) rho = c.reference == ReferenceKind::novar ? nov.output_rho : vcs.output_rho;
  }

  const auto prob = build_subspace_direct(make_basis(c, p.modes), p.h, rho, syms);
  const Spectrum sp = solve_subspace(prob, c.metric_cutoff);
  o << "subspace " << to_string(c.subspace) << " order " << c.order << " around the "
    << (c.channels.empty() ? "exact ground state" : "channel output") << '\n';
  line("basis size", std::to_string(prob.basis.size()));
  line("retained_dim", num(sp.retained_dim));
  levels.clear();
  for (Eigen::Index k = 0; k < sp.eigenvalues.size(); ++k) levels += (k ? " " : "") + num(sp.eigenvalues(k));
  line("levels", levels);
  const ComplexVector c0 = sp.eigenvectors.col(0);
  line("ground <N>", num(sub_value(prob, SymmetryKind::number, c0)));
  line("ground <S^2>", num(sub_value(prob, SymmetryKind::s_squared, c0)));
  if (c.projection) {
    const auto pr = project_symmetry(prob, to_string(c.projection->kind), c.projection->target, c.projection->window,
                                     c.metric_cutoff);
    const Spectrum ps = solve_subspace(pr, c.metric_cutoff);
    o << "projected onto " << to_string(c.projection->kind) << " = " << num(c.projection->target) << " (window "
      << num(c.projection->window) << ")\n";
    line("retained_dim", num(ps.retained_dim));
    line("ground energy", num(ps.eigenvalues(0)));
    const ComplexVector d0 = ps.eigenvectors.col(0);
    line("ground <N>", num(sub_value(pr, SymmetryKind::number, d0)));
    line("ground <S^2>", num(sub_value(pr, SymmetryKind::s_squared, d0)));
  }
  ExperimentResult res;
  res.text = o.str();
  res.points = 1;
  return res;
}

}  // namespace detail

/// Validates and runs one experiment. `threads` <= 0 uses the configured count.
inline ExperimentResult run_experiment(const ExperimentConfig& c, int threads = 0) {
  validate_config(c);
  const int t = threads > 0 ? threads : c.threads;
  switch (c.experiment) {
    case ExperimentKind::fidelity_sweep: return detail::fidelity_sweep(c, t);
    case ExperimentKind::spectrum: return detail::spectrum(c, t);
    case ExperimentKind::qse_repair: return detail::qse_repair(c, t);
    case ExperimentKind::ground_channels: return detail::ground_channels(c, t);
    case ExperimentKind::approx_spectrum: return detail::approx_spectrum(c, t);
    case ExperimentKind::single_point: return detail::single_point(c);
  }
  throw std::logic_error("unhandled experiment");
}

}  // namespace qsekit
