// qsekit command-line driver: batch experiments from config files and
// single-point reports straight from an FCIDUMP.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qsekit/qsekit.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  const std::filesystem::path p = path;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw qsekit::ConfigError("cannot open output file '" + path + "'");
  out << text;
  if (!out) throw qsekit::ConfigError("failed writing '" + path + "'");
}

qsekit::PenaltySpec parse_penalty_arg(const std::string& s) {
  // kind:target:weight
  const auto a = s.find(':'), b = s.rfind(':');
  if (a == std::string::npos || a == b) throw qsekit::ConfigError("--penalty expects kind:target:weight, got '" + s + "'");
  return qsekit::detail::config_penalty(s.substr(0, a), s.substr(a + 1, b - a - 1) + "," + s.substr(b + 1),
                                        "--penalty");
}

qsekit::ProjectionSpec parse_projection_arg(const std::string& s) {
  // kind:target[:window]
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t pos; (pos = s.find(':', start)) != std::string::npos; start = pos + 1)
    parts.push_back(s.substr(start, pos - start));
  parts.push_back(s.substr(start));
  if (parts.size() < 2 || parts.size() > 3) throw qsekit::ConfigError("--project expects kind:target[:window]");
  qsekit::ProjectionSpec p;
  try {
    p.kind = qsekit::parse_symmetry_kind(parts[0]);
  } catch (const std::invalid_argument& e) {
    throw qsekit::ConfigError(std::string("--project: ") + e.what());
  }
  p.target = qsekit::detail::config_real(parts[1], "--project");
  if (parts.size() == 3) p.window = qsekit::detail::config_real(parts[2], "--project");
  return p;
}

int run_config(const std::string& config_path, const std::string& output_override, int threads, bool validate_only) {
  qsekit::ExperimentConfig cfg = qsekit::load_config(config_path);
  qsekit::validate_config(cfg);
  if (validate_only) {
    std::cerr << "qsekit: " << config_path << ": ok (" << qsekit::to_string(cfg.experiment) << ")\n";
    return 0;
  }
  std::string output = output_override;
  if (output.empty() && !cfg.output.empty()) output = cfg.resolve(cfg.output).string();

  const auto t0 = std::chrono::steady_clock::now();
  const qsekit::ExperimentResult res = qsekit::run_experiment(cfg, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_output(res.text, output);

  char timing[32];
  std::snprintf(timing, sizeof timing, "%.3f", wall);
  std::cerr << "qsekit run: experiment=" << qsekit::to_string(cfg.experiment) << " points=" << res.points
            << " rows=" << res.rows << " continuation_events=" << res.continuation_events << " wall_time=" << timing
            << "s output=" << (output.empty() ? "<stdout>" : output) << '\n';
  for (const auto& n : res.notes) std::cerr << "qsekit note: " << n << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qsekit: variational channel states and quantum subspace expansions on small molecules"};
  app.require_subcommand(0, 1);
  app.set_version_flag("--version", std::string("qsekit ") + QSEKIT_VERSION);

  std::string validate_path;
  app.add_option("--validate-config", validate_path, "Parse and validate a config file, then exit")
      ->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path, output;
  int threads = 0;
  bool validate_only = false;
  run->add_option("--config", config_path, "Experiment config (INI-style)")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "CSV destination (overrides the config; '-' for stdout)");
  run->add_option("--threads", threads, "Worker threads (default: config value)")->check(CLI::PositiveNumber);
  run->add_flag("--validate-config", validate_only, "Only validate the config");

  auto* point = app.add_subcommand("point", "Report on a single FCIDUMP");
  qsekit::ExperimentConfig pc;
  pc.experiment = qsekit::ExperimentKind::single_point;
  std::vector<std::string> channel_names, penalty_args;
  std::string subspace = "fermionic", reference = "vcs", projection;
  point->add_option("--fcidump", pc.fcidump, "Integral file")->required()->check(CLI::ExistingFile);
  point->add_option("--channel", channel_names, "dephasing | ap | depol (repeatable)");
  point->add_option("--tp-t1", pc.tp_over_t1, "T_p / T_1");
  point->add_option("--tp-t2", pc.tp_over_t2, "T_p / T_2");
  point->add_option("--penalty", penalty_args, "kind:target:weight (repeatable)");
  point->add_option("--subspace", subspace, "fermionic | qubit");
  point->add_option("--order", pc.order, "Subspace order (1 or 2)");
  point->add_option("--reference", reference, "Subspace reference when a channel is given: vcs | novar");
  point->add_option("--project", projection, "Symmetry projection kind:target[:window]");
  point->add_option("--metric-cutoff", pc.metric_cutoff, "Relative overlap cutoff");
  point->add_option("--output", output, "Write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (!validate_path.empty()) return run_config(validate_path, "", 0, true);
    if (*run) return run_config(config_path, output, threads, validate_only);
    if (*point) {
      for (const auto& n : channel_names) pc.channels.push_back(qsekit::parse_channel_kind(n));
      for (const auto& p : penalty_args) pc.penalties.push_back(parse_penalty_arg(p));
      pc.subspace = qsekit::parse_basis_kind(subspace);
      pc.reference = qsekit::parse_reference_kind(reference);
      if (!projection.empty()) pc.projection = parse_projection_arg(projection);
      const auto res = qsekit::run_experiment(pc);
      write_output(res.text, output);
      return 0;
    }
    std::cout << app.help();
    return kExitConfig;
  } catch (const qsekit::ConfigError& e) {
    std::cerr << "qsekit: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qsekit::ParseError& e) {
    std::cerr << "qsekit: input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qsekit: invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qsekit::NumericalError& e) {
    std::cerr << "qsekit: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "qsekit: error: " << e.what() << '\n';
    return 1;
  }
}
