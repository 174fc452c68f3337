#pragma once

// Command-line front end. run_cli is the whole program minus process setup,
// so tests drive it in-process. Exit codes: 0 success, 2 configuration or
// usage error, 3 runtime failure. Data goes to files; only detect-solve and
// dump-config print results on the output stream.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aes/campaign.hpp"
#include "aes/config_file.hpp"
#include "aes/detection.hpp"
#include "aes/error.hpp"
#include "aes/integrator.hpp"
#include "aes/report_io.hpp"
#include "aes/scenario.hpp"
#include "aes/simulator.hpp"

namespace aes::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

namespace detail {

inline std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline ScenarioConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = path.empty() ? ScenarioConfig{} : config::load_config(path);
  config::apply_seed_override(cfg, seed);
  return cfg;
}

inline std::vector<Protocol> parse_protocols(const std::string& list) {
  std::vector<Protocol> out;
  if (config::detail::lower(list) == "all") return {kAllProtocols.begin(), kAllProtocols.end()};
  for (auto name : config::detail::split(list, ',')) {
    const auto p = parse_protocol(name);
    if (!p) throw ConfigError("unknown protocol '" + std::string(name) + "'");
    out.push_back(*p);
  }
  if (out.empty()) throw ConfigError("empty protocol list");
  return out;
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AES sensor-network energy model: simulation campaigns, threshold solver, integrator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";

  auto* sim = app.add_subcommand("simulate", "Run one simulation and write runs.csv");
  std::string protocol_name_arg = "AES";
  sim->add_option("-c,--config", config_path, "Scenario file");
  sim->add_option("-p,--protocol", protocol_name_arg, "AES, SMAC, TMAC, TRAMA, MMAC or CMAC");
  sim->add_option("--seed", seed, "Seed (overrides AES_SEED and the file)");
  sim->add_option("-o,--out", out_dir, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Run a multi-seed campaign and write CSV and plot data");
  std::string protocols_arg = "all";
  std::optional<std::size_t> runs;
  std::size_t jobs = 0;
  cmp->add_option("-c,--config", config_path, "Scenario file");
  cmp->add_option("--protocols", protocols_arg, "'all' or a comma-separated list");
  cmp->add_option("-n,--runs", runs, "Number of seeds (default: runs from the config)");
  cmp->add_option("--seed", seed, "Base seed (overrides AES_SEED and the file)");
  cmp->add_option("-o,--out", out_dir, "Output directory");
  cmp->add_option("-j,--jobs", jobs, "Worker threads, 0 = hardware concurrency");

  auto* det = app.add_subcommand("detect-solve", "Solve the constrained detection thresholds");
  double alpha = 0.05;
  double sensitivity = 1.0;
  std::size_t kmax = 0;
  std::size_t k_offset = 1;
  std::string pk_arg;
  double tol = 1e-9;
  det->add_option("--alpha", alpha, "False-alarm budget E(UE)");
  det->add_option("--s", sensitivity, "Power-law ROC sensitivity");
  det->add_option("--kmax", kmax, "Largest sample count");
  det->add_option("--k-offset", k_offset, "Sample-count offset of the ROC family (1: k = 0 gives sqrt(u) at s = 1)");
  det->add_option("--pk", pk_arg, "Comma-separated P(K = k), k = 0..kmax (default uniform)");
  det->add_option("--tol", tol, "Bisection tolerance on gamma");

  auto* integ = app.add_subcommand("integrate", "Energy-preserving integration; writes (t, energy) data");
  std::string system = "oscillator";
  integrator::IntegratorConfig icfg;
  std::size_t steps = 10000;
  double q0 = 1.0;
  double p0 = 0.0;
  std::string data_path = "integrate.dat";
  integ->set_help_flag("--help", "Print this help message and exit");
  integ->add_option("--system", system, "oscillator or pendulum")->check(CLI::IsMember({"oscillator", "pendulum"}));
  integ->add_option("--h", icfg.step, "Step size");
  integ->add_option("--steps", steps, "Number of steps");
  integ->add_option("--points", icfg.points, "Gauss points per step");
  integ->add_option("--tol", icfg.fixed_point_tol, "Fixed-point tolerance");
  integ->add_option("--max-iters", icfg.max_fixed_point_iters, "Fixed-point iteration budget");
  integ->add_option("--q0", q0, "Initial position");
  integ->add_option("--p0", p0, "Initial momentum");
  integ->add_option("-o,--out", data_path, "Plot-data file");

  auto* dump = app.add_subcommand("dump-config", "Print the effective configuration");
  dump->add_option("-c,--config", config_path, "Scenario file");
  dump->add_option("--seed", seed, "Seed (overrides AES_SEED and the file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  // Inputs first: anything wrong here is a configuration error.
  ScenarioConfig cfg;
  std::optional<Protocol> protocol;
  std::vector<Protocol> protocols;
  try {
    if (sim->parsed() || cmp->parsed() || dump->parsed()) cfg = detail::load(config_path, seed);
    if (sim->parsed()) {
      protocol = parse_protocol(protocol_name_arg);
      if (!protocol) throw ConfigError("unknown protocol '" + protocol_name_arg + "'");
    }
    if (cmp->parsed()) {
      protocols = detail::parse_protocols(protocols_arg);
      if (runs && *runs == 0) throw ConfigError("--runs must be at least 1");
    }
    if (integ->parsed()) {
      icfg.validate();
      if (!(icfg.step > 0.0)) throw ConfigError("--h must be positive");
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (sim->parsed()) {
      const auto report = run(cfg, *protocol, cfg.seed);
      const auto dir = detail::prepare_dir(out_dir);
      io::write_file(dir / "runs.csv", detail::render([&](std::ostream& os) { io::write_runs_csv(os, {report}); }));
    } else if (cmp->parsed()) {
      const auto seeds = seed_range(cfg.seed, runs.value_or(cfg.runs));
      const auto result = run_campaign(cfg, protocols, seeds, jobs);
      const auto dir = detail::prepare_dir(out_dir);
      io::write_file(dir / "runs.csv", detail::render([&](std::ostream& os) { io::write_runs_csv(os, result.runs); }));
      io::write_file(dir / "summary.csv",
                     detail::render([&](std::ostream& os) { io::write_summary_csv(os, result.summary); }));
      io::write_file(dir / "energy_vs_nodes.dat",
                     detail::render([&](std::ostream& os) { io::write_energy_vs_nodes(os, result.runs); }));
      io::write_file(dir / "savings_vs_nodes.dat",
                     detail::render([&](std::ostream& os) { io::write_savings_vs_nodes(os, result.runs); }));
      io::write_file(dir / "node_energy_vs_transmitters.dat", detail::render([&](std::ostream& os) {
                       io::write_node_energy_vs_transmitters(os, result.runs, cfg.plot_transmitters);
                     }));
      io::write_file(dir / "lifetime_vs_protocol.dat",
                     detail::render([&](std::ostream& os) { io::write_lifetime_vs_protocol(os, result.summary); }));
    } else if (det->parsed()) {
      std::vector<double> pk;
      if (pk_arg.empty()) {
        pk.assign(kmax + 1, 1.0 / static_cast<double>(kmax + 1));
      } else {
        for (auto v : config::detail::split(pk_arg, ',')) pk.push_back(config::detail::to_real(v, "--pk"));
        if (pk.size() != kmax + 1) throw ConfigError("--pk needs kmax + 1 = " + std::to_string(kmax + 1) + " entries");
      }
      const auto roc = detection::RocModel::power_law(sensitivity, kmax, k_offset);
      const detection::SampleCountDistribution dist(pk);
      const auto sol = detection::solve_thresholds(roc, dist, alpha, {tol, 200});
      out << "ue";
      for (double u : sol.ue) out << ' ' << detail::g12(u);
      out << "\ngamma " << detail::g12(sol.gamma) << "\nexpected_ue " << detail::g12(sol.expected_ue)
          << "\nexpected_pd " << detail::g12(sol.expected_pd) << '\n';
    } else if (integ->parsed()) {
      const auto sys = system == "pendulum" ? integrator::pendulum() : integrator::harmonic_oscillator();
      integrator::Vector x0(2);
      x0 << q0, p0;
      const auto traj = integrator::integrate(sys, x0, icfg, steps);
      std::ostringstream os;
      os << "# t energy\n";
      char buf[80];
      for (std::size_t n = 0; n < traj.energies.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", static_cast<double>(n) * icfg.step, traj.energies[n]);
        os << buf;
      }
      std::snprintf(buf, sizeof buf, "# max_drift %.6e\n", traj.max_drift());
      os << buf;
      const std::filesystem::path path(data_path);
      if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
      io::write_file(path, os.str());
    } else if (dump->parsed()) {
      out << config::dump_config(cfg);
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace aes::cli
