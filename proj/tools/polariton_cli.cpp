#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include <polariton/scenario.hpp>

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kValidity = 3, kConvergence = 4 };

pol::ScenarioConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pol::ConfigError("cannot open config " + path);
  pol::json j;
  try {
    j = pol::json::parse(in);
  } catch (const pol::json::exception& e) {
    throw pol::ConfigError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return pol::parse_config(j);
  } catch (const pol::json::exception& e) {
    throw pol::ConfigError(e.what());
  }
}

int run(const std::string& sub, const std::string& config, const std::string& out_dir, const std::string& format) {
  try {
    auto cfg = load(config);
    if (sub != pol::subcommand_of(cfg.kind))
      throw pol::ConfigError("config kind '" + std::string(pol::kind_name(cfg.kind)) + "' is run by '" +
                             pol::subcommand_of(cfg.kind) + "', not '" + sub + "'");
    if (!format.empty()) {
      if (format != "csv" && format != "json.gz") throw pol::ConfigError("--snapshot-format must be csv or json.gz");
      cfg.snapshot_format = format;
    }
    pol::io::OutputSet out(out_dir);
    out.write("config.json", pol::io::read_file(config));
    const auto summary = pol::run_scenario(cfg, out);
    out.commit();
    std::cout << summary.dump() << '\n';
    return kOk;
  } catch (const pol::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const pol::ValidityError& e) {
    std::cerr << "validity error: " << e.what() << '\n';
    return kValidity;
  } catch (const pol::DomainError& e) {
    std::cerr << "validity error: " << e.what() << '\n';
    return kValidity;
  } catch (const pol::ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coulomb bound states of Rydberg polaritons"};
  app.require_subcommand(1);
  std::string config, out_dir = "out", format;
  int threads = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet", quiet, "suppress warnings");

  const char* subs[][2] = {{"dispersion", "exact and WKB branches omega_n(K)"},
                           {"wkb", "WKB quantization map and group velocities"},
                           {"decompose", "spectral decomposition of Coulomb states"},
                           {"evolve", "wavepacket time evolution"},
                           {"potential", "effective potential and Coulomb-state components"}};
  for (auto& s : subs) {
    auto* sc = app.add_subcommand(s[0], s[1])->fallthrough();
    sc->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sc->add_option("--out", out_dir, "output directory");
    sc->add_option("--snapshot-format", format, "csv or json.gz");
    sc->add_option("--threads", threads, "worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }
  if (quiet) pol::warnings_enabled() = false;
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif
  return run(app.get_subcommands().front()->get_name(), config, out_dir, format);
}
