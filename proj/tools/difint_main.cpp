// Command line front end. Wires configuration files and flag overrides into
// the shared-library C API; all numerics live behind difint.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "difint.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNumeric = 70;

int status_to_exit(difint_status status) {
  switch (status) {
    case DIFINT_OK:
      return kExitOk;
    case DIFINT_ERR_NUMERIC:
    case DIFINT_ERR_INTERNAL:
      return kExitNumeric;
    default:
      return kExitValidation;
  }
}

int fail(difint_status status) {
  std::cerr << "error: " << difint_last_error() << "\n";
  return status_to_exit(status);
}

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs, applied in order
  std::string seed;
  std::string trials;
  std::string threads;

  // Flags win over file keys: the file text comes first, later lines
  // override earlier ones.
  bool merged_text(std::string& out) const {
    std::ostringstream merged;
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot open config file " << config_path << "\n";
        return false;
      }
      merged << in.rdbuf() << "\n";
    }
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
        return false;
      }
      merged << kv.substr(0, eq) << " = " << kv.substr(eq + 1) << "\n";
    }
    if (!seed.empty()) merged << "master_seed = " << seed << "\n";
    if (!trials.empty()) merged << "n_trials = " << trials << "\n";
    if (!threads.empty()) merged << "threads = " << threads << "\n";
    out = merged.str();
    return true;
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args, bool require_config) {
  auto* opt = cmd->add_option("--config", args.config_path, "run configuration file");
  if (require_config) opt->required();
  cmd->add_option("--set", args.overrides, "override a configuration key (key=value)");
  cmd->add_option("--seed", args.seed, "override master_seed");
  cmd->add_option("--trials", args.trials, "override n_trials");
  cmd->add_option("--threads", args.threads, "override worker thread count");
}

bool write_or_print(const std::string& out_path, const char* text) {
  if (out_path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return false;
  }
  out << text;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential interferometer simulation and joint phase/noise estimation"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  ConfigArgs sim_args;
  std::string sim_out = ".";
  CLI::App* simulate = app.add_subcommand("simulate", "sample shots and write CSV + sidecar");
  add_config_options(simulate, sim_args, true);
  simulate->add_option("--out", sim_out, "output directory");

  std::string est_data, est_sidecar, est_out;
  CLI::App* estimate = app.add_subcommand("estimate", "joint estimate from a shot CSV");
  estimate->add_option("--data", est_data, "shot CSV path")->required();
  estimate->add_option("--sidecar", est_sidecar, "JSON sidecar path (default: <data>.json)");
  estimate->add_option("--out", est_out, "output JSON path (default: stdout)");

  double fisher_theta = 0.0, fisher_sigma = 0.0, fisher_tau = 0.0;
  std::size_t fisher_m = 100;
  int fisher_n1 = 0, fisher_n2 = 0;
  std::string fisher_out;
  CLI::App* fisher = app.add_subcommand("fisher", "Fisher information and error bounds");
  fisher->add_option("--theta", fisher_theta, "differential phase")->required();
  fisher->add_option("--sigma", fisher_sigma, "uncorrelated noise width")->required();
  fisher->add_option("-m,--shots", fisher_m, "shots per trial");
  fisher->add_option("--n1", fisher_n1, "particles in interferometer 1");
  fisher->add_option("--n2", fisher_n2, "particles in interferometer 2");
  fisher->add_option("--tau", fisher_tau, "interaction parameter");
  fisher->add_option("--out", fisher_out, "output JSON path (default: stdout)");

  ConfigArgs bench_args;
  std::string bench_out;
  CLI::App* benchmark = app.add_subcommand("benchmark", "repeated-trial estimator comparison");
  add_config_options(benchmark, bench_args, true);
  benchmark->add_option("--out", bench_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (simulate->parsed()) {
    std::string text;
    if (!sim_args.merged_text(text)) return kExitValidation;
    const difint_status st = difint_run_simulate(text.c_str(), sim_out.c_str());
    if (st != DIFINT_OK) return fail(st);
    std::cout << "wrote " << sim_out << "/shots.csv and " << sim_out << "/shots.json\n";
    return kExitOk;
  }

  if (estimate->parsed()) {
    if (est_sidecar.empty()) {
      const auto dot = est_data.find_last_of('.');
      est_sidecar = (dot == std::string::npos ? est_data : est_data.substr(0, dot)) + ".json";
    }
    char* json = nullptr;
    char* warnings = nullptr;
    const difint_status st =
        difint_run_estimate(est_data.c_str(), est_sidecar.c_str(), &json, &warnings);
    if (warnings != nullptr) {
      std::cerr << "warning: " << warnings << "\n";
      difint_string_free(warnings);
    }
    if (st != DIFINT_OK) return fail(st);
    const bool ok = write_or_print(est_out, json);
    difint_string_free(json);
    return ok ? kExitOk : kExitValidation;
  }

  if (fisher->parsed()) {
    char* json = nullptr;
    const difint_status st = difint_run_fisher_json(fisher_theta, fisher_sigma, fisher_m,
                                                    fisher_n1, fisher_n2, fisher_tau, &json);
    if (st != DIFINT_OK) return fail(st);
    const bool ok = write_or_print(fisher_out, json);
    difint_string_free(json);
    return ok ? kExitOk : kExitValidation;
  }

  if (benchmark->parsed()) {
    std::string text;
    if (!bench_args.merged_text(text)) return kExitValidation;
    const difint_status st = difint_run_benchmark(text.c_str(), bench_out.c_str());
    if (st != DIFINT_OK) return fail(st);
    std::cout << "wrote " << bench_out << "/summary.json\n";
    return kExitOk;
  }

  return kExitUsage;
}
