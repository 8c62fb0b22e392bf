// dopplertrack: run Monte-Carlo Doppler-spread experiments, validate configs,
// and evaluate the exact correlation factor for scripting.
//
//   dopplertrack run --config <file> [--out <dir>] [--seed <u64>] [--parallelism <k>] [--preset <name>]
//   dopplertrack validate --config <file> [--preset <name>]
//   dopplertrack oracle xi --fd <hz> --n <tones> --t <ns> --beta <lag> [--cp-ratio <r>]
//
// Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "dopplertrack/config.hpp"
#include "dopplertrack/harness.hpp"
#include "dopplertrack/numerics.hpp"

namespace dt = dopplertrack;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void print_summary(const std::vector<dt::ScenarioSummary>& rows) {
  std::printf("%-32s %8s %7s %9s %9s %9s %6s\n", "scenario", "fd_true", "snr_db", "median", "p10", "p90",
              "conv");
  for (const auto& s : rows)
    std::printf("%-32s %8.1f %7s %9.2f %9.2f %9.2f %6.0f\n", s.scenario_id.c_str(), s.fd_true,
                dt::format_number(s.snr_db).c_str(), s.median_fd_hat, s.p10_fd_hat, s.p90_fd_hat,
                s.convergence_symbol);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doppler spread estimation by delay-subspace tracking"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int parallelism = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  auto* run = app.add_subcommand("run", "Run every scenario of a config and write CSV output");
  run->add_option("--config", config_path, "JSON experiment config");
  run->add_option("--preset", preset, "Built-in base config: eva, etu, paper-fig1, paper-fig2");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--seed", seed, "Override master_seed");
  run->add_option("--parallelism", parallelism, "Concurrent trials")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check a config and list its scenarios");
  validate->add_option("--config", config_path, "JSON experiment config");
  validate->add_option("--preset", preset, "Built-in base config");

  auto* oracle = app.add_subcommand("oracle", "Reference computations");
  oracle->require_subcommand(1);
  double fd = 0.0;
  int tones = 1024;
  double t_ns = 1e9 / 12e6;
  int beta = 0;
  double cp_ratio = 0.125;
  auto* xi = oracle->add_subcommand("xi", "Exact time-averaged correlation factor");
  xi->add_option("--fd", fd, "Maximum Doppler in Hz")->required();
  xi->add_option("--n", tones, "Number of tones")->required();
  xi->add_option("--t", t_ns, "Sample period in ns")->required();
  xi->add_option("--beta", beta, "Symbol lag")->required();
  xi->add_option("--cp-ratio", cp_ratio, "L_cp / N")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*xi) {
    try {
      std::printf("%.17g\n", dt::xi_exact(fd, tones, t_ns * 1e-9, beta, cp_ratio));
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitConfig;
    }
  }

  dt::RunConfig cfg;
  try {
    cfg = dt::load_config(config_path, preset, seed);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  for (const auto& s : cfg.scenarios)
    for (const auto& w : s.warnings()) std::cerr << "warning: " << w << '\n';

  if (*validate) {
    std::cout << cfg.name << ": " << cfg.scenarios.size() << " scenario(s)\n";
    for (const auto& s : cfg.scenarios)
      std::cout << "  " << s.id << "  symbols=" << s.symbol_count() << " trials=" << s.trials << '\n';
    return 0;
  }

  try {
    const auto result = dt::run_grid(cfg.scenarios, parallelism);
    dt::emit_csv(result, out_dir);
    print_summary(result.summaries);
    int failed = 0;
    for (const auto& t : result.trials) {
      if (t.ok()) continue;
      ++failed;
      std::cerr << "trial failed: " << t.scenario_id << " #" << t.trial << ": " << t.error << '\n';
    }
    return failed == 0 ? 0 : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
