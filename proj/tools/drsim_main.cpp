#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "drsim/engine.hpp"
#include "drsim/errors.hpp"
#include "drsim/kernels.hpp"
#include "drsim/report.hpp"
#include "drsim/scenario.hpp"

namespace {

// 0 ok, 2 bad config, 3 capacity exceeded, 4 file I/O, 1 anything else.
constexpr int kExitConfig = 2;
constexpr int kExitCurtailment = 3;
constexpr int kExitIo = 4;

void apply_kernel_choice(const std::string& choice) {
  if (choice == "auto") {
    drsim::kernels::select_auto();
  } else if (choice == "scalar") {
    drsim::kernels::select(drsim::kernels::Backend::Scalar);
  } else if (choice == "avx2") {
    drsim::kernels::select(drsim::kernels::Backend::Avx2);
  } else {
    throw drsim::ValidationError("unknown kernels choice '" + choice + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retail demand-response day simulator: real-time pricing against "
               "schedulable household load and vehicle batteries"};
  app.require_subcommand(1);

  auto* print_cmd = app.add_subcommand("print-default", "Write the built-in scenario as JSON");

  auto* sim = app.add_subcommand("simulate", "Run Monte Carlo trials and write reports");
  std::string scenario_path;
  std::string mode = "both";
  std::string out_dir = "out";
  std::string kernel_choice = "auto";
  int trials = -1;
  std::uint64_t seed = 0;
  int max_rounds = -1;
  double epsilon = -1;
  int threads = 1;
  sim->add_option("--scenario", scenario_path, "Scenario JSON file (omit for the built-in default)");
  sim->add_option("--trials", trials, "Monte Carlo trial count override");
  auto* seed_opt = sim->add_option("--seed", seed, "Random seed override");
  sim->add_option("--mode", mode, "both | baseline | rtp-v2g | rtp-only")
      ->check(CLI::IsMember({"both", "baseline", "rtp-v2g", "rtp-only"}));
  sim->add_option("--out-dir", out_dir, "Directory for loads.csv, stats.csv, summary.json");
  sim->add_option("--max-rounds", max_rounds, "Round cap override");
  sim->add_option("--epsilon", epsilon, "Convergence tolerance override");
  sim->add_option("--threads", threads, "Worker threads across trials")
      ->check(CLI::PositiveNumber);
  sim->add_option("--kernels", kernel_choice, "auto | scalar | avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*print_cmd) {
      std::cout << drsim::default_scenario().to_json().dump(2) << '\n';
      return 0;
    }

    apply_kernel_choice(kernel_choice);
    drsim::Scenario s = scenario_path.empty() ? drsim::default_scenario()
                                              : drsim::load_scenario(scenario_path);
    if (trials >= 0) s.trials = trials;
    if (seed_opt->count() > 0) s.seed = seed;
    if (max_rounds >= 0) s.max_rounds = max_rounds;
    if (epsilon >= 0) s.epsilon = epsilon;
    s.validate();

    const drsim::RunOutput out = drsim::execute_run(s, mode, threads);
    drsim::emit_outputs(out, out_dir);

    const auto& base = out.baseline;
    std::cout << "trials " << base.trials << ", mode " << mode << '\n';
    std::cout << "baseline:  peak " << drsim::format_double(base.mean.peak_kw) << " kW, payments "
              << drsim::format_double(base.mean.payments) << '\n';
    if (out.optimized) {
      const auto& opt = *out.optimized;
      std::cout << "optimized: peak " << drsim::format_double(opt.mean.peak_kw)
                << " kW, payments " << drsim::format_double(opt.mean.payments)
                << ", convergence rate " << drsim::format_double(opt.convergence_rate) << '\n';
    }
    std::cout << "outputs in " << out_dir << '\n';
    return 0;
  } catch (const drsim::CurtailmentRequired& e) {
    std::cerr << "curtailment: " << e.what() << '\n';
    return kExitCurtailment;
  } catch (const drsim::ParseError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const drsim::ValidationError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitConfig;
  } catch (const drsim::IoError& e) {
    std::cerr << "io: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
