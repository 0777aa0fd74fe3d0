#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

#include "geocbf/checks.hpp"
#include "geocbf/errors.hpp"
#include "geocbf/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kCheckFailed = 1, kConfigError = 2, kDiverged = 3, kCbfViolated = 4 };

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw geocbf::ConfigError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw geocbf::ConfigError("--values is empty");
  return out;
}

int do_run(const std::string& config_path, const std::optional<std::string>& filter,
           bool svg, const std::optional<std::string>& output_dir) {
  geocbf::ScenarioConfig config = geocbf::load_config(config_path);
  if (filter) config.filter = geocbf::parse_filter_mode(*filter);
  config.validate();

  const geocbf::RunResult result = geocbf::run_scenario(config);
  const auto dir = geocbf::resolve_output_dir(output_dir, config);
  geocbf::OutputOptions opts{true, svg};
  geocbf::write_run_outputs(result, config, dir, opts);

  const auto& r = result.report;
  std::printf("system=%s filter=%s min_h=%.6g min_h0=%.6g max_torque=%.6g active=%.3f\n",
              r.system.c_str(), r.filter.c_str(), r.min_h, r.min_h0, r.max_torque_norm,
              r.constraint_active_fraction);
  std::printf("outputs written to %s\n", dir.string().c_str());
  if (r.divergence_flag) {
    std::fprintf(stderr, "divergence at t=%.6g\n", r.divergence_time.value_or(0.0));
    return kDiverged;
  }
  return kOk;
}

int do_check(const std::optional<std::string>& module, bool quick,
             const std::optional<std::string>& mutate, std::uint64_t seed) {
  geocbf::checks::CheckOptions opts;
  opts.quick = quick;
  opts.module = module;
  opts.seed = seed;
  if (mutate) {
    if (*mutate == "connection") opts.mutation = geocbf::checks::Mutation::ConnectionSign;
    else if (*mutate == "dh0") opts.mutation = geocbf::checks::Mutation::DifferentialSign;
    else throw geocbf::ConfigError("unknown mutation '" + *mutate + "'");
  }
  const auto results = geocbf::checks::run_checks(opts);
  std::cout << geocbf::checks::format_table(results);
  int failed = 0;
  for (const auto& r : results) {
    if (!r.pass) {
      ++failed;
      std::cerr << "FAILED: " << r.module << "/" << r.name << ": " << r.detail << '\n';
    }
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kOk : kCheckFailed;
}

int do_sweep(const std::string& config_path, const std::string& param,
             const std::string& values, const std::optional<std::string>& output_dir,
             bool svg) {
  const geocbf::ScenarioConfig config = geocbf::load_config(config_path);
  const auto vals = parse_values(values);
  geocbf::ScenarioConfig probe = config;
  geocbf::apply_sweep_value(probe, param, vals.front());

  const auto dir = geocbf::resolve_output_dir(output_dir, config);
  const auto rows = geocbf::run_sweep(config, param, vals, dir, {true, svg});
  const std::string summary = geocbf::sweep_summary_csv(rows);
  geocbf::write_file_atomic(dir / "sweep_summary.csv", summary);
  std::cout << summary;
  int code = kOk;
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      std::cerr << param << "=" << row.value << ": " << row.error << '\n';
      code = kCbfViolated;
    } else if (row.report && row.report->divergence_flag && code == kOk) {
      code = kDiverged;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric backstepping control barrier functions: simulation and checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> filter, output_dir, module, mutate;
  bool csv = false, svg = false, quick = false;
  std::uint64_t seed = geocbf::checks::CheckOptions{}.seed;
  std::string param, values;

  auto* run = app.add_subcommand("run", "Simulate one scenario");
  run->add_option("--config", config_path, "Scenario file")->required();
  run->add_option("--filter", filter, "none, qp or hs (overrides the config)");
  run->add_flag("--csv", csv, "Write trajectory.csv (always on)");
  run->add_flag("--svg", svg, "Write SVG plots");
  run->add_option("--output-dir", output_dir, "Output directory");

  auto* check = app.add_subcommand("check", "Run the invariant suites");
  check->add_option("--module", module, "Restrict to one module");
  check->add_flag("--quick", quick, "Use about a tenth of the samples");
  check->add_option("--mutate", mutate, "Inject a sign error: connection or dh0");
  check->add_option("--seed", seed, "Random seed");

  auto* sweep = app.add_subcommand("sweep", "Run one scenario per parameter value");
  sweep->add_option("--config", config_path, "Scenario file")->required();
  sweep->add_option("--param", param, "epsilon, delta, alpha-gain or theta-safe")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--output-dir", output_dir, "Output directory");
  sweep->add_flag("--svg", svg, "Write SVG plots per run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return do_run(config_path, filter, svg, output_dir);
    if (*check) return do_check(module, quick, mutate, seed);
    return do_sweep(config_path, param, values, output_dir, svg);
  } catch (const geocbf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const geocbf::Divergence& e) {
    std::cerr << "divergence at t=" << e.time() << '\n';
    return kDiverged;
  } catch (const geocbf::CbfConditionViolated& e) {
    std::cerr << "CBF condition violated: " << e.what() << '\n';
    return kCbfViolated;
  } catch (const geocbf::OutsideDomain& e) {
    std::cerr << "outside barrier domain: " << e.what() << '\n';
    return kCbfViolated;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kCheckFailed;
  }
}
