#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geocbf::checks {

enum class Mutation { None, ConnectionSign, DifferentialSign };

struct CheckOptions {
  bool quick = false;
  std::uint64_t seed = 20240917;
  std::optional<std::string> module;
  Mutation mutation = Mutation::None;
};

struct CheckResult {
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

const std::vector<std::string>& module_names();

/// Runs the invariant suites (all modules, or options.module). Exceptions in
/// a check are reported as failures.
std::vector<CheckResult> run_checks(const CheckOptions& options);

std::string format_table(const std::vector<CheckResult>& results);

}  // namespace geocbf::checks
