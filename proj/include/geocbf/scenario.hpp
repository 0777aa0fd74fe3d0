#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "geocbf/integrators.hpp"
#include "geocbf/mechanics.hpp"

namespace geocbf {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class SystemKind { Satellite, EuclideanDoubleIntegrator };
enum class FilterMode { None, Qp, Hs };

FilterMode parse_filter_mode(std::string_view name);
std::string_view to_string(FilterMode mode);
std::string_view to_string(SystemKind kind);

/**
 * Scenario description. Text form is `key = value` lines, `#` comments,
 * optional `[section]` headers that prefix following keys with `section.`;
 * vectors are comma or whitespace separated.
 */
struct ScenarioConfig {
  SystemKind system = SystemKind::Satellite;
  // satellite
  Eigen::Vector3d inertia{1.0, 1.0, 2.0};
  double theta_safe = 0.7853981633974483;
  Eigen::Vector3d initial_attitude = Eigen::Vector3d::Zero();  // axis-angle
  Eigen::Vector3d initial_omega = Eigen::Vector3d::Zero();
  std::optional<double> reference_polar;  // default theta_safe + 0.5
  double reference_azimuth = 0.0;
  // euclidean double integrator
  double mass = 1.0;
  Eigen::Vector3d initial_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d initial_velocity = Eigen::Vector3d::Zero();
  Eigen::Vector3d goal{4.0, 0.3, 0.0};
  Eigen::Vector3d obstacle_center{2.0, 0.0, 0.0};
  double obstacle_radius = 0.8;
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  // barrier and filter
  double epsilon = 0.5;
  double delta = 0.1;
  AlphaSpec alpha = AlphaSpec::linear(1.0);
  double domain_margin = 1.0;
  FilterMode filter = FilterMode::Qp;
  ForceCostNorm cost = ForceCostNorm::DualMetric;
  ControllerSampling sampling = ControllerSampling::Stage;
  double kp = 4.0;
  double kd = 2.0;
  // run
  double dt = 1e-3;
  double T = 20.0;
  std::uint64_t seed = 0;
  std::string output_dir;

  /// Throws ConfigError.
  void validate() const;
  /// Applies one `key = value` assignment; throws ConfigError.
  void set(std::string_view key, std::string_view value);
  /// Stable textual form listing every field.
  std::string canonical() const;
  /// Hex digest of canonical().
  std::string hash() const;
  double effective_reference_polar() const;
};

ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunReport {
  double min_h = 0.0;
  double min_h0 = 0.0;
  double constraint_active_fraction = 0.0;
  double max_torque_norm = 0.0;
  bool divergence_flag = false;
  std::optional<double> divergence_time;
  double wall_time = 0.0;
  double worst_step_h_decrease = 0.0;
  std::size_t samples = 0;
  std::string system;
  std::string filter;
  std::string scenario_hash;
};

std::string report_to_json(const RunReport& report);

struct RunResult {
  Trajectory trajectory;
  RunReport report;
};

/// Builds the system from the config and simulates it. Filtered runs
/// propagate CbfConditionViolated / OutsideDomain.
RunResult run_scenario(const ScenarioConfig& config);

RunReport summarize(const Trajectory& traj, const ScenarioConfig& config,
                    double wall_time);

std::vector<std::string> trajectory_csv_columns(const Trajectory& traj);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Parses a file produced by write_trajectory_csv.
Trajectory read_trajectory_csv(std::istream& is);

std::string render_h_plot_svg(const Trajectory& traj);
/// Satellite: top view of R e3 on the unit sphere with the safe-cone circle.
std::string render_sphere_svg(const Trajectory& traj, double theta_safe);
/// Double integrator: xy path with the obstacle disc.
std::string render_path_svg(const Trajectory& traj, const Eigen::Vector3d& center,
                            double radius);

/// Write-temp-then-rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct OutputOptions {
  bool csv = true;
  bool svg = false;
};

void write_run_outputs(const RunResult& result, const ScenarioConfig& config,
                       const std::filesystem::path& dir, const OutputOptions& opts);

/// Output directory precedence: explicit, config, GEOCBF_OUTPUT_DIR, ".".
std::filesystem::path resolve_output_dir(const std::optional<std::string>& explicit_dir,
                                         const ScenarioConfig& config);

struct SweepRow {
  double value = 0.0;
  std::optional<RunReport> report;
  std::string error;
};

/// Valid parameter names: epsilon, delta, alpha-gain, theta-safe.
void apply_sweep_value(ScenarioConfig& config, std::string_view param, double value);

/// Runs one scenario per value in parallel worker threads, in input order.
std::vector<SweepRow> run_sweep(const ScenarioConfig& base, std::string_view param,
                                const std::vector<double>& values,
                                const std::optional<std::filesystem::path>& out_dir,
                                const OutputOptions& opts);

/// Columns: value,min_h0,max_torque_norm.
std::string sweep_summary_csv(const std::vector<SweepRow>& rows);

}  // namespace geocbf
