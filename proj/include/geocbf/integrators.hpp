#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "geocbf/mechanics.hpp"

namespace geocbf {

/// Feedback law returning force coefficients tau (F = rows^T tau).
using ForceLaw = std::function<Eigen::VectorXd(const MechState&)>;

enum class ControllerSampling { Stage, ZeroOrderHold };

/// v' = -B(v, v) - grad V + (rows^T tau)^sharp.
Tangent acceleration(const SMCS& s, const MechState& st, const Eigen::VectorXd& tau);

/**
 * One Runge-Kutta-Munthe-Kaas RK4 step of the equations of motion.
 *
 * Stage configurations are retract(q0, theta_i, 1) with theta_i accumulated in
 * the tangent space at q0; stage velocities are mapped through the manifold's
 * retraction_rate. With Stage sampling the force law is evaluated at every
 * stage, with ZeroOrderHold only at the start of the step. Throws Divergence
 * (carrying t + dt) on non-finite results.
 */
MechState step(const SMCS& s, const MechState& st, const ForceLaw& law, double dt,
               ControllerSampling sampling = ControllerSampling::Stage,
               double t = 0.0);

/// Constant-force step.
MechState step_with_force(const SMCS& s, const MechState& st, const Eigen::VectorXd& tau,
                          double dt);

struct TrajectorySample {
  double t = 0.0;
  Point q;
  Tangent v;
  Eigen::VectorXd tau;
  double h = 0.0;
  double h0 = 0.0;
  double hdot_margin = 0.0;
  bool filter_active = false;
};

struct TrajectoryMetadata {
  double dt = 0.0;
  std::string integrator = "rkmk4";
  std::string scenario_hash;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  TrajectoryMetadata meta;
  /// Set when integration stopped on a non-finite state.
  std::optional<double> divergence_time;
};

struct ObserverValues {
  double h = 0.0;
  double h0 = 0.0;
  double hdot_margin = 0.0;
  bool filter_active = false;
};

using Observer =
    std::function<ObserverValues(const MechState&, const Eigen::VectorXd& tau)>;

/// Number of samples produced for horizon T and step dt: floor(T/dt) + 1.
std::size_t sample_count(double dt, double T);

/**
 * Fixed-step closed-loop simulation. Records one sample per step (plus the
 * initial state); on divergence the run halts and divergence_time is set.
 */
Trajectory simulate(const SMCS& s, const ForceLaw& controller, const MechState& st0,
                    double dt, double T, const Observer& observer,
                    ControllerSampling sampling = ControllerSampling::Stage,
                    std::string scenario_hash = {});

}  // namespace geocbf
