#pragma once

#include <Eigen/Dense>
#include <memory>

#include "geocbf/mechanics.hpp"

namespace geocbf::double_integrator {

/// Point mass in R^n avoiding a spherical obstacle, fully actuated, with an
/// optional uniform gravity field V(x) = -mass * gravity . x.
struct DoubleIntegratorParams {
  double mass = 1.0;
  Eigen::Vector3d gravity = Eigen::Vector3d::Zero();
  Eigen::Vector3d obstacle_center{2.0, 0.0, 0.0};
  double obstacle_radius = 0.8;
  Eigen::Vector3d goal{4.0, 0.3, 0.0};
  double epsilon = 0.5;
  double delta = 0.1;
  AlphaSpec alpha = AlphaSpec::linear(1.0);
  double kp = 4.0;
  double kd = 2.0;

  void validate() const;
};

/// h0(x) = |x - c|^2 - r^2.
ConfigSafetySpec obstacle_constraint(const Eigen::Vector3d& center, double radius);

Potential uniform_gravity(double mass, const Eigen::Vector3d& gravity);

struct DoubleIntegratorSystem {
  std::shared_ptr<const EuclideanSpace> manifold;
  SMCS smcs;
};

DoubleIntegratorSystem double_integrator_smcs(const DoubleIntegratorParams& params);

BacksteppingCBF double_integrator_cbf(const DoubleIntegratorParams& params,
                                      ManifoldPtr manifold);

/// PD toward the goal with gravity compensation.
Eigen::Vector3d nominal_pd(const DoubleIntegratorParams& params, const MechState& st);

}  // namespace geocbf::double_integrator
