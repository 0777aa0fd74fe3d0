#pragma once

#include <Eigen/Dense>
#include <memory>

#include "geocbf/mechanics.hpp"
#include "geocbf/so3.hpp"

namespace geocbf::satellite {

/// Axisymmetric rigid body (J1 == J2) torqued about body e1 and e2, required
/// to keep body e3 within theta_safe of spatial e3.
struct SatelliteParams {
  Eigen::Vector3d inertia{1.0, 1.0, 2.0};
  double theta_safe = 0.7853981633974483;
  double epsilon = 0.5;
  double delta = 0.1;
  AlphaSpec alpha = AlphaSpec::linear(1.0);
  double kp = 4.0;
  double kd = 2.0;
  /// Target for the reduced attitude Gamma = R^T e3 (unit vector).
  Eigen::Vector3d reference = direction(0.7853981633974483 + 0.5, 0.0);

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;

  static Eigen::Vector3d direction(double polar, double azimuth);
};

double heat_shield_h0(const Eigen::Matrix3d& R, double theta_safe);
/// Body-frame differential: dh0(xi) = e3 . (R hat(xi) e3) = (e3 x R^T e3) . xi.
Eigen::Vector3d heat_shield_differential(const Eigen::Matrix3d& R);

ConfigSafetySpec heat_shield_constraint(double theta_safe);

struct SatelliteSystem {
  std::shared_ptr<const so3::RigidBodySO3> manifold;
  SMCS smcs;
};

/// Default actuation: rows e1^T, e2^T.
SatelliteSystem satellite_smcs(const SatelliteParams& params);

/// Satellite dynamics on a supplied manifold and actuation rows (m x 3).
SMCS satellite_smcs_on(ManifoldPtr manifold, const Eigen::MatrixXd& rows);

BacksteppingCBF satellite_cbf(const SatelliteParams& params, ManifoldPtr manifold);

/// Geometric PD on the reduced attitude; returns torques about e1, e2.
Eigen::Vector2d nominal_pd(const SatelliteParams& params, const MechState& st);

}  // namespace geocbf::satellite
