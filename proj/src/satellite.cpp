#include "geocbf/satellite.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geocbf::satellite {

namespace {

const Eigen::Vector3d kE3 = Eigen::Vector3d::UnitZ();

}  // namespace

void SatelliteParams::validate() const {
  if (!(inertia.array() > 0.0).all() || !inertia.allFinite())
    throw std::invalid_argument("inertia entries must be positive");
  if (inertia.x() != inertia.y())
    throw std::invalid_argument("satellite requires J1 == J2");
  if (!(theta_safe > 0.0 && theta_safe < std::numbers::pi))
    throw std::invalid_argument("theta_safe must lie in (0, pi)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(alpha.gain > 0.0)) throw std::invalid_argument("alpha gain must be positive");
  if (!(kp > 0.0) || !(kd > 0.0)) throw std::invalid_argument("PD gains must be positive");
  if (std::abs(reference.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("reference direction must be a unit vector");
}

Eigen::Vector3d SatelliteParams::direction(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
          std::cos(polar)};
}

double heat_shield_h0(const Eigen::Matrix3d& R, double theta_safe) {
  return R(2, 2) - std::cos(theta_safe);
}

Eigen::Vector3d heat_shield_differential(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d gamma = R.transpose() * kE3;
  return kE3.cross(gamma);
}

ConfigSafetySpec heat_shield_constraint(double theta_safe) {
  ConfigSafetySpec spec;
  spec.value = [theta_safe](const Point& q) {
    return heat_shield_h0(q, theta_safe);
  };
  spec.differential = [](const Point& q) {
    return Covector(heat_shield_differential(q));
  };
  // Gamma = R^T e3 moves as Gamma' = Gamma x v along R exp(t hat(v)).
  spec.differential_rate = [](const Point& q, const Tangent& v) {
    const Eigen::Matrix3d R = q;
    const Eigen::Vector3d gamma = R.transpose() * kE3;
    return Covector(kE3.cross(gamma.cross(Eigen::Vector3d(v))));
  };
  return spec;
}

SMCS satellite_smcs_on(ManifoldPtr manifold, const Eigen::MatrixXd& rows) {
  return SMCS::with_constant_codistribution(std::move(manifold), Potential::zero(3),
                                            rows);
}

SatelliteSystem satellite_smcs(const SatelliteParams& params) {
  params.validate();
  auto manifold = std::make_shared<const so3::RigidBodySO3>(
      Eigen::Matrix3d(params.inertia.asDiagonal()));
  Eigen::MatrixXd rows(2, 3);
  rows << 1.0, 0.0, 0.0,
          0.0, 1.0, 0.0;
  SMCS smcs = satellite_smcs_on(manifold, rows);
  return {std::move(manifold), std::move(smcs)};
}

BacksteppingCBF satellite_cbf(const SatelliteParams& params, ManifoldPtr manifold) {
  params.validate();
  return BacksteppingCBF::make(std::move(manifold),
                               heat_shield_constraint(params.theta_safe),
                               params.epsilon, params.alpha, params.delta);
}

Eigen::Vector2d nominal_pd(const SatelliteParams& params, const MechState& st) {
  const Eigen::Matrix3d R = st.q;
  const Eigen::Vector3d gamma = R.transpose() * kE3;
  const Eigen::Vector3d err = gamma.cross(params.reference);
  return {-params.kp * err.x() - params.kd * st.v(0),
          -params.kp * err.y() - params.kd * st.v(1)};
}

}  // namespace geocbf::satellite
