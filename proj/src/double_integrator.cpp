#include "geocbf/double_integrator.hpp"

#include <stdexcept>

namespace geocbf::double_integrator {

void DoubleIntegratorParams::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("mass must be positive");
  if (!(obstacle_radius > 0.0))
    throw std::invalid_argument("obstacle radius must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  if (!(alpha.gain > 0.0)) throw std::invalid_argument("alpha gain must be positive");
  if (!(kp > 0.0) || !(kd > 0.0)) throw std::invalid_argument("PD gains must be positive");
  if (!gravity.allFinite() || !goal.allFinite() || !obstacle_center.allFinite())
    throw std::invalid_argument("vectors must be finite");
}

ConfigSafetySpec obstacle_constraint(const Eigen::Vector3d& center, double radius) {
  ConfigSafetySpec spec;
  spec.value = [center, radius](const Point& q) {
    return (Eigen::Vector3d(q) - center).squaredNorm() - radius * radius;
  };
  spec.differential = [center](const Point& q) {
    return Covector(2.0 * (Eigen::Vector3d(q) - center));
  };
  spec.differential_rate = [](const Point&, const Tangent& v) {
    return Covector(2.0 * v);
  };
  return spec;
}

Potential uniform_gravity(double mass, const Eigen::Vector3d& gravity) {
  return {[mass, gravity](const Point& q) {
            return -mass * gravity.dot(Eigen::Vector3d(q));
          },
          [mass, gravity](const Point&) { return Covector(-mass * gravity); }};
}

DoubleIntegratorSystem double_integrator_smcs(const DoubleIntegratorParams& params) {
  params.validate();
  auto manifold = std::make_shared<const EuclideanSpace>(
      Eigen::MatrixXd(params.mass * Eigen::MatrixXd::Identity(3, 3)));
  SMCS smcs = SMCS::with_constant_codistribution(
      manifold, uniform_gravity(params.mass, params.gravity),
      Eigen::MatrixXd::Identity(3, 3));
  return {std::move(manifold), std::move(smcs)};
}

BacksteppingCBF double_integrator_cbf(const DoubleIntegratorParams& params,
                                      ManifoldPtr manifold) {
  params.validate();
  return BacksteppingCBF::make(
      std::move(manifold),
      obstacle_constraint(params.obstacle_center, params.obstacle_radius),
      params.epsilon, params.alpha, params.delta);
}

Eigen::Vector3d nominal_pd(const DoubleIntegratorParams& params, const MechState& st) {
  const Eigen::Vector3d x = st.q;
  return -params.mass * params.gravity - params.kp * (x - params.goal) -
         params.kd * Eigen::Vector3d(st.v);
}

}  // namespace geocbf::double_integrator
