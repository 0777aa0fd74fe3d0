#pragma once

#include <Eigen/Dense>

#include "geocbf/manifold.hpp"

namespace geocbf::so3 {

/// Skew matrix with hat(w) x = w.cross(x).
Eigen::Matrix3d hat(const Eigen::Vector3d& w);
/// Inverse of hat; throws std::invalid_argument if S is not skew to 1e-12.
Eigen::Vector3d vee(const Eigen::Matrix3d& S);

/// Rodrigues formula; series expansion for |w| < 1e-4.
Eigen::Matrix3d exp(const Eigen::Vector3d& w);
/// Principal logarithm. Throws std::domain_error when the rotation angle is
/// within 1e-6 of pi (branch ambiguity).
Eigen::Vector3d log(const Eigen::Matrix3d& R);

/// For R(s) = R0 exp(hat(theta(s))) with body velocity w, returns d theta/ds.
Eigen::Vector3d dexp_inv_left(const Eigen::Vector3d& theta,
                              const Eigen::Vector3d& w);

/// max |R^T R - I| plus |det R - 1|.
double orthonormality_defect(const Eigen::Matrix3d& R);
/// Closest rotation in the Frobenius norm (polar factor).
Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& M);

inline constexpr double kReprojectThreshold = 1e-9;

/**
 * SO(3) with the left-invariant kinetic-energy metric <w, n> = w^T J n.
 *
 * Tangent coordinates are body angular velocities. The connection is the
 * Levi-Civita connection of the metric,
 *   B(u, v) = 1/2 (u x v + J^{-1}(u x J v + v x J u)),
 * whose geodesics follow Euler's free rigid-body equation J w' = J w x w.
 */
class RigidBodySO3 final : public Manifold {
public:
  explicit RigidBodySO3(const Eigen::Matrix3d& inertia);

  std::string name() const override { return "SO(3)"; }
  int dim() const override { return 3; }
  Eigen::MatrixXd metric(const Point&) const override { return inertia_; }
  bool metric_is_constant() const override { return true; }
  Tangent connection(const Point& p, const Tangent& u,
                     const Tangent& v) const override;
  Tangent frame_bracket(const Tangent& u, const Tangent& v) const override;
  Point retract(const Point& p, const Tangent& u, double t) const override;
  Tangent retraction_rate(const Tangent& theta, const Tangent& v) const override;
  double point_defect(const Point& p) const override;
  Point reproject(const Point& p) const override;
  void validate_point(const Point& p) const override;

  const Eigen::Matrix3d& inertia() const { return inertia_; }

private:
  Eigen::Matrix3d inertia_;
  Eigen::Matrix3d inertia_inv_;
};

}  // namespace geocbf::so3
