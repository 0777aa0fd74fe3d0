#include "geocbf/so3.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "geocbf/errors.hpp"

namespace geocbf::so3 {

namespace {

Eigen::Vector3d as3(const Eigen::VectorXd& x, const char* what) {
  if (x.size() != 3)
    throw DimensionMismatch(std::string(what) + ": expected a 3-vector");
  return x;
}

}  // namespace

Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
  Eigen::Matrix3d S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& S) {
  if ((S + S.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("vee: matrix is not skew-symmetric");
  return {S(2, 1), S(0, 2), S(1, 0)};
}

Eigen::Matrix3d exp(const Eigen::Vector3d& w) {
  const double th2 = w.squaredNorm();
  const double th = std::sqrt(th2);
  double A, B;
  if (th < 1e-4) {
    A = 1.0 - th2 / 6.0 + th2 * th2 / 120.0;
    B = 0.5 - th2 / 24.0 + th2 * th2 / 720.0;
  } else {
    A = std::sin(th) / th;
    B = (1.0 - std::cos(th)) / th2;
  }
  const Eigen::Matrix3d W = hat(w);
  return Eigen::Matrix3d::Identity() + A * W + B * W * W;
}

Eigen::Vector3d log(const Eigen::Matrix3d& R) {
  const Eigen::Vector3d axis_sin{R(2, 1) - R(1, 2), R(0, 2) - R(2, 0),
                                 R(1, 0) - R(0, 1)};  // 2 sin(th) n
  const double s = 0.5 * axis_sin.norm();
  const double c = 0.5 * (R.trace() - 1.0);
  const double th = std::atan2(s, c);
  if (th > std::numbers::pi - 1e-6)
    throw std::domain_error("log_so3: rotation angle too close to pi");
  double k;
  if (th < 1e-4) {
    k = 0.5 * (1.0 + th * th / 6.0 + 7.0 * th * th * th * th / 360.0);
  } else {
    k = th / (2.0 * std::sin(th));
  }
  return k * axis_sin;
}

Eigen::Vector3d dexp_inv_left(const Eigen::Vector3d& theta,
                              const Eigen::Vector3d& w) {
  const double th2 = theta.squaredNorm();
  double c;
  if (th2 < 1e-6) {
    c = 1.0 / 12.0 + th2 / 720.0 + th2 * th2 / 30240.0;
  } else {
    const double th = std::sqrt(th2);
    c = (1.0 - 0.5 * th * std::cos(0.5 * th) / std::sin(0.5 * th)) / th2;
  }
  const Eigen::Vector3d tw = theta.cross(w);
  return w + 0.5 * tw + c * theta.cross(tw);
}

double orthonormality_defect(const Eigen::Matrix3d& R) {
  return (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() +
         std::abs(R.determinant() - 1.0);
}

Eigen::Matrix3d project_to_rotation(const Eigen::Matrix3d& M) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) D(2, 2) = -1.0;
  return svd.matrixU() * D * svd.matrixV().transpose();
}

RigidBodySO3::RigidBodySO3(const Eigen::Matrix3d& inertia) : inertia_(inertia) {
  if ((inertia_ - inertia_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("inertia must be symmetric");
  Eigen::LLT<Eigen::Matrix3d> llt(inertia_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("inertia must be positive definite");
  inertia_inv_ = llt.solve(Eigen::Matrix3d::Identity());
}

Tangent RigidBodySO3::connection(const Point&, const Tangent& u_,
                                 const Tangent& v_) const {
  const Eigen::Vector3d u = as3(u_, "connection u");
  const Eigen::Vector3d v = as3(v_, "connection v");
  const Eigen::Vector3d Ju = inertia_ * u;
  const Eigen::Vector3d Jv = inertia_ * v;
  return 0.5 * (u.cross(v) + inertia_inv_ * (u.cross(Jv) + v.cross(Ju)));
}

Tangent RigidBodySO3::frame_bracket(const Tangent& u, const Tangent& v) const {
  return as3(u, "bracket u").cross(as3(v, "bracket v"));
}

Point RigidBodySO3::retract(const Point& p, const Tangent& u, double t) const {
  validate_point(p);
  const Eigen::Vector3d w = as3(u, "retract direction");
  if (t == 0.0) return p;
  const Eigen::Matrix3d R = p;
  return Eigen::MatrixXd(R * exp(t * w));
}

Tangent RigidBodySO3::retraction_rate(const Tangent& theta,
                                      const Tangent& v) const {
  return dexp_inv_left(as3(theta, "theta"), as3(v, "velocity"));
}

double RigidBodySO3::point_defect(const Point& p) const {
  validate_point(p);
  return orthonormality_defect(p);
}

Point RigidBodySO3::reproject(const Point& p) const {
  validate_point(p);
  if (orthonormality_defect(p) <= kReprojectThreshold) return p;
  return Eigen::MatrixXd(project_to_rotation(p));
}

void RigidBodySO3::validate_point(const Point& p) const {
  if (p.rows() != 3 || p.cols() != 3)
    throw DimensionMismatch("SO(3) point must be a 3x3 matrix");
  if (!p.allFinite()) throw std::invalid_argument("rotation has non-finite entries");
  // Loose bound: integration drift is reprojected long before this.
  if (orthonormality_defect(p) > 1e-6) throw std::invalid_argument("matrix is not a rotation");
}

}  // namespace geocbf::so3
