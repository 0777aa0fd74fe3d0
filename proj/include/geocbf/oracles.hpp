#pragma once

// Independent reference computations used by the invariant suite and tests.
// Nothing in the library proper depends on this header.

#include <Eigen/Dense>
#include <functional>
#include <random>

#include "geocbf/manifold.hpp"
#include "geocbf/mechanics.hpp"
#include "geocbf/safety_filters.hpp"

namespace geocbf::oracle {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0);
/// A A^T + 0.2 I with A entries uniform in [-1, 1].
Eigen::MatrixXd random_spd(Rng& rng, int m);
/// Uniform rotation from a normalized Gaussian quaternion.
Eigen::Matrix3d random_rotation(Rng& rng);

/// Random filter data with (a, b) in P under `alpha`; about a tenth of the
/// draws have dhG = 0.
ControlAffinePointData random_affine_data(Rng& rng, int m, const AlphaSpec& alpha);

/**
 * argmin (u - u_des)^T W (u - u_des) subject to c . u >= d, by an active-set
 * step: accept u_des if feasible, otherwise solve the bordered KKT system
 *   [2W  -c] [u ]   [2W u_des]
 *   [c^T  0] [mu] = [   d    ]
 * with full-pivot LU and require mu >= 0.
 */
Eigen::VectorXd kkt_qp(const Eigen::MatrixXd& W, const Eigen::VectorXd& u_des,
                       const Eigen::VectorXd& c, double d);

/// (f(h) - f(-h)) / 2h.
double central_difference(const std::function<double(double)>& f, double h);

/// Wraps a manifold and negates its connection.
class SignFlippedConnection final : public Manifold {
public:
  explicit SignFlippedConnection(ManifoldPtr base) : base_(std::move(base)) {}

  std::string name() const override { return base_->name() + " (B sign-flipped)"; }
  int dim() const override { return base_->dim(); }
  Eigen::MatrixXd metric(const Point& p) const override { return base_->metric(p); }
  bool metric_is_constant() const override { return base_->metric_is_constant(); }
  Tangent connection(const Point& p, const Tangent& u, const Tangent& v) const override {
    return -base_->connection(p, u, v);
  }
  Tangent frame_bracket(const Tangent& u, const Tangent& v) const override {
    return base_->frame_bracket(u, v);
  }
  Point retract(const Point& p, const Tangent& u, double t) const override {
    return base_->retract(p, u, t);
  }
  Tangent retraction_rate(const Tangent& theta, const Tangent& v) const override {
    return base_->retraction_rate(theta, v);
  }
  double point_defect(const Point& p) const override { return base_->point_defect(p); }
  Point reproject(const Point& p) const override { return base_->reproject(p); }
  void validate_point(const Point& p) const override { base_->validate_point(p); }

private:
  ManifoldPtr base_;
};

/// Same h0 with its differential (and differential rate) negated.
ConfigSafetySpec flip_differential(ConfigSafetySpec spec);

/// Central difference of backstepping_h along the constant-force flow, using
/// one integrator micro-step of size `step` in each time direction.
double hdot_by_flow(const BacksteppingCBF& c, const SMCS& s, const MechState& st,
                    const Eigen::VectorXd& tau, double step = 1e-6);

}  // namespace geocbf::oracle
