#pragma once

#include <Eigen/Dense>

#include "geocbf/manifold.hpp"
#include "geocbf/scalar_filters.hpp"

namespace geocbf {

/**
 * Pointwise data of a metric control-affine system f + G u, pushed through dh.
 *
 *   dhf    = dh_p f_p
 *   dhG    = row of dh_p G_p in fiber coordinates (length m)
 *   W      = fiber metric on the input space at p (m x m, SPD)
 *   h      = h(p)
 *   u_des  = desired input at p
 */
struct ControlAffinePointData {
  double dhf = 0.0;
  Eigen::VectorXd dhG;
  Eigen::MatrixXd W;
  double h = 0.0;
  Eigen::VectorXd u_des;

  /// Throws on non-finite entries, size mismatch or non-SPD W.
  void validate() const;
};

struct FilterOutput {
  Eigen::VectorXd u;
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  bool active = false;
};

/// a = alpha(h) + dhf + dhG . u_des,  b = dhG W^{-1} dhG^T.
FilterGainPair compute_a_b(const ControlAffinePointData& d, const AlphaSpec& alpha);

/// Closed-form CBF-QP: argmin |u - u_des|_W^2 s.t. dhf + dhG u >= -alpha(h).
FilterOutput qp_filter(const ControlAffinePointData& d, const AlphaSpec& alpha);

/// Smooth half-Sontag filter u_des + lambda_hs(a, b) W^{-1} dhG^T.
FilterOutput hs_filter(const ControlAffinePointData& d, const AlphaSpec& alpha);

enum class FilterKind { Qp, HalfSontag };

FilterOutput apply_filter(FilterKind kind, const ControlAffinePointData& d,
                          const AlphaSpec& alpha);

/// Barrier slack dhf + dhG u + alpha(h); nonnegative iff u satisfies the
/// constraint.
double constraint_slack(const ControlAffinePointData& d, const AlphaSpec& alpha,
                        const Eigen::VectorXd& u);

/**
 * Safety filter for the single integrator q' = u on Q (inputs are tangent
 * vectors, fiber metric = the Riemannian metric), plus a gradient boost:
 *   kappa = filter(kappa_des) + delta * grad h0.
 *
 * Throws OutsideDomain when h0 <= 0 and dh0 == 0.
 */
Tangent single_integrator_filter(const Manifold& m, const Point& p,
                                 const Covector& dh0, double h0,
                                 const Tangent& kappa_des, const AlphaSpec& alpha,
                                 double delta, bool smooth);

}  // namespace geocbf
