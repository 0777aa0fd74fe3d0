#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "geocbf/manifold.hpp"
#include "geocbf/safety_filters.hpp"
#include "geocbf/scalar_filters.hpp"

namespace geocbf {

struct Potential {
  std::function<double(const Point&)> value;
  std::function<Covector(const Point&)> differential;

  static Potential zero(int n);
};

/**
 * Simple mechanical control system (Q, g, V, F).
 *
 * The kinetic metric is the manifold's metric. `input_codistribution(q)`
 * returns an m x n matrix whose rows span F_q in frame cotangent coordinates.
 * Forces are expressed either as covectors or as coefficient vectors tau with
 * F = rows^T tau.
 */
struct SMCS {
  ManifoldPtr manifold;
  Potential potential;
  std::function<Eigen::MatrixXd(const Point&)> input_codistribution;

  static SMCS with_constant_codistribution(ManifoldPtr manifold, Potential potential,
                                           Eigen::MatrixXd rows);

  int config_dim() const { return manifold->dim(); }
  int input_dim(const Point& q) const {
    return static_cast<int>(input_codistribution(q).rows());
  }
};

struct MechState {
  Point q;
  Tangent v;
};

/// g-orthogonal split T_qQ = A_q + U_q with U_q = annihilator of F_q.
struct ActuationSplit {
  Eigen::MatrixXd proj_A;
  Eigen::MatrixXd proj_U;
  /// Orthonormal (Euclidean) basis of U_q as columns; n x (n - m).
  Eigen::MatrixXd unactuated_basis;
};

/// Throws std::invalid_argument when the codistribution is rank deficient.
ActuationSplit build_actuation_split(const SMCS& s, const Point& q);

Covector force_from_coefficients(const SMCS& s, const Point& q,
                                 const Eigen::VectorXd& tau);
/// Throws std::invalid_argument if F leaves span(F_q) by more than 1e-10.
Eigen::VectorXd coefficients_from_force(const SMCS& s, const Point& q,
                                        const Covector& F);

/// Configuration safety specification h0 on Q with its differential.
/// `differential_rate(q, v)`, when present, is the derivative of the
/// coordinates of dh0 along retract(q, v, t).
struct ConfigSafetySpec {
  std::function<double(const Point&)> value;
  std::function<Covector(const Point&)> differential;
  std::function<Covector(const Point&, const Tangent&)> differential_rate;
};

/**
 * Safe velocity field kappa = kappa_hs(q) + delta grad h0 from the smooth
 * single-integrator filter with zero desired velocity. The derivative is
 * analytic when the metric is constant and h0 supplies differential_rate.
 */
VectorField safe_velocity_field(ManifoldPtr m, ConfigSafetySpec h0,
                                AlphaSpec alpha, double delta);

/// h(v_q) = h0(q) - eps/2 |(v_q - kappa_q)^A|^2.
struct BacksteppingCBF {
  ConfigSafetySpec h0;
  VectorField kappa;
  double epsilon = 0.5;
  AlphaSpec alpha;
  double delta = 0.1;
  /// D0 = {q : h0(q) > -domain_margin}.
  double domain_margin = 1.0;

  static BacksteppingCBF make(ManifoldPtr m, ConfigSafetySpec h0, double epsilon,
                              AlphaSpec alpha, double delta,
                              double domain_margin = 1.0);
};

/// Throws OutsideDomain when q is not in D0.
void require_in_domain(const BacksteppingCBF& c, const Point& q);

double backstepping_h(const BacksteppingCBF& c, const SMCS& s, const MechState& st);

/// hdot split as drift + <F; force_gain> (force_gain = -eps e^A).
struct HdotTerms {
  double drift;
  Tangent force_gain;
  Tangent error;
  Tangent actuated_error;
};

HdotTerms hdot_terms(const BacksteppingCBF& c, const SMCS& s, const MechState& st);

/// Time derivative of h along the equations of motion under force F.
double hdot(const BacksteppingCBF& c, const SMCS& s, const MechState& st,
            const Covector& F);

struct UnderactuationReport {
  std::vector<bool> point_pass;
  std::vector<double> point_worst;
  double worst = 0.0;
  bool pass = true;
};

/// Checks |dh0 . u| < tol for a basis u of U_q at each sample.
UnderactuationReport check_underactuation_condition(const BacksteppingCBF& c,
                                                    const SMCS& s,
                                                    const std::vector<Point>& samples,
                                                    double tol = 1e-10);

enum class ForceCostNorm { DualMetric, EuclideanCoefficients };

struct SafeForceResult {
  Covector force;
  Eigen::VectorXd coefficients;
  FilterOutput filter;
  double h = 0.0;
  /// hdot(F) + alpha(h); nonnegative when the barrier constraint holds.
  double margin = 0.0;
};

SafeForceResult safe_force_coefficients(const BacksteppingCBF& c, const SMCS& s,
                                        const MechState& st,
                                        const Eigen::VectorXd& tau_des,
                                        FilterKind kind,
                                        ForceCostNorm norm = ForceCostNorm::DualMetric);

SafeForceResult safe_force(const BacksteppingCBF& c, const SMCS& s,
                           const MechState& st, const Covector& F_des,
                           FilterKind kind,
                           ForceCostNorm norm = ForceCostNorm::DualMetric);

/// Covector Gram matrix of the codistribution rows under g^{-1}.
Eigen::MatrixXd dual_gram(const SMCS& s, const Point& q);

}  // namespace geocbf
