#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>

namespace geocbf {

/// Opaque point representation: an n x 1 coordinate column for R^n, a 3 x 3
/// rotation matrix for SO(3).
using Point = Eigen::MatrixXd;
/// Tangent vector components in the manifold's global frame.
using Tangent = Eigen::VectorXd;
/// Cotangent components in the dual of the global frame.
using Covector = Eigen::VectorXd;

/**
 * Riemannian manifold presented in a single global trivialization.
 *
 * Tangent vectors are length-dim() arrays in a fixed global frame (standard
 * basis on R^n, body/left-trivialized coordinates on a Lie group). The
 * Levi-Civita connection is represented by the bilinear map B(p; u, v): for
 * frame-coordinate functions Y, the covariant derivative is
 *   (nabla_u Y)(p) = DY(p)[u] + B(p; u, Y(p)),
 * where DY(p)[u] differentiates the coordinates of Y along retract(p, u, t).
 *
 * Instances are immutable after construction.
 */
class Manifold {
public:
  virtual ~Manifold() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;

  /// Symmetric positive-definite Gram matrix of the frame at p.
  virtual Eigen::MatrixXd metric(const Point& p) const = 0;
  virtual bool metric_is_constant() const { return false; }

  virtual Tangent connection(const Point& p, const Tangent& u,
                             const Tangent& v) const = 0;

  /// Coordinates of the Lie bracket of the constant frame fields u and v.
  /// B(p; u, v) - B(p; v, u) must equal this for a torsion-free connection.
  virtual Tangent frame_bracket(const Tangent& u, const Tangent& v) const;

  /// Point reached from p by flowing along u for time t; retract(p, u, 0) == p.
  virtual Point retract(const Point& p, const Tangent& u, double t) const = 0;

  /// Given p(s) = retract(p0, theta(s), 1) and the frame velocity v of p(s),
  /// returns d theta / ds. Identity for flat retractions.
  virtual Tangent retraction_rate(const Tangent& theta, const Tangent& v) const;

  /// Size of the violation of the point-representation constraints.
  virtual double point_defect(const Point& p) const = 0;
  /// Nearest valid point; identity when no constraints are violated.
  virtual Point reproject(const Point& p) const { return p; }

  /// Throws DimensionMismatch or std::invalid_argument on malformed points.
  virtual void validate_point(const Point& p) const = 0;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// R^n with a constant metric, straight-line retraction and B == 0.
class EuclideanSpace final : public Manifold {
public:
  explicit EuclideanSpace(int n);
  explicit EuclideanSpace(Eigen::MatrixXd metric);

  std::string name() const override { return "R^" + std::to_string(dim_); }
  int dim() const override { return dim_; }
  Eigen::MatrixXd metric(const Point&) const override { return metric_; }
  bool metric_is_constant() const override { return true; }
  Tangent connection(const Point& p, const Tangent& u,
                     const Tangent& v) const override;
  Point retract(const Point& p, const Tangent& u, double t) const override;
  double point_defect(const Point&) const override { return 0.0; }
  void validate_point(const Point& p) const override;

  static Point point(const Eigen::VectorXd& x) { return x; }

private:
  int dim_;
  Eigen::MatrixXd metric_;
};

/**
 * Vector field on Q in frame coordinates.
 *
 * `derivative(p, v)` is the derivative of the coordinate function of the field
 * along retract(p, v, t) at t = 0. When absent, central differences along the
 * retraction with step 1e-6 are used.
 */
struct VectorField {
  std::function<Tangent(const Point&)> eval;
  std::function<Tangent(const Point&, const Tangent&)> derivative;

  static VectorField constant(const Tangent& c);
};

inline constexpr double kFieldDifferenceStep = 1e-6;

Tangent directional_derivative(const Manifold& m, const VectorField& k,
                               const Point& p, const Tangent& v);

/// Index lowering: M(p) v.
Covector flat(const Manifold& m, const Point& p, const Tangent& v);
/// Index raising: M(p)^{-1} w.
Tangent sharp(const Manifold& m, const Point& p, const Covector& w);
Tangent riemannian_grad(const Manifold& m, const Point& p, const Covector& dh);
double inner(const Manifold& m, const Point& p, const Tangent& u,
             const Tangent& v);

Tangent covariant_derivative_of_field(const Manifold& m, const Point& p,
                                      const Tangent& v, const VectorField& k);

/**
 * (nabla_v P)(e) for a (1,1)-tensor P given by its frame matrix at p.
 *
 * Equals B(p; v, P e) - P B(p; v, e) + (dP[v]) e, where `proj_rate` is the
 * derivative of the frame matrix of P along v (zero for constant splits).
 * Throws std::invalid_argument if P is not idempotent to 1e-10.
 */
Tangent covariant_derivative_of_projection(const Manifold& m, const Point& p,
                                           const Tangent& v,
                                           const Eigen::MatrixXd& proj,
                                           const Tangent& e);
Tangent covariant_derivative_of_projection(const Manifold& m, const Point& p,
                                           const Tangent& v,
                                           const Eigen::MatrixXd& proj,
                                           const Tangent& e,
                                           const Eigen::MatrixXd& proj_rate);

}  // namespace geocbf
