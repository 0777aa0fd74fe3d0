#include "geocbf/manifold.hpp"

#include <cmath>
#include <stdexcept>

#include "geocbf/errors.hpp"

namespace geocbf {

namespace {

void require_size(const Eigen::VectorXd& x, int n, const char* what) {
  if (x.size() != n)
    throw DimensionMismatch(std::string(what) + ": expected length " +
                            std::to_string(n) + ", got " +
                            std::to_string(x.size()));
}

void require_finite(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) throw std::invalid_argument(std::string(what) + " is not finite");
}

}  // namespace

Tangent Manifold::frame_bracket(const Tangent& u, const Tangent&) const {
  return Tangent::Zero(u.size());
}

Tangent Manifold::retraction_rate(const Tangent&, const Tangent& v) const {
  return v;
}

EuclideanSpace::EuclideanSpace(int n)
    : dim_(n), metric_(Eigen::MatrixXd::Identity(n, n)) {
  if (n <= 0) throw std::invalid_argument("dimension must be positive");
}

EuclideanSpace::EuclideanSpace(Eigen::MatrixXd metric)
    : dim_(static_cast<int>(metric.rows())), metric_(std::move(metric)) {
  if (dim_ <= 0 || metric_.cols() != dim_)
    throw DimensionMismatch("metric must be a nonempty square matrix");
  if ((metric_ - metric_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("metric must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(metric_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("metric must be positive definite");
}

Tangent EuclideanSpace::connection(const Point&, const Tangent& u,
                                   const Tangent& v) const {
  require_size(u, dim_, "connection u");
  require_size(v, dim_, "connection v");
  return Tangent::Zero(dim_);
}

Point EuclideanSpace::retract(const Point& p, const Tangent& u, double t) const {
  validate_point(p);
  require_size(u, dim_, "retract direction");
  if (t == 0.0) return p;
  return p + t * u;
}

void EuclideanSpace::validate_point(const Point& p) const {
  if (p.rows() != dim_ || p.cols() != 1)
    throw DimensionMismatch("R^" + std::to_string(dim_) +
                            " point must be a column of length " +
                            std::to_string(dim_));
}

VectorField VectorField::constant(const Tangent& c) {
  return {[c](const Point&) { return c; },
          [c](const Point&, const Tangent&) {
            return Tangent::Zero(c.size()).eval();
          }};
}

Tangent directional_derivative(const Manifold& m, const VectorField& k,
                               const Point& p, const Tangent& v) {
  require_size(v, m.dim(), "direction");
  if (k.derivative) return k.derivative(p, v);
  const double h = kFieldDifferenceStep;
  const Tangent fwd = k.eval(m.retract(p, v, h));
  const Tangent bwd = k.eval(m.retract(p, v, -h));
  return (fwd - bwd) / (2.0 * h);
}

Covector flat(const Manifold& m, const Point& p, const Tangent& v) {
  require_size(v, m.dim(), "flat");
  require_finite(v, "flat argument");
  return m.metric(p) * v;
}

Tangent sharp(const Manifold& m, const Point& p, const Covector& w) {
  require_size(w, m.dim(), "sharp");
  require_finite(w, "sharp argument");
  return m.metric(p).llt().solve(w);
}

Tangent riemannian_grad(const Manifold& m, const Point& p, const Covector& dh) {
  return sharp(m, p, dh);
}

double inner(const Manifold& m, const Point& p, const Tangent& u,
             const Tangent& v) {
  require_size(u, m.dim(), "inner u");
  require_size(v, m.dim(), "inner v");
  return u.dot(m.metric(p) * v);
}

Tangent covariant_derivative_of_field(const Manifold& m, const Point& p,
                                      const Tangent& v, const VectorField& k) {
  require_finite(v, "direction");
  Tangent out = directional_derivative(m, k, p, v) + m.connection(p, v, k.eval(p));
  if (!out.allFinite())
    throw std::runtime_error("covariant derivative produced non-finite values");
  return out;
}

Tangent covariant_derivative_of_projection(const Manifold& m, const Point& p,
                                           const Tangent& v,
                                           const Eigen::MatrixXd& proj,
                                           const Tangent& e) {
  const int n = m.dim();
  return covariant_derivative_of_projection(m, p, v, proj, e,
                                            Eigen::MatrixXd::Zero(n, n));
}

Tangent covariant_derivative_of_projection(const Manifold& m, const Point& p,
                                           const Tangent& v,
                                           const Eigen::MatrixXd& proj,
                                           const Tangent& e,
                                           const Eigen::MatrixXd& proj_rate) {
  const int n = m.dim();
  if (proj.rows() != n || proj.cols() != n || proj_rate.rows() != n ||
      proj_rate.cols() != n)
    throw DimensionMismatch("projection must be dim x dim");
  require_size(e, n, "projected vector");
  if ((proj * proj - proj).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("projection is not idempotent");
  return m.connection(p, v, proj * e) - proj * m.connection(p, v, e) +
         proj_rate * e;
}

}  // namespace geocbf
