#include "geocbf/safety_filters.hpp"

#include <cmath>
#include <stdexcept>

#include "geocbf/errors.hpp"

namespace geocbf {

void ControlAffinePointData::validate() const {
  const auto m = dhG.size();
  if (m == 0) throw DimensionMismatch("input dimension must be positive");
  if (W.rows() != m || W.cols() != m)
    throw DimensionMismatch("fiber metric must be m x m");
  if (u_des.size() != m) throw DimensionMismatch("u_des must have length m");
  if (!std::isfinite(dhf) || !std::isfinite(h) || !dhG.allFinite() ||
      !W.allFinite() || !u_des.allFinite())
    throw std::invalid_argument("control-affine data must be finite");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, W.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("fiber metric must be symmetric");
}

namespace {

struct Adjoint {
  Eigen::VectorXd direction;  // W^{-1} dhG^T
  double b;
};

Adjoint adjoint_gradient(const ControlAffinePointData& d) {
  Eigen::LLT<Eigen::MatrixXd> llt(d.W);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("fiber metric is not positive definite");
  Eigen::VectorXd dir = llt.solve(d.dhG);
  if (!dir.allFinite())
    throw std::invalid_argument("fiber metric is not invertible to working precision");
  return {dir, std::max(0.0, d.dhG.dot(dir))};
}

FilterOutput filter_with(double (*lambda)(double, double),
                         const ControlAffinePointData& d,
                         const AlphaSpec& alpha) {
  d.validate();
  const Adjoint adj = adjoint_gradient(d);
  FilterOutput out;
  out.a = alpha_eval(alpha, d.h) + d.dhf + d.dhG.dot(d.u_des);
  out.b = adj.b;
  out.lambda = lambda(out.a, out.b);
  out.active = out.lambda > 0.0;
  out.u = out.active ? Eigen::VectorXd(d.u_des + out.lambda * adj.direction)
                     : d.u_des;
  return out;
}

}  // namespace

FilterGainPair compute_a_b(const ControlAffinePointData& d, const AlphaSpec& alpha) {
  d.validate();
  const Adjoint adj = adjoint_gradient(d);
  return {alpha_eval(alpha, d.h) + d.dhf + d.dhG.dot(d.u_des), adj.b};
}

FilterOutput qp_filter(const ControlAffinePointData& d, const AlphaSpec& alpha) {
  return filter_with(&lambda_qp, d, alpha);
}

FilterOutput hs_filter(const ControlAffinePointData& d, const AlphaSpec& alpha) {
  return filter_with(&lambda_hs, d, alpha);
}

FilterOutput apply_filter(FilterKind kind, const ControlAffinePointData& d,
                          const AlphaSpec& alpha) {
  return kind == FilterKind::Qp ? qp_filter(d, alpha) : hs_filter(d, alpha);
}

double constraint_slack(const ControlAffinePointData& d, const AlphaSpec& alpha,
                        const Eigen::VectorXd& u) {
  return d.dhf + d.dhG.dot(u) + alpha_eval(alpha, d.h);
}

Tangent single_integrator_filter(const Manifold& m, const Point& p,
                                 const Covector& dh0, double h0,
                                 const Tangent& kappa_des, const AlphaSpec& alpha,
                                 double delta, bool smooth) {
  if (dh0.size() != m.dim() || kappa_des.size() != m.dim())
    throw DimensionMismatch("single integrator data must have manifold dimension");
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
  if (h0 <= 0.0 && dh0.isZero(0.0))
    throw OutsideDomain("single integrator: h0 <= 0 at a critical point of h0");
  ControlAffinePointData d;
  d.dhf = 0.0;
  d.dhG = dh0;
  d.W = m.metric(p);
  d.h = h0;
  d.u_des = kappa_des;
  const FilterOutput out = smooth ? hs_filter(d, alpha) : qp_filter(d, alpha);
  if (delta == 0.0) return out.u;
  return out.u + delta * riemannian_grad(m, p, dh0);
}

}  // namespace geocbf
