#include "geocbf/mechanics.hpp"

#include <cmath>
#include <stdexcept>

#include "geocbf/errors.hpp"

namespace geocbf {

Potential Potential::zero(int n) {
  return {[](const Point&) { return 0.0; },
          [n](const Point&) { return Covector::Zero(n).eval(); }};
}

SMCS SMCS::with_constant_codistribution(ManifoldPtr manifold, Potential potential,
                                        Eigen::MatrixXd rows) {
  if (rows.cols() != manifold->dim())
    throw DimensionMismatch("codistribution rows must have manifold dimension");
  return {std::move(manifold), std::move(potential),
          [rows = std::move(rows)](const Point&) { return rows; }};
}

ActuationSplit build_actuation_split(const SMCS& s, const Point& q) {
  const Eigen::MatrixXd rows = s.input_codistribution(q);
  const int n = s.config_dim();
  const int m = static_cast<int>(rows.rows());
  if (rows.cols() != n || m == 0 || m > n)
    throw DimensionMismatch("codistribution must be m x n with 0 < m <= n");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(m - 1) <= 1e-12 * std::max(1.0, sv(0)))
    throw std::invalid_argument("input codistribution is rank deficient");

  ActuationSplit split;
  split.unactuated_basis = svd.matrixV().rightCols(n - m);
  if (m == n) {
    split.proj_U = Eigen::MatrixXd::Zero(n, n);
  } else {
    const Eigen::MatrixXd M = s.manifold->metric(q);
    const Eigen::MatrixXd& N = split.unactuated_basis;
    const Eigen::MatrixXd gram = N.transpose() * M * N;
    split.proj_U = N * gram.llt().solve(N.transpose() * M);
  }
  split.proj_A = Eigen::MatrixXd::Identity(n, n) - split.proj_U;
  return split;
}

Covector force_from_coefficients(const SMCS& s, const Point& q,
                                 const Eigen::VectorXd& tau) {
  const Eigen::MatrixXd rows = s.input_codistribution(q);
  if (tau.size() != rows.rows())
    throw DimensionMismatch("force coefficients must have length m");
  return rows.transpose() * tau;
}

Eigen::VectorXd coefficients_from_force(const SMCS& s, const Point& q,
                                        const Covector& F) {
  const Eigen::MatrixXd rows = s.input_codistribution(q);
  if (F.size() != rows.cols()) throw DimensionMismatch("force must have length n");
  const Eigen::MatrixXd rt = rows.transpose();
  Eigen::VectorXd tau = rt.colPivHouseholderQr().solve(F);
  if ((rt * tau - F).norm() > 1e-10 * std::max(1.0, F.norm()))
    throw std::invalid_argument("force lies outside the input codistribution");
  return tau;
}

VectorField safe_velocity_field(ManifoldPtr m, ConfigSafetySpec h0, AlphaSpec alpha,
                                double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  VectorField field;
  field.eval = [m, h0, alpha, delta](const Point& q) {
    const Covector dh = h0.differential(q);
    return single_integrator_filter(*m, q, dh, h0.value(q),
                                    Tangent::Zero(m->dim()), alpha, delta, true);
  };
  if (!m->metric_is_constant() || !h0.differential_rate) return field;

  // kappa = s(q) M^{-1} dh0, s = lambda_hs(alpha(h0), |dh0|^2_{M^-1}) + delta.
  field.derivative = [m, h0, alpha, delta](const Point& q, const Tangent& v) {
    const Eigen::MatrixXd M = m->metric(q);
    const Eigen::LLT<Eigen::MatrixXd> llt(M);
    const double h = h0.value(q);
    const Covector dh = h0.differential(q);
    const Covector ddh = h0.differential_rate(q, v);
    const Tangent g = llt.solve(dh);
    const Tangent g_rate = llt.solve(ddh);
    const double b = dh.dot(g);
    const double a = alpha_eval(alpha, h);
    if (b == 0.0) {
      if (a <= 0.0) throw OutsideDomain("safe velocity field: degenerate point");
      return Tangent(delta * g_rate);
    }
    const LambdaPartials lam = lambda_hs_partials(a, b);
    const double a_rate = alpha_derivative(alpha, h) * dh.dot(v);
    const double b_rate = 2.0 * g.dot(ddh);
    const double s = lam.value + delta;
    const double s_rate = lam.d_a * a_rate + lam.d_b * b_rate;
    return Tangent(s_rate * g + s * g_rate);
  };
  return field;
}

BacksteppingCBF BacksteppingCBF::make(ManifoldPtr m, ConfigSafetySpec h0,
                                      double epsilon, AlphaSpec alpha, double delta,
                                      double domain_margin) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(domain_margin > 0.0))
    throw std::invalid_argument("domain margin must be positive");
  BacksteppingCBF c;
  c.kappa = safe_velocity_field(std::move(m), h0, alpha, delta);
  c.h0 = std::move(h0);
  c.epsilon = epsilon;
  c.alpha = alpha;
  c.delta = delta;
  c.domain_margin = domain_margin;
  return c;
}

void require_in_domain(const BacksteppingCBF& c, const Point& q) {
  const double h = c.h0.value(q);
  if (!(h > -c.domain_margin))
    throw OutsideDomain("configuration outside D0: h0 = " + std::to_string(h));
}

namespace {

void validate_state(const SMCS& s, const MechState& st) {
  s.manifold->validate_point(st.q);
  if (st.v.size() != s.config_dim())
    throw DimensionMismatch("velocity must have manifold dimension");
  if (!st.v.allFinite()) throw std::invalid_argument("velocity is not finite");
}

}  // namespace

double backstepping_h(const BacksteppingCBF& c, const SMCS& s, const MechState& st) {
  validate_state(s, st);
  require_in_domain(c, st.q);
  const Manifold& m = *s.manifold;
  const ActuationSplit split = build_actuation_split(s, st.q);
  const Tangent eA = split.proj_A * (st.v - c.kappa.eval(st.q));
  return c.h0.value(st.q) - 0.5 * c.epsilon * inner(m, st.q, eA, eA);
}

HdotTerms hdot_terms(const BacksteppingCBF& c, const SMCS& s, const MechState& st) {
  validate_state(s, st);
  require_in_domain(c, st.q);
  const Manifold& m = *s.manifold;
  const ActuationSplit split = build_actuation_split(s, st.q);
  const Tangent e = st.v - c.kappa.eval(st.q);
  const Tangent eA = split.proj_A * e;

  const Tangent nabla_kappa = covariant_derivative_of_field(m, st.q, st.v, c.kappa);
  const Tangent grad_V = riemannian_grad(m, st.q, s.potential.differential(st.q));
  const Tangent nabla_proj =
      covariant_derivative_of_projection(m, st.q, st.v, split.proj_A, e);

  HdotTerms t;
  t.drift = c.h0.differential(st.q).dot(st.v) +
            c.epsilon * inner(m, st.q, eA, nabla_kappa + grad_V - nabla_proj);
  t.force_gain = -c.epsilon * eA;
  t.error = e;
  t.actuated_error = eA;
  return t;
}

double hdot(const BacksteppingCBF& c, const SMCS& s, const MechState& st,
            const Covector& F) {
  coefficients_from_force(s, st.q, F);  // span check
  const HdotTerms t = hdot_terms(c, s, st);
  return t.drift + F.dot(t.force_gain);
}

UnderactuationReport check_underactuation_condition(const BacksteppingCBF& c,
                                                    const SMCS& s,
                                                    const std::vector<Point>& samples,
                                                    double tol) {
  UnderactuationReport report;
  for (const Point& q : samples) {
    const ActuationSplit split = build_actuation_split(s, q);
    const Covector dh = c.h0.differential(q);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < split.unactuated_basis.cols(); ++j)
      worst = std::max(worst, std::abs(dh.dot(split.unactuated_basis.col(j))));
    const bool ok = worst < tol;
    report.point_pass.push_back(ok);
    report.point_worst.push_back(worst);
    report.worst = std::max(report.worst, worst);
    report.pass = report.pass && ok;
  }
  return report;
}

Eigen::MatrixXd dual_gram(const SMCS& s, const Point& q) {
  const Eigen::MatrixXd rows = s.input_codistribution(q);
  const Eigen::MatrixXd M = s.manifold->metric(q);
  return rows * M.llt().solve(rows.transpose());
}

SafeForceResult safe_force_coefficients(const BacksteppingCBF& c, const SMCS& s,
                                        const MechState& st,
                                        const Eigen::VectorXd& tau_des,
                                        FilterKind kind, ForceCostNorm norm) {
  const Eigen::MatrixXd rows = s.input_codistribution(st.q);
  if (tau_des.size() != rows.rows())
    throw DimensionMismatch("desired force coefficients must have length m");
  const HdotTerms t = hdot_terms(c, s, st);

  ControlAffinePointData d;
  d.dhf = t.drift;
  d.dhG = rows * t.force_gain;
  d.W = norm == ForceCostNorm::DualMetric
            ? dual_gram(s, st.q)
            : Eigen::MatrixXd::Identity(rows.rows(), rows.rows()).eval();
  d.W = 0.5 * (d.W + d.W.transpose());
  d.h = backstepping_h(c, s, st);
  d.u_des = tau_des;

  SafeForceResult r;
  r.filter = apply_filter(kind, d, c.alpha);
  r.coefficients = r.filter.u;
  r.force = rows.transpose() * r.coefficients;
  r.h = d.h;
  r.margin = constraint_slack(d, c.alpha, r.coefficients);
  return r;
}

SafeForceResult safe_force(const BacksteppingCBF& c, const SMCS& s,
                           const MechState& st, const Covector& F_des,
                           FilterKind kind, ForceCostNorm norm) {
  return safe_force_coefficients(c, s, st, coefficients_from_force(s, st.q, F_des),
                                 kind, norm);
}

}  // namespace geocbf
