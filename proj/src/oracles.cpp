#include "geocbf/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "geocbf/integrators.hpp"

namespace geocbf::oracle {

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::VectorXd random_vector(Rng& rng, int n, double scale) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = uniform(rng, -scale, scale);
  return v;
}

Eigen::MatrixXd random_spd(Rng& rng, int m) {
  Eigen::MatrixXd A(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) A(i, j) = uniform(rng, -1.0, 1.0);
  Eigen::MatrixXd W = A * A.transpose() + 0.2 * Eigen::MatrixXd::Identity(m, m);
  return 0.5 * (W + W.transpose());
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

ControlAffinePointData random_affine_data(Rng& rng, int m, const AlphaSpec& alpha) {
  while (true) {
    ControlAffinePointData d;
    d.W = random_spd(rng, m);
    d.u_des = random_vector(rng, m, 2.0);
    d.h = uniform(rng, -1.0, 2.0);
    d.dhf = uniform(rng, -3.0, 3.0);
    const bool degenerate = uniform(rng, 0.0, 1.0) < 0.1;
    d.dhG = degenerate ? Eigen::VectorXd::Zero(m).eval() : random_vector(rng, m, 2.0);
    const double a = alpha_eval(alpha, d.h) + d.dhf + d.dhG.dot(d.u_des);
    if (degenerate && a <= 0.0) continue;
    return d;
  }
}

Eigen::VectorXd kkt_qp(const Eigen::MatrixXd& W, const Eigen::VectorXd& u_des,
                       const Eigen::VectorXd& c, double d) {
  if (c.dot(u_des) >= d) return u_des;
  const auto m = u_des.size();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m + 1, m + 1);
  K.topLeftCorner(m, m) = 2.0 * W;
  K.topRightCorner(m, 1) = -c;
  K.bottomLeftCorner(1, m) = c.transpose();
  Eigen::VectorXd rhs(m + 1);
  rhs.head(m) = 2.0 * W * u_des;
  rhs(m) = d;
  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  if (sol(m) < 0.0) throw std::runtime_error("kkt_qp: negative multiplier");
  return sol.head(m);
}

double central_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

ConfigSafetySpec flip_differential(ConfigSafetySpec spec) {
  auto diff = spec.differential;
  spec.differential = [diff](const Point& q) { return Covector(-diff(q)); };
  if (spec.differential_rate) {
    auto rate = spec.differential_rate;
    spec.differential_rate = [rate](const Point& q, const Tangent& v) {
      return Covector(-rate(q, v));
    };
  }
  return spec;
}

double hdot_by_flow(const BacksteppingCBF& c, const SMCS& s, const MechState& st,
                    const Eigen::VectorXd& tau, double step) {
  return central_difference(
      [&](double dt) { return backstepping_h(c, s, geocbf::step_with_force(s, st, tau, dt)); }, step);
}

}  // namespace geocbf::oracle
