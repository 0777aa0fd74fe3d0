#include "geocbf/integrators.hpp"

#include <cmath>
#include <stdexcept>

#include "geocbf/errors.hpp"

namespace geocbf {

Tangent acceleration(const SMCS& s, const MechState& st, const Eigen::VectorXd& tau) {
  const Manifold& m = *s.manifold;
  const Covector F = force_from_coefficients(s, st.q, tau);
  return -m.connection(st.q, st.v, st.v) - sharp(m, st.q, s.potential.differential(st.q)) +
         sharp(m, st.q, F);
}

MechState step(const SMCS& s, const MechState& st, const ForceLaw& law, double dt,
               ControllerSampling sampling, double t) {
  if (!(dt > 0.0) && !(dt < 0.0)) throw std::invalid_argument("dt must be nonzero");
  const Manifold& m = *s.manifold;
  const Point& q0 = st.q;
  const Tangent& v0 = st.v;

  auto evaluate = [&](const MechState& stage) {
    Eigen::VectorXd tau = law(stage);
    if (!tau.allFinite()) throw Divergence(t + dt);
    return tau;
  };
  const Eigen::VectorXd tau_hold = evaluate(st);
  auto force_at = [&](const MechState& stage) {
    if (!stage.v.allFinite() || !stage.q.allFinite()) throw Divergence(t + dt);
    return sampling == ControllerSampling::Stage ? evaluate(stage) : tau_hold;
  };

  // Stage 1.
  const Tangent kq1 = v0;
  const Tangent kv1 = acceleration(s, st, tau_hold);
  // Stage 2.
  const Tangent th2 = 0.5 * dt * kq1;
  const MechState s2{m.retract(q0, th2, 1.0), v0 + 0.5 * dt * kv1};
  const Tangent kq2 = m.retraction_rate(th2, s2.v);
  const Tangent kv2 = acceleration(s, s2, force_at(s2));
  // Stage 3.
  const Tangent th3 = 0.5 * dt * kq2;
  const MechState s3{m.retract(q0, th3, 1.0), v0 + 0.5 * dt * kv2};
  const Tangent kq3 = m.retraction_rate(th3, s3.v);
  const Tangent kv3 = acceleration(s, s3, force_at(s3));
  // Stage 4.
  const Tangent th4 = dt * kq3;
  const MechState s4{m.retract(q0, th4, 1.0), v0 + dt * kv3};
  const Tangent kq4 = m.retraction_rate(th4, s4.v);
  const Tangent kv4 = acceleration(s, s4, force_at(s4));

  const Tangent theta = (dt / 6.0) * (kq1 + 2.0 * kq2 + 2.0 * kq3 + kq4);
  const Tangent v1 = v0 + (dt / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
  if (!theta.allFinite() || !v1.allFinite()) throw Divergence(t + dt);
  Point q1 = m.retract(q0, theta, 1.0);
  if (!q1.allFinite()) throw Divergence(t + dt);
  q1 = m.reproject(q1);
  return {std::move(q1), v1};
}

MechState step_with_force(const SMCS& s, const MechState& st, const Eigen::VectorXd& tau,
                          double dt) {
  return step(s, st, [&tau](const MechState&) { return tau; }, dt,
              ControllerSampling::ZeroOrderHold);
}

std::size_t sample_count(double dt, double T) {
  if (!(dt > 0.0) || !(T > 0.0) || dt > T)
    throw std::invalid_argument("need T > 0 and 0 < dt <= T");
  return static_cast<std::size_t>(std::floor(T / dt + 1e-9)) + 1;
}

Trajectory simulate(const SMCS& s, const ForceLaw& controller, const MechState& st0,
                    double dt, double T, const Observer& observer,
                    ControllerSampling sampling, std::string scenario_hash) {
  const std::size_t n = sample_count(dt, T);
  Trajectory traj;
  traj.meta.dt = dt;
  traj.meta.scenario_hash = std::move(scenario_hash);
  traj.samples.reserve(n);

  MechState st = st0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    TrajectorySample sample;
    sample.t = t;
    sample.q = st.q;
    sample.v = st.v;
    sample.tau = controller(st);
    if (observer) {
      const ObserverValues obs = observer(st, sample.tau);
      sample.h = obs.h;
      sample.h0 = obs.h0;
      sample.hdot_margin = obs.hdot_margin;
      sample.filter_active = obs.filter_active;
    }
    traj.samples.push_back(std::move(sample));
    if (k + 1 == n) break;
    try {
      st = step(s, st, controller, dt, sampling, t);
    } catch (const Divergence& d) {
      traj.divergence_time = d.time();
      break;
    }
  }
  return traj;
}

}  // namespace geocbf
