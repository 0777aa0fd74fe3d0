#include "geocbf/checks.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "geocbf/double_integrator.hpp"
#include "geocbf/integrators.hpp"
#include "geocbf/oracles.hpp"
#include "geocbf/satellite.hpp"
#include "geocbf/scalar_filters.hpp"
#include "geocbf/scenario.hpp"
#include "geocbf/so3.hpp"

namespace geocbf::checks {

namespace {

using oracle::Rng;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string sci(double x) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << x;
  return os.str();
}

Outcome bound(double worst, double tol, const std::string& what) {
  return {worst <= tol, what + " worst " + sci(worst) + " (tol " + sci(tol) + ")"};
}

/// Satellite objects, possibly with an injected sign error.
struct SatelliteFixture {
  satellite::SatelliteParams params;
  ManifoldPtr manifold;
  ConfigSafetySpec h0;
  SMCS smcs;
  BacksteppingCBF cbf;
};

SatelliteFixture make_satellite(Mutation mutation) {
  SatelliteFixture f;
  ManifoldPtr base = std::make_shared<const so3::RigidBodySO3>(
      Eigen::Matrix3d(f.params.inertia.asDiagonal()));
  f.manifold = mutation == Mutation::ConnectionSign
                   ? std::make_shared<const oracle::SignFlippedConnection>(base)
                   : base;
  f.h0 = satellite::heat_shield_constraint(f.params.theta_safe);
  if (mutation == Mutation::DifferentialSign) f.h0 = oracle::flip_differential(f.h0);
  Eigen::MatrixXd rows(2, 3);
  rows << 1, 0, 0, 0, 1, 0;
  f.smcs = satellite::satellite_smcs_on(f.manifold, rows);
  f.cbf = BacksteppingCBF::make(f.manifold, f.h0, f.params.epsilon, f.params.alpha,
                                f.params.delta);
  return f;
}

struct Context {
  const CheckOptions& options;
  SatelliteFixture sat;
  std::size_t count(std::size_t full) const {
    return options.quick ? std::max<std::size_t>(full / 10, 10) : full;
  }
  Rng rng(std::uint64_t salt) const { return Rng(options.seed * 1000003ull + salt); }
};

Point random_safe_rotation(Rng& rng, const BacksteppingCBF& cbf) {
  while (true) {
    Eigen::Matrix3d R = oracle::random_rotation(rng);
    const double h0 = cbf.h0.value(R);
    // Stay inside D0 and away from the antipodal critical point.
    if (h0 > -cbf.domain_margin + 0.1) return R;
  }
}

// ---------------------------------------------------------------- scalar-filters

Outcome alpha_properties(Context&) {
  for (auto spec : {AlphaSpec::linear(0.7), AlphaSpec::cubic(1.3)}) {
    if (alpha_eval(spec, 0.0) != 0.0) return {false, "alpha(0) != 0"};
    if (!(alpha_eval(spec, 1e6) > 0.0 && alpha_eval(spec, -1e6) < 0.0))
      return {false, "alpha not unbounded with correct sign"};
    double prev = alpha_eval(spec, -10.0);
    for (int i = 1; i <= 2000; ++i) {
      const double cur = alpha_eval(spec, -10.0 + 0.01 * i);
      if (!(cur > prev)) return {false, "alpha not strictly increasing"};
      prev = cur;
    }
  }
  return {true, "zero at 0, increasing, unbounded"};
}

Outcome lambda_identities(Context& ctx) {
  Rng rng = ctx.rng(1);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(10000); ++i) {
    const double a = oracle::uniform(rng, -5.0, 5.0);
    const double b = oracle::uniform(rng, 1e-3, 5.0);
    const double qp = a + b * lambda_qp(a, b) - std::max(a, 0.0);
    const double hs = a + b * lambda_hs(a, b) - 0.5 * (a + std::sqrt(a * a + b * b));
    worst = std::max({worst, std::abs(qp), std::abs(hs) / (1.0 + std::abs(a))});
    if (lambda_hs(a, b) < lambda_qp(a, b)) return {false, "lambda_hs < lambda_qp"};
  }
  return bound(worst, 1e-12, "a + b*lambda");
}

Outcome lambda_hs_derivatives(Context& ctx) {
  Rng rng = ctx.rng(2);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(10000); ++i) {
    const double a = oracle::uniform(rng, 0.05, 5.0);
    const double b = oracle::uniform(rng, 0.05, 5.0);
    const LambdaPartials p = lambda_hs_partials(a, b);
    const double h = 1e-5;
    const double fa = oracle::central_difference([&](double s) { return lambda_hs(a + s, b); }, h);
    const double fb = oracle::central_difference([&](double s) { return lambda_hs(a, b + s); }, h);
    worst = std::max({worst, std::abs(fa - p.d_a) / std::max(std::abs(p.d_a), 1e-3),
                      std::abs(fb - p.d_b) / std::max(std::abs(p.d_b), 1e-3)});
  }
  return bound(worst, 1e-6, "relative partial error");
}

Outcome lambda_continuity(Context&) {
  // Approach b = 0 with a > 0 fixed: both multipliers tend to 0.
  double worst = 0.0;
  for (double a : {0.1, 1.0, 7.0})
    for (double b = 1e-1; b > 1e-12; b *= 0.1)
      worst = std::max({worst, lambda_qp(a, b), lambda_hs(a, b) - b / (4.0 * a) * 1.0000001});
  return bound(std::max(worst, 0.0), 1e-12, "lambda near b = 0");
}

// ---------------------------------------------------------------- manifold-core

Outcome sharp_flat_roundtrip(Context& ctx) {
  Rng rng = ctx.rng(10);
  double worst = 0.0;
  const Manifold& so3m = *ctx.sat.manifold;
  const EuclideanSpace r3(oracle::random_spd(rng, 3));
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const Point R = oracle::random_rotation(rng);
    const Tangent v = oracle::random_vector(rng, 3, 3.0);
    worst = std::max(worst, (sharp(so3m, R, flat(so3m, R, v)) - v).norm());
    const Point x = oracle::random_vector(rng, 3);
    worst = std::max(worst, (sharp(r3, x, flat(r3, x, v)) - v).norm());
    // <grad h, w> = dh . w
    const Covector dh = oracle::random_vector(rng, 3);
    const Tangent w = oracle::random_vector(rng, 3);
    worst = std::max(worst, std::abs(inner(so3m, R, riemannian_grad(so3m, R, dh), w) - dh.dot(w)));
  }
  return bound(worst, 1e-12, "sharp/flat/grad");
}

Outcome metric_compatibility_algebraic(Context& ctx) {
  Rng rng = ctx.rng(11);
  const Manifold& m = *ctx.sat.manifold;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const Point R = oracle::random_rotation(rng);
    const Tangent u = oracle::random_vector(rng, 3), y = oracle::random_vector(rng, 3),
                  z = oracle::random_vector(rng, 3);
    // Frame fields are constant and the metric is left-invariant, so
    // d<y, z> = 0 = <B(u, y), z> + <y, B(u, z)>.
    const double r = inner(m, R, m.connection(R, u, y), z) + inner(m, R, y, m.connection(R, u, z));
    worst = std::max(worst, std::abs(r));
  }
  return bound(worst, 1e-10, "<B(u,y),z> + <y,B(u,z)>");
}

Outcome metric_compatibility_fd(Context& ctx) {
  Rng rng = ctx.rng(12);
  const Manifold& m = *ctx.sat.manifold;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(200); ++i) {
    const Eigen::Matrix3d A = Eigen::Matrix3d::Random(), C = Eigen::Matrix3d::Random();
    const Eigen::Vector3d b = Eigen::Vector3d::Random(), d = Eigen::Vector3d::Random();
    VectorField Y{[A, b](const Point& q) {
                    return Tangent(A * Eigen::Matrix3d(q).transpose() * Eigen::Vector3d::UnitZ() + b);
                  },
                  {}};
    VectorField Z{[C, d](const Point& q) {
                    return Tangent(C * Eigen::Matrix3d(q).transpose() * d);
                  },
                  {}};
    const Point R = oracle::random_rotation(rng);
    const Tangent u = oracle::random_vector(rng, 3);
    const double fd = oracle::central_difference(
        [&](double t) {
          const Point Rt = m.retract(R, u, t);
          return inner(m, Rt, Y.eval(Rt), Z.eval(Rt));
        },
        1e-5);
    const double analytic = inner(m, R, covariant_derivative_of_field(m, R, u, Y), Z.eval(R)) +
                            inner(m, R, Y.eval(R), covariant_derivative_of_field(m, R, u, Z));
    worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-2));
  }
  return bound(worst, 1e-4, "relative product-rule error");
}

Outcome torsion_free(Context& ctx) {
  Rng rng = ctx.rng(13);
  const Manifold& m = *ctx.sat.manifold;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const Point R = oracle::random_rotation(rng);
    const Tangent u = oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3);
    const Tangent t = m.connection(R, u, v) - m.connection(R, v, u) - m.frame_bracket(u, v);
    worst = std::max(worst, t.norm());
  }
  return bound(worst, 1e-10, "B(u,v) - B(v,u) - [u,v]");
}

Outcome euler_free_motion(Context& ctx) {
  Rng rng = ctx.rng(14);
  const Manifold& m = *ctx.sat.manifold;
  const Eigen::Matrix3d J = ctx.sat.params.inertia.asDiagonal();
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const Point R = oracle::random_rotation(rng);
    const Eigen::Vector3d w = oracle::random_vector(rng, 3, 2.0);
    const Eigen::Vector3d euler = J.inverse() * (J * w).cross(w);
    const Eigen::Vector3d geodesic = -m.connection(R, w, w);
    worst = std::max(worst, (geodesic - euler).norm() / std::max(1.0, euler.norm()));
  }
  return bound(worst, 1e-12, "-B(w,w) vs J^-1 (Jw x w)");
}

Outcome geodesic_energy(Context& ctx) {
  const SMCS& s = ctx.sat.smcs;
  MechState st{Eigen::MatrixXd(Eigen::Matrix3d::Identity()), Eigen::Vector3d(0.3, -1.1, 0.7)};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  const double e0 = inner(*s.manifold, st.q, st.v, st.v);
  double worst = 0.0;
  for (std::size_t k = 0; k < ctx.count(10000); ++k) {
    st = step_with_force(s, st, zero, 1e-3);
    worst = std::max(worst, std::abs(inner(*s.manifold, st.q, st.v, st.v) - e0) / e0);
  }
  return bound(worst, 1e-6, "relative energy drift");
}

Outcome retraction_properties(Context& ctx) {
  Rng rng = ctx.rng(15);
  const Manifold& m = *ctx.sat.manifold;
  double worst_defect = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const Point R = oracle::random_rotation(rng);
    const Tangent u = oracle::random_vector(rng, 3, 3.0);
    if (!(m.retract(R, u, 0.0) == R)) return {false, "retract(p, u, 0) != p"};
    worst_defect = std::max(worst_defect, m.point_defect(m.retract(R, u, 0.37)));
  }
  return bound(worst_defect, 1e-10, "orthonormality defect");
}

Outcome retraction_rate_consistency(Context& ctx) {
  Rng rng = ctx.rng(16);
  const Manifold& m = *ctx.sat.manifold;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(200); ++i) {
    const Point R0 = oracle::random_rotation(rng);
    const Tangent theta = oracle::random_vector(rng, 3, 1.5);
    const Tangent w = oracle::random_vector(rng, 3);
    const Tangent rate = m.retraction_rate(theta, w);
    // Body velocity of s -> retract(R0, theta + s rate, 1) must equal w.
    const Eigen::Matrix3d Rp = m.retract(R0, theta + 1e-6 * rate, 1.0);
    const Eigen::Matrix3d Rm = m.retract(R0, theta - 1e-6 * rate, 1.0);
    const Eigen::Matrix3d R = m.retract(R0, theta, 1.0);
    const Eigen::Matrix3d W = R.transpose() * (Rp - Rm) / 2e-6;
    const Eigen::Vector3d body{W(2, 1), W(0, 2), W(1, 0)};
    worst = std::max(worst, (body - Eigen::Vector3d(w)).norm());
  }
  return bound(worst, 1e-7, "body velocity mismatch");
}

// ---------------------------------------------------------------- safety-filters

Outcome qp_matches_kkt(Context& ctx) {
  Rng rng = ctx.rng(20);
  const AlphaSpec alpha = AlphaSpec::linear(1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(10000); ++i) {
    const int m = 1 + static_cast<int>(i % 6);
    const ControlAffinePointData d = oracle::random_affine_data(rng, m, alpha);
    const FilterOutput out = qp_filter(d, alpha);
    const Eigen::VectorXd ref = oracle::kkt_qp(d.W, d.u_des, d.dhG, -d.dhf - alpha_eval(alpha, d.h));
    const Eigen::VectorXd diff = out.u - ref;
    worst = std::max(worst, std::sqrt(std::max(0.0, diff.dot(d.W * diff))));
  }
  return bound(worst, 1e-8, "W-norm distance to KKT solution");
}

Outcome filters_satisfy_constraint(Context& ctx) {
  Rng rng = ctx.rng(21);
  double worst = 0.0;
  for (const AlphaSpec alpha : {AlphaSpec::linear(1.0), AlphaSpec::cubic(0.5)}) {
    for (std::size_t i = 0; i < ctx.count(10000); ++i) {
      const ControlAffinePointData d = oracle::random_affine_data(rng, 1 + static_cast<int>(i % 6), alpha);
      const FilterOutput qp = qp_filter(d, alpha);
      const FilterOutput hs = hs_filter(d, alpha);
      const double sq = constraint_slack(d, alpha, qp.u);
      const double sh = constraint_slack(d, alpha, hs.u);
      worst = std::max({worst, -sq, -sh});
      if (hs.lambda < qp.lambda) return {false, "lambda_hs < lambda_qp"};
      if (qp.a >= 0.0 && !(qp.u.array() == d.u_des.array()).all())
        return {false, "qp_filter modified a feasible u_des"};
    }
  }
  return {worst <= 1e-12, "worst violation " + sci(std::max(worst, 0.0)) + " (tol 1e-12)"};
}

Outcome explicit_adjoint(Context& ctx) {
  Rng rng = ctx.rng(22);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const int n = 2 + static_cast<int>(i % 4), m = 1 + static_cast<int>(i % 3);
    const Eigen::MatrixXd M = oracle::random_spd(rng, n), W = oracle::random_spd(rng, m);
    Eigen::MatrixXd G(n, m);
    for (int c = 0; c < m; ++c) G.col(c) = oracle::random_vector(rng, n);
    const Eigen::VectorXd dh = oracle::random_vector(rng, n);
    // Adjoint from <G* x, u>_W = <x, G u>_M: G* = W^{-1} G^T M.
    const Eigen::MatrixXd Gstar = W.inverse() * G.transpose() * M;
    const Eigen::VectorXd grad = M.inverse() * dh;
    const Eigen::VectorXd adj = Gstar * grad;
    const double b_ref = adj.dot(W * adj);
    ControlAffinePointData d;
    d.dhG = G.transpose() * dh;
    d.W = W;
    d.u_des = Eigen::VectorXd::Zero(m);
    const double b = compute_a_b(d, AlphaSpec::linear(1.0)).b;
    worst = std::max(worst, std::abs(b - b_ref) / std::max(1.0, b_ref));
  }
  return bound(worst, 1e-10, "b vs explicit adjoint");
}

// ------------------------------------------------------- mechanical-backstepping

Outcome hdot_fd_satellite(Context& ctx) {
  Rng rng = ctx.rng(30);
  const auto& f = ctx.sat;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(100); ++i) {
    MechState st{random_safe_rotation(rng, f.cbf), oracle::random_vector(rng, 3, 1.0)};
    const Eigen::VectorXd tau = oracle::random_vector(rng, 2, 2.0);
    const double an = hdot(f.cbf, f.smcs, st, force_from_coefficients(f.smcs, st.q, tau));
    const double fd = oracle::hdot_by_flow(f.cbf, f.smcs, st, tau);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  return bound(worst, 1e-4, "relative hdot error");
}

Outcome hdot_fd_double_integrator(Context& ctx) {
  Rng rng = ctx.rng(31);
  double_integrator::DoubleIntegratorParams p;
  p.gravity = {0.3, -0.5, -9.81};
  p.mass = 1.7;
  auto sys = double_integrator::double_integrator_smcs(p);
  const BacksteppingCBF cbf = double_integrator::double_integrator_cbf(p, sys.manifold);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(100); ++i) {
    Eigen::Vector3d x;
    do x = oracle::random_vector(rng, 3, 3.0); while ((x - p.obstacle_center).norm() < 0.3);
    MechState st{Eigen::MatrixXd(x), oracle::random_vector(rng, 3, 1.0)};
    const Eigen::VectorXd tau = oracle::random_vector(rng, 3, 2.0);
    const double an = hdot(cbf, sys.smcs, st, force_from_coefficients(sys.smcs, st.q, tau));
    const double fd = oracle::hdot_by_flow(cbf, sys.smcs, st, tau);
    worst = std::max(worst, std::abs(fd - an) / std::abs(an));
  }
  return bound(worst, 1e-4, "relative hdot error");
}

Outcome h_below_h0(Context& ctx) {
  Rng rng = ctx.rng(32);
  const auto& f = ctx.sat;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    const Point R = random_safe_rotation(rng, f.cbf);
    const MechState st{R, oracle::random_vector(rng, 3, 2.0)};
    worst = std::max(worst, backstepping_h(f.cbf, f.smcs, st) - f.h0.value(R));
    const MechState on_graph{R, f.cbf.kappa.eval(R)};
    worst = std::max(worst, std::abs(backstepping_h(f.cbf, f.smcs, on_graph) - f.h0.value(R)));
  }
  return bound(std::max(worst, 0.0), 1e-14, "h - h0");
}

Outcome actuation_split_invariants(Context& ctx) {
  Rng rng = ctx.rng(33);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(200); ++i) {
    const int n = 2 + static_cast<int>(i % 4);
    const int m = 1 + static_cast<int>(i % n);
    auto manifold = std::make_shared<const EuclideanSpace>(oracle::random_spd(rng, n));
    Eigen::MatrixXd rows(m, n);
    for (int r = 0; r < m; ++r) rows.row(r) = oracle::random_vector(rng, n).transpose();
    const SMCS s = SMCS::with_constant_codistribution(manifold, Potential::zero(n), rows);
    const Point q = oracle::random_vector(rng, n);
    const ActuationSplit sp = build_actuation_split(s, q);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    worst = std::max(worst, (sp.proj_A + sp.proj_U - I).cwiseAbs().maxCoeff());
    worst = std::max(worst, (sp.proj_A * sp.proj_A - sp.proj_A).cwiseAbs().maxCoeff());
    worst = std::max(worst, (sp.proj_U * sp.proj_U - sp.proj_U).cwiseAbs().maxCoeff());
    worst = std::max(worst, (rows * sp.proj_U).cwiseAbs().maxCoeff());
    const Eigen::VectorXd v = oracle::random_vector(rng, n), w = oracle::random_vector(rng, n);
    worst = std::max(worst, std::abs(inner(*manifold, q, sp.proj_A * v, sp.proj_U * w)));
  }
  return bound(worst, 1e-10, "split identity residual");
}

Outcome safe_force_constraint(Context& ctx) {
  Rng rng = ctx.rng(34);
  const auto& f = ctx.sat;
  double worst = 0.0, worst_active = 0.0;
  std::size_t active = 0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    MechState st{random_safe_rotation(rng, f.cbf), oracle::random_vector(rng, 3, 2.0)};
    const Eigen::VectorXd tau_des = oracle::random_vector(rng, 2, 5.0);
    for (FilterKind kind : {FilterKind::Qp, FilterKind::HalfSontag}) {
      const SafeForceResult r = safe_force_coefficients(f.cbf, f.smcs, st, tau_des, kind);
      const double margin = hdot(f.cbf, f.smcs, st, r.force) + alpha_eval(f.cbf.alpha, r.h);
      worst = std::max(worst, -margin);
      if (kind == FilterKind::Qp && r.filter.active) {
        ++active;
        worst_active = std::max(worst_active, std::abs(margin) / std::max(1.0, std::abs(r.filter.a)));
      }
    }
  }
  const bool ok = worst <= 1e-10 && worst_active <= 1e-10;
  return {ok, "worst violation " + sci(std::max(worst, 0.0)) + ", active-slack " +
                  sci(worst_active) + " over " + std::to_string(active) + " active (tol 1e-10)"};
}

// ---------------------------------------------------------------- so3-satellite

Outcome dh0_finite_difference(Context& ctx) {
  Rng rng = ctx.rng(40);
  const auto& f = ctx.sat;
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(100); ++i) {
    const Point R = oracle::random_rotation(rng);
    const Tangent xi = oracle::random_vector(rng, 3);
    const double fd = oracle::central_difference(
        [&](double t) { return f.h0.value(f.manifold->retract(R, xi, t)); }, 1e-5);
    worst = std::max(worst, std::abs(fd - f.h0.differential(R).dot(xi)));
  }
  return bound(worst, 1e-7, "dh0 vs finite difference");
}

Outcome underactuation_holds(Context& ctx) {
  Rng rng = ctx.rng(41);
  std::vector<Point> samples;
  for (std::size_t i = 0; i < ctx.count(10000); ++i) samples.push_back(oracle::random_rotation(rng));
  const UnderactuationReport rep =
      check_underactuation_condition(ctx.sat.cbf, ctx.sat.smcs, samples, 1e-12);
  return {rep.pass, "worst |dh0 . u| " + sci(rep.worst) + " (tol 1e-12)"};
}

Outcome underactuation_counterexample(Context& ctx) {
  Rng rng = ctx.rng(42);
  Eigen::MatrixXd rows(2, 3);
  rows << 0, 1, 0, 0, 0, 1;
  const SMCS variant = satellite::satellite_smcs_on(ctx.sat.manifold, rows);
  std::vector<Point> samples;
  for (int i = 0; i < 100; ++i) samples.push_back(oracle::random_rotation(rng));
  const UnderactuationReport rep = check_underactuation_condition(ctx.sat.cbf, variant, samples);
  std::size_t failing = 0;
  for (bool p : rep.point_pass) failing += !p;
  return {failing == samples.size(),
          std::to_string(failing) + "/" + std::to_string(samples.size()) +
              " generic rotations rejected for e2/e3 actuation"};
}

Outcome free_body_conservation(Context& ctx) {
  const auto& f = ctx.sat;
  const Eigen::Matrix3d J = f.params.inertia.asDiagonal();
  MechState st{Eigen::MatrixXd(Eigen::Matrix3d::Identity()), Eigen::Vector3d(1.0, 0.5, 0.2)};
  auto energy = [&](const MechState& s) { return s.v.dot(J * s.v); };
  auto momentum = [&](const MechState& s) {
    return (Eigen::Matrix3d(s.q) * J * Eigen::Vector3d(s.v)).eval();
  };
  const double e0 = energy(st);
  const Eigen::Vector3d L0 = momentum(st);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  double de = 0.0, dl = 0.0;
  for (std::size_t k = 0; k < ctx.count(10000); ++k) {
    st = step_with_force(f.smcs, st, zero, 1e-3);
    de = std::max(de, std::abs(energy(st) - e0) / e0);
    dl = std::max(dl, (momentum(st) - L0).norm() / L0.norm());
  }
  return {de < 1e-8 && dl < 1e-8,
          "energy drift " + sci(de) + ", spatial momentum drift " + sci(dl) + " (tol 1e-8)"};
}

Outcome exp_log_roundtrip(Context& ctx) {
  Rng rng = ctx.rng(43);
  double worst = 0.0;
  for (std::size_t i = 0; i < ctx.count(1000); ++i) {
    Eigen::Vector3d w = oracle::random_vector(rng, 3, 3.0);
    if (w.norm() >= 3.0) continue;
    const Eigen::Matrix3d R = so3::exp(w);
    worst = std::max(worst, (so3::exp(so3::log(R)) - R).cwiseAbs().maxCoeff());
    worst = std::max(worst, (so3::log(R) - w).norm());
  }
  return bound(worst, 1e-10, "exp/log round trip");
}

// ------------------------------------------------------------------ integrators

Eigen::VectorXd final_state_vector(const Trajectory& t) {
  const auto& s = t.samples.back();
  Eigen::VectorXd out(s.q.size() + s.v.size());
  out << Eigen::Map<const Eigen::VectorXd>(s.q.data(), s.q.size()), s.v;
  return out;
}

double richardson_order(const ScenarioConfig& base) {
  std::vector<Eigen::VectorXd> finals;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    ScenarioConfig c = base;
    c.dt = dt;
    finals.push_back(final_state_vector(run_scenario(c).trajectory));
  }
  const double e1 = (finals[0] - finals[1]).norm();
  const double e2 = (finals[1] - finals[2]).norm();
  return std::log2(e1 / e2);
}

Outcome integrator_order(Context&) {
  ScenarioConfig c;
  c.filter = FilterMode::Hs;
  c.initial_attitude = {0.3, -0.2, 0.1};
  c.initial_omega = {0.4, -0.3, 0.3};
  c.T = 2.0;
  const double p = richardson_order(c);
  return {p >= 3.5, "observed order " + std::to_string(p) + " (need >= 3.5)"};
}

Outcome exact_principal_spin(Context& ctx) {
  const auto& f = ctx.sat;
  const Point R0 = so3::exp({0.2, -0.4, 0.9});
  MechState st{R0, Eigen::Vector3d(0, 0, 1.3)};
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  double worst = 0.0;
  for (int k = 1; k <= 100; ++k) {
    st = step_with_force(f.smcs, st, zero, 1e-2);
    const Eigen::Matrix3d exact = Eigen::Matrix3d(R0) * so3::exp(Eigen::Vector3d(0, 0, 1.3 * 1e-2 * k));
    worst = std::max(worst, (Eigen::Matrix3d(st.q) - exact).cwiseAbs().maxCoeff());
  }
  return bound(worst, 1e-10, "principal-axis spin vs closed form");
}

Outcome determinism(Context&) {
  ScenarioConfig c;
  c.T = 1.0;
  std::ostringstream a, b;
  write_trajectory_csv(a, run_scenario(c).trajectory);
  write_trajectory_csv(b, run_scenario(c).trajectory);
  return {a.str() == b.str(), "identical config gives identical CSV bytes"};
}

struct Entry {
  const char* module;
  const char* name;
  Outcome (*fn)(Context&);
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      {"scalar-filters", "alpha_family", alpha_properties},
      {"scalar-filters", "lambda_constraint_identities", lambda_identities},
      {"scalar-filters", "lambda_hs_partials_fd", lambda_hs_derivatives},
      {"scalar-filters", "lambda_boundary_continuity", lambda_continuity},
      {"manifold-core", "sharp_flat_roundtrip", sharp_flat_roundtrip},
      {"manifold-core", "metric_compatibility", metric_compatibility_algebraic},
      {"manifold-core", "metric_compatibility_fd", metric_compatibility_fd},
      {"manifold-core", "torsion_free", torsion_free},
      {"manifold-core", "euler_free_motion", euler_free_motion},
      {"manifold-core", "geodesic_energy", geodesic_energy},
      {"manifold-core", "retraction", retraction_properties},
      {"manifold-core", "retraction_rate_fd", retraction_rate_consistency},
      {"safety-filters", "qp_vs_kkt_oracle", qp_matches_kkt},
      {"safety-filters", "constraint_satisfaction", filters_satisfy_constraint},
      {"safety-filters", "explicit_adjoint", explicit_adjoint},
      {"mechanical-backstepping", "hdot_fd_satellite", hdot_fd_satellite},
      {"mechanical-backstepping", "hdot_fd_double_integrator", hdot_fd_double_integrator},
      {"mechanical-backstepping", "h_below_h0", h_below_h0},
      {"mechanical-backstepping", "actuation_split", actuation_split_invariants},
      {"mechanical-backstepping", "safe_force_constraint", safe_force_constraint},
      {"so3-satellite", "dh0_fd", dh0_finite_difference},
      {"so3-satellite", "underactuation_condition", underactuation_holds},
      {"so3-satellite", "underactuation_counterexample", underactuation_counterexample},
      {"so3-satellite", "free_body_conservation", free_body_conservation},
      {"so3-satellite", "exp_log_roundtrip", exp_log_roundtrip},
      {"integrators", "principal_spin_exact", exact_principal_spin},
      {"integrators", "richardson_order", integrator_order},
      {"integrators", "determinism", determinism},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& module_names() {
  static const std::vector<std::string> names{"scalar-filters", "manifold-core",
                                              "safety-filters", "mechanical-backstepping",
                                              "so3-satellite", "integrators"};
  return names;
}

std::vector<CheckResult> run_checks(const CheckOptions& options) {
  if (options.module) {
    bool known = false;
    for (const auto& n : module_names()) known = known || n == *options.module;
    if (!known) throw std::invalid_argument("unknown module '" + *options.module + "'");
  }
  Context ctx{options, make_satellite(options.mutation)};
  std::vector<CheckResult> results;
  for (const Entry& e : registry()) {
    if (options.module && *options.module != e.module) continue;
    CheckResult r;
    r.module = e.module;
    r.name = e.name;
    const auto start = std::chrono::steady_clock::now();
    try {
      const Outcome o = e.fn(ctx);
      r.pass = o.pass;
      r.detail = o.detail;
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_table(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  os << std::left << std::setw(26) << "module" << std::setw(32) << "check" << std::setw(6)
     << "ok" << std::setw(9) << "time" << "detail\n";
  for (const auto& r : results) {
    os << std::left << std::setw(26) << r.module << std::setw(32) << r.name << std::setw(6)
       << (r.pass ? "PASS" : "FAIL") << std::setw(9) << std::fixed << std::setprecision(3)
       << r.seconds << r.detail << '\n';
  }
  return os.str();
}

}  // namespace geocbf::checks
