#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geocbf/double_integrator.hpp"
#include "geocbf/errors.hpp"
#include "geocbf/integrators.hpp"
#include "geocbf/oracles.hpp"
#include "geocbf/satellite.hpp"

using namespace geocbf;

namespace {

satellite::SatelliteParams sat_params() { return {}; }

struct Sat {
  satellite::SatelliteSystem sys = satellite::satellite_smcs(sat_params());
  BacksteppingCBF cbf = satellite::satellite_cbf(sat_params(), sys.manifold);
};

// R^n, identity metric, no potential, h0(x) = x_1, kappa = 0.
struct FlatHalfSpace {
  std::shared_ptr<const EuclideanSpace> m;
  SMCS s;
  BacksteppingCBF c;

  explicit FlatHalfSpace(int n) : m(std::make_shared<const EuclideanSpace>(n)) {
    s = SMCS::with_constant_codistribution(m, Potential::zero(n), Eigen::MatrixXd::Identity(n, n));
    c.h0.value = [](const Point& q) { return q(0); };
    c.h0.differential = [n](const Point&) { return Covector(Eigen::VectorXd::Unit(n, 0)); };
    c.h0.differential_rate = [n](const Point&, const Tangent&) { return Covector(Eigen::VectorXd::Zero(n)); };
    c.kappa = VectorField::constant(Eigen::VectorXd::Zero(n));
    c.epsilon = 0.5;
  }
};

}  // namespace

TEST_CASE("actuation split examples") {
  SUBCASE("fully actuated") {
    oracle::Rng rng(1);
    auto m = std::make_shared<const EuclideanSpace>(oracle::random_spd(rng, 3));
    const SMCS s = SMCS::with_constant_codistribution(m, Potential::zero(3), oracle::random_spd(rng, 3));
    const ActuationSplit sp = build_actuation_split(s, Eigen::Vector3d::Zero());
    CHECK(sp.proj_A.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
    CHECK(sp.proj_U.norm() < 1e-12);
    CHECK(sp.unactuated_basis.cols() == 0);
  }
  SUBCASE("satellite") {
    for (double j1 : {1.0, 3.0}) {
      satellite::SatelliteParams p;
      p.inertia = {j1, j1, 0.7};
      const auto sys = satellite::satellite_smcs(p);
      const ActuationSplit sp = build_actuation_split(sys.smcs, Eigen::Matrix3d::Identity());
      const Eigen::Vector3d e3 = Eigen::Vector3d::UnitZ();
      CHECK(sp.proj_U.isApprox(e3 * e3.transpose(), 1e-12));
      CHECK(sp.proj_A.isApprox(Eigen::Matrix3d(Eigen::Vector3d(1, 1, 0).asDiagonal()), 1e-12));
    }
  }
  SUBCASE("R^2 with one diagonal input") {
    auto m = std::make_shared<const EuclideanSpace>(2);
    const SMCS s = SMCS::with_constant_codistribution(m, Potential::zero(2), Eigen::RowVector2d(1, 1));
    const ActuationSplit sp = build_actuation_split(s, Eigen::Vector2d::Zero());
    const Eigen::Vector2d u(1, -1);
    CHECK(sp.proj_U.isApprox(u * u.transpose() / u.squaredNorm(), 1e-12));
    CHECK((sp.proj_A + sp.proj_U).isApprox(Eigen::Matrix2d::Identity()));
  }
  SUBCASE("rank deficient") {
    auto m = std::make_shared<const EuclideanSpace>(3);
    Eigen::MatrixXd rows(2, 3);
    rows << 1, 0, 0, 2, 0, 0;
    const SMCS s = SMCS::with_constant_codistribution(m, Potential::zero(3), rows);
    CHECK_THROWS_AS(build_actuation_split(s, Eigen::Vector3d::Zero()), std::invalid_argument);
  }
}

TEST_CASE("force coefficients round-trip and span check") {
  const Sat sat;
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  const Covector F = force_from_coefficients(sat.sys.smcs, I, Eigen::Vector2d(0.5, -2));
  CHECK(F == Eigen::Vector3d(0.5, -2, 0));
  CHECK(coefficients_from_force(sat.sys.smcs, I, F).isApprox(Eigen::Vector2d(0.5, -2)));
  CHECK_THROWS_AS(coefficients_from_force(sat.sys.smcs, I, Eigen::Vector3d(0, 0, 1e-6)), std::invalid_argument);
}

TEST_CASE("safe velocity field") {
  const Sat sat;
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(sat.cbf.kappa.eval(I).isZero(0.0));
  // Analytic derivative agrees with finite differences of the field.
  REQUIRE(sat.cbf.kappa.derivative);
  VectorField fd_only{sat.cbf.kappa.eval, {}};
  oracle::Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    const Tangent v = oracle::random_vector(rng, 3);
    const Tangent an = directional_derivative(*sat.sys.manifold, sat.cbf.kappa, R, v);
    const Tangent fd = directional_derivative(*sat.sys.manifold, fd_only, R, v);
    CHECK((an - fd).norm() < 1e-7 * (1 + an.norm()));
  }
}

TEST_CASE("safe velocity field falls back to finite differences without a differential rate") {
  ConfigSafetySpec h0 = satellite::heat_shield_constraint(std::numbers::pi / 4);
  h0.differential_rate = nullptr;
  const auto m = std::make_shared<const so3::RigidBodySO3>(Eigen::Vector3d(1, 1, 2).asDiagonal());
  const VectorField k = safe_velocity_field(m, h0, AlphaSpec::linear(1), 0.1);
  CHECK_FALSE(k.derivative);
  const auto ref = safe_velocity_field(m, satellite::heat_shield_constraint(std::numbers::pi / 4),
                                       AlphaSpec::linear(1), 0.1);
  const Eigen::Matrix3d R = so3::exp(Eigen::Vector3d(0.3, 0.2, -0.1));
  const Tangent v(Eigen::Vector3d(0.1, -0.4, 1.0));
  CHECK((directional_derivative(*m, k, R, v) - directional_derivative(*m, ref, R, v)).norm() < 1e-7);
}

TEST_CASE("backstepping_h examples") {
  const Sat sat;
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  const double h0 = 1 - std::sqrt(2.0) / 2;
  CHECK(backstepping_h(sat.cbf, sat.sys.smcs, {I, Eigen::Vector3d(0, 0, 5)}) == doctest::Approx(h0).epsilon(1e-15));
  CHECK(backstepping_h(sat.cbf, sat.sys.smcs, {I, Eigen::Vector3d(1, 0, 0)}) ==
        doctest::Approx(h0 - 0.25).epsilon(1e-15));
  oracle::Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    CHECK(backstepping_h(sat.cbf, sat.sys.smcs, {R, sat.cbf.kappa.eval(R)}) ==
          doctest::Approx(sat.cbf.h0.value(R)).epsilon(1e-14));
  }
}

TEST_CASE("backstepping_h refuses configurations outside D0") {
  const Sat sat;
  const Eigen::Matrix3d flipped = so3::exp(Eigen::Vector3d(std::numbers::pi - 0.01, 0, 0));
  CHECK_THROWS_AS(backstepping_h(sat.cbf, sat.sys.smcs, {flipped, Eigen::Vector3d::Zero()}), OutsideDomain);
}

TEST_CASE("hdot examples") {
  const Sat sat;
  oracle::Rng rng(4);
  // e^A = 0: hdot reduces to dh0 . v for any force.
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    const ActuationSplit sp = build_actuation_split(sat.sys.smcs, R);
    const Tangent v = sat.cbf.kappa.eval(R) + sp.proj_U * oracle::random_vector(rng, 3);
    const Covector F = force_from_coefficients(sat.sys.smcs, R, oracle::random_vector(rng, 2));
    CHECK(hdot(sat.cbf, sat.sys.smcs, {R, v}, F) ==
          doctest::Approx(sat.cbf.h0.differential(R).dot(v)).epsilon(1e-12));
  }

  const FlatHalfSpace flat(3);
  const MechState st{Eigen::Vector3d(0.2, 0, 0), Eigen::Vector3d(1, 0, 0)};
  CHECK(hdot(flat.c, flat.s, st, Eigen::Vector3d::Zero()) == doctest::Approx(1.0));
  CHECK(hdot(flat.c, flat.s, st, Eigen::Vector3d(2, 0, 0)) == doctest::Approx(1.0 - 0.5 * 2));
}

TEST_CASE("hdot rejects forces outside the codistribution") {
  const Sat sat;
  CHECK_THROWS_AS(hdot(sat.cbf, sat.sys.smcs, {Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 0, 0)},
                       Eigen::Vector3d(0, 0, 1)),
                  std::invalid_argument);
}

TEST_CASE("hdot matches finite differences along the flow") {
  const Sat sat;
  oracle::Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    const MechState st{R, oracle::random_vector(rng, 3)};
    const Eigen::VectorXd tau = oracle::random_vector(rng, 2, 3.0);
    const double an = hdot(sat.cbf, sat.sys.smcs, st, force_from_coefficients(sat.sys.smcs, R, tau));
    CHECK(oracle::hdot_by_flow(sat.cbf, sat.sys.smcs, st, tau) == doctest::Approx(an).epsilon(1e-4));
  }

  double_integrator::DoubleIntegratorParams p;
  p.gravity = {0, 0, -9.81};
  const auto di = double_integrator::double_integrator_smcs(p);
  const BacksteppingCBF c = double_integrator::double_integrator_cbf(p, di.manifold);
  for (int i = 0; i < 50; ++i) {
    const MechState st{Eigen::Vector3d(oracle::random_vector(rng, 3, 2.0) + Eigen::Vector3d(-1, 0, 0)),
                       oracle::random_vector(rng, 3)};
    const Eigen::VectorXd tau = oracle::random_vector(rng, 3, 3.0);
    const double an = hdot(c, di.smcs, st, force_from_coefficients(di.smcs, st.q, tau));
    CHECK(oracle::hdot_by_flow(c, di.smcs, st, tau) == doctest::Approx(an).epsilon(1e-4));
  }
}

TEST_CASE("underactuation condition") {
  const Sat sat;
  oracle::Rng rng(6);
  std::vector<Point> samples;
  for (int i = 0; i < 1000; ++i) samples.push_back(oracle::random_rotation(rng));
  const auto ok = check_underactuation_condition(sat.cbf, sat.sys.smcs, samples, 1e-12);
  CHECK(ok.pass);
  CHECK(ok.worst < 1e-12);

  Eigen::MatrixXd rows(2, 3);
  rows << 0, 1, 0, 0, 0, 1;
  const SMCS variant = satellite::satellite_smcs_on(sat.sys.manifold, rows);
  const auto bad = check_underactuation_condition(sat.cbf, variant, samples);
  CHECK_FALSE(bad.pass);
  CHECK(bad.point_pass.size() == samples.size());

  const FlatHalfSpace flat(3);
  CHECK(check_underactuation_condition(flat.c, flat.s, {Point(Eigen::Vector3d(1, 2, 3))}).pass);
}

TEST_CASE("safe_force examples") {
  const Sat sat;
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  // On the graph of kappa the force gain vanishes and a = dh0 . v + alpha(h0) > 0.
  const Eigen::Vector2d tau_des(1.5, -0.5);
  const Covector F_des = force_from_coefficients(sat.sys.smcs, I, tau_des);
  for (FilterKind kind : {FilterKind::Qp, FilterKind::HalfSontag}) {
    const SafeForceResult r = safe_force(sat.cbf, sat.sys.smcs, {I, Eigen::Vector3d(0, 0, 2)}, F_des, kind);
    CHECK(r.force == F_des);
  }
  // Desired force already satisfying the constraint is untouched by the QP filter.
  oracle::Rng rng(7);
  int untouched = 0, active = 0;
  for (int i = 0; i < 300; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    const MechState st{R, oracle::random_vector(rng, 3, 2.0)};
    const Eigen::VectorXd td = oracle::random_vector(rng, 2, 5.0);
    const SafeForceResult r = safe_force_coefficients(sat.cbf, sat.sys.smcs, st, td, FilterKind::Qp);
    if (!r.filter.active) {
      ++untouched;
      CHECK(r.coefficients == td);
    } else {
      ++active;
      CHECK(std::abs(r.margin) < 1e-10 * (1 + std::abs(r.filter.a)));
    }
    CHECK(r.margin >= -1e-10);
  }
  CHECK(untouched > 10);
  CHECK(active > 10);
}

TEST_CASE("euclidean coefficient cost also enforces the constraint") {
  const Sat sat;
  oracle::Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    const MechState st{R, oracle::random_vector(rng, 3, 2.0)};
    const auto r = safe_force_coefficients(sat.cbf, sat.sys.smcs, st, oracle::random_vector(rng, 2, 5.0),
                                           FilterKind::Qp, ForceCostNorm::EuclideanCoefficients);
    CHECK(hdot(sat.cbf, sat.sys.smcs, st, r.force) + alpha_eval(sat.cbf.alpha, r.h) >= -1e-10);
  }
}

TEST_CASE("dual Gram matrix is symmetric positive definite") {
  const Sat sat;
  oracle::Rng rng(9);
  for (int i = 0; i < 50; ++i) {
    const Eigen::MatrixXd W = dual_gram(sat.sys.smcs, oracle::random_rotation(rng));
    CHECK(W.isApprox(W.transpose()));
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(W).eigenvalues().minCoeff() > 0);
  }
}

TEST_CASE("a safe force exists wherever the underactuation check passes") {
  const Sat sat;
  oracle::Rng rng(10);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    if (sat.cbf.h0.value(R) < -0.9) continue;
    const MechState st{R, oracle::random_vector(rng, 3, 3.0)};
    const HdotTerms t = hdot_terms(sat.cbf, sat.sys.smcs, st);
    const bool hypothesis = t.actuated_error.norm() > 1e-9 ||
                            sat.cbf.h0.differential(R).dot(sat.cbf.kappa.eval(R)) >
                                -alpha_eval(sat.cbf.alpha, sat.cbf.h0.value(R));
    if (!hypothesis) continue;
    CHECK_NOTHROW(safe_force_coefficients(sat.cbf, sat.sys.smcs, st, Eigen::Vector2d::Zero(), FilterKind::Qp));
  }
}
