#include <doctest.h>

#include "geocbf/errors.hpp"
#include "geocbf/manifold.hpp"
#include "geocbf/oracles.hpp"
#include "geocbf/so3.hpp"

using namespace geocbf;

namespace {

so3::RigidBodySO3 body(double j1, double j3) {
  return so3::RigidBodySO3(Eigen::Vector3d(j1, j1, j3).asDiagonal());
}

}  // namespace

TEST_CASE("flat and sharp examples") {
  const EuclideanSpace r3(3);
  const Eigen::Vector3d x = Eigen::Vector3d::Zero();
  CHECK(flat(r3, x, Eigen::Vector3d(1, 2, 3)) == Eigen::Vector3d(1, 2, 3));
  CHECK(sharp(r3, x, Eigen::Vector3d(1, 2, 3)) == Eigen::Vector3d(1, 2, 3));

  const auto so3m = body(1, 2);
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(flat(so3m, I, Eigen::Vector3d(0, 0, 1)) == Eigen::Vector3d(0, 0, 2));
  CHECK(sharp(so3m, I, Eigen::Vector3d(0, 0, 2)).isApprox(Eigen::Vector3d(0, 0, 1)));

  Eigen::Matrix2d M;
  M << 2, 0, 0, 1;
  const EuclideanSpace r2(M);
  CHECK(flat(r2, Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1)) == Eigen::Vector2d(2, 1));
}

TEST_CASE("riemannian_grad examples and pairing identity") {
  const EuclideanSpace r2(2);
  CHECK(riemannian_grad(r2, Eigen::Vector2d::Zero(), Eigen::Vector2d(2, 0)) == Eigen::Vector2d(2, 0));
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(riemannian_grad(body(1, 2), I, Eigen::Vector3d(0, 2, 0)).isApprox(Eigen::Vector3d(0, 2, 0)));

  const auto m = body(2, 4);
  const Eigen::Vector3d dh(2, 0, 4);
  const Tangent g = riemannian_grad(m, I, dh);
  // Independent solve of M g = dh.
  const Eigen::Vector3d ref = Eigen::Matrix3d(Eigen::Vector3d(2, 2, 4).asDiagonal()).fullPivLu().solve(dh);
  CHECK(g.isApprox(ref, 1e-15));
  CHECK(g.isApprox(Eigen::Vector3d(1, 0, 1), 1e-15));
  oracle::Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd v = oracle::random_vector(rng, 3);
    CHECK(inner(m, I, g, v) == doctest::Approx(dh.dot(v)).epsilon(1e-14));
  }
}

TEST_CASE("musical maps check dimensions") {
  const EuclideanSpace r3(3);
  CHECK_THROWS_AS(flat(r3, Eigen::Vector3d::Zero(), Eigen::Vector2d(1, 2)), DimensionMismatch);
  CHECK_THROWS_AS(sharp(r3, Eigen::Vector3d::Zero(), Eigen::Vector4d::Zero()), DimensionMismatch);
  CHECK_THROWS_AS(EuclideanSpace(Eigen::Matrix2d::Zero()), std::invalid_argument);
}

TEST_CASE("Euclidean instance is exactly flat") {
  oracle::Rng rng(2);
  const EuclideanSpace r4(oracle::random_spd(rng, 4));
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd p = oracle::random_vector(rng, 4), u = oracle::random_vector(rng, 4),
                          v = oracle::random_vector(rng, 4);
    CHECK(r4.connection(p, u, v).isZero(0.0));
    CHECK(r4.retract(p, u, 0.0) == p);
    CHECK(r4.retract(p, u, 0.25) == Eigen::VectorXd(p + 0.25 * u));
  }
}

TEST_CASE("covariant derivative of fields") {
  const EuclideanSpace r2(2);
  const VectorField c = VectorField::constant(Eigen::Vector2d(3, -1));
  CHECK(covariant_derivative_of_field(r2, Eigen::Vector2d(0.4, 9), Eigen::Vector2d(1, 2), c).isZero(0.0));

  // k(x) = (x2, 0) without an analytic derivative: finite differences are used.
  const VectorField k{[](const Point& x) { return Tangent(Eigen::Vector2d(x(1), 0)); }, {}};
  const Tangent d = covariant_derivative_of_field(r2, Eigen::Vector2d(0.3, -0.2), Eigen::Vector2d(1, 1), k);
  CHECK(d.isApprox(Eigen::Vector2d(1, 0), 1e-9));

  // Left-invariant field on SO(3): only the connection term survives.
  const auto m = body(1, 2);
  oracle::Rng rng(3);
  const Eigen::Matrix3d R = oracle::random_rotation(rng);
  const Tangent e1 = Eigen::Vector3d::UnitX(), e2 = Eigen::Vector3d::UnitY();
  CHECK(covariant_derivative_of_field(m, R, e2, VectorField::constant(e1)) == m.connection(R, e2, e1));
}

TEST_CASE("covariant derivative of a field satisfies d<k,k> = 2<nabla k, k> along geodesics") {
  const auto m = body(1, 2);
  const VectorField k{[](const Point& q) {
                        const Eigen::Matrix3d R = q;
                        return Tangent(R.transpose() * Eigen::Vector3d(0.2, 1.0, -0.5));
                      },
                      {}};
  oracle::Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Tangent u = oracle::random_vector(rng, 3);
    const double fd = oracle::central_difference(
        [&](double t) {
          const Point Rt = m.retract(R, u, t);
          return inner(m, Rt, k.eval(Rt), k.eval(Rt));
        },
        1e-5);
    const double an = 2 * inner(m, R, covariant_derivative_of_field(m, R, u, k), k.eval(R));
    CHECK(fd == doctest::Approx(an).epsilon(1e-6));
  }
}

TEST_CASE("directional derivatives are linear in the direction") {
  const auto m = body(1, 2);
  const VectorField k{[](const Point& q) {
                        const Eigen::Matrix3d R = q;
                        return Tangent(R.row(2).transpose().cwiseProduct(Eigen::Vector3d(1, 2, 3)));
                      },
                      {}};
  oracle::Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Tangent u = oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3);
    const Tangent lhs = directional_derivative(m, k, R, 2.0 * u - v);
    const Tangent rhs = 2.0 * directional_derivative(m, k, R, u) - directional_derivative(m, k, R, v);
    CHECK((lhs - rhs).norm() < 1e-8);
  }
}

TEST_CASE("covariant derivative of a projection") {
  const EuclideanSpace r3(3);
  Eigen::Matrix3d P = Eigen::Vector3d(1, 1, 0).asDiagonal();
  CHECK(covariant_derivative_of_projection(r3, Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 2, 3), P,
                                           Eigen::Vector3d(-1, 0, 4))
            .isZero(0.0));

  const auto m = body(1, 2);
  oracle::Rng rng(6);
  const Eigen::Matrix3d R = oracle::random_rotation(rng);
  CHECK(covariant_derivative_of_projection(m, R, Eigen::Vector3d(0.3, 1, 2), Eigen::Matrix3d::Identity(),
                                           Eigen::Vector3d(1, -1, 0.5))
            .norm() < 1e-15);

  const Tangent v = Eigen::Vector3d::UnitY(), e = Eigen::Vector3d::UnitZ();
  const Tangent expected = -P * m.connection(R, v, e);
  CHECK((covariant_derivative_of_projection(m, R, v, P, e) - expected).norm() < 1e-15);

  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity() * 0.5;
  CHECK_THROWS_AS(covariant_derivative_of_projection(m, R, v, bad, e), std::invalid_argument);
}

TEST_CASE("projection product rule along the retraction") {
  // nabla_v (P E) = (nabla_v P) E + P nabla_v E for a non-constant field E.
  const auto m = body(1, 3);
  const Eigen::Matrix3d P = Eigen::Vector3d(1, 1, 0).asDiagonal();
  const VectorField E{[](const Point& q) {
                        const Eigen::Matrix3d R = q;
                        return Tangent(R.transpose() * Eigen::Vector3d(1, -2, 0.5));
                      },
                      {}};
  const VectorField PE{[&](const Point& q) { return Tangent(P * E.eval(q)); }, {}};
  oracle::Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Tangent v = oracle::random_vector(rng, 3);
    const Tangent lhs = covariant_derivative_of_field(m, R, v, PE);
    const Tangent rhs = covariant_derivative_of_projection(m, R, v, P, E.eval(R)) +
                        P * covariant_derivative_of_field(m, R, v, E);
    CHECK((lhs - rhs).norm() < 1e-8);
  }
}

TEST_CASE("SO(3) connection identities") {
  const auto m = body(1, 2);
  const Eigen::Matrix3d J = Eigen::Vector3d(1, 1, 2).asDiagonal();
  oracle::Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d R = oracle::random_rotation(rng);
    const Eigen::Vector3d u = oracle::random_vector(rng, 3), v = oracle::random_vector(rng, 3),
                          w = oracle::random_vector(rng, 3);
    CHECK((m.connection(R, u, v) - m.connection(R, v, u) - u.cross(v)).norm() < 1e-14);
    CHECK(std::abs(inner(m, R, m.connection(R, u, v), w) + inner(m, R, v, m.connection(R, u, w))) <
          1e-13);
    const Eigen::Vector3d euler = J.inverse() * (J * u).cross(u);
    CHECK((-m.connection(R, u, u) - euler).norm() < 1e-14);
  }
}

TEST_CASE("metric is symmetric positive definite") {
  const auto m = body(1, 2);
  const Eigen::MatrixXd M = m.metric(Eigen::Matrix3d::Identity());
  CHECK(M.isApprox(M.transpose()));
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff() > 0);
  CHECK_THROWS_AS(so3::RigidBodySO3(Eigen::Matrix3d(Eigen::Vector3d(1, -1, 2).asDiagonal())),
                  std::invalid_argument);
}
