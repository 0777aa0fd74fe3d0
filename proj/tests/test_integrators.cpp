#include <doctest.h>

#include <cmath>
#include <limits>

#include "geocbf/errors.hpp"
#include "geocbf/integrators.hpp"
#include "geocbf/oracles.hpp"
#include "geocbf/satellite.hpp"

using namespace geocbf;

namespace {

SMCS free_space(int n) {
  return SMCS::with_constant_codistribution(std::make_shared<const EuclideanSpace>(n), Potential::zero(n),
                                            Eigen::MatrixXd::Identity(n, n));
}

ObserverValues no_values(const MechState&, const Eigen::VectorXd&) { return {}; }

}  // namespace

TEST_CASE("linear flow in R^n is exact") {
  const SMCS s = free_space(3);
  const MechState st{Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(0.5, -1, 0.25)};
  const MechState next = step_with_force(s, st, Eigen::Vector3d::Zero(), 0.125);
  CHECK(next.q == Eigen::MatrixXd(Eigen::Vector3d(1.0625, 1.875, 3.03125)));
  CHECK(next.v == st.v);
}

TEST_CASE("constant force in R^n matches the quadratic solution") {
  const SMCS s = free_space(2);
  const MechState st{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
  const MechState next = step_with_force(s, st, Eigen::Vector2d(0, 2), 0.5);
  CHECK(Eigen::Vector2d(next.q).isApprox(Eigen::Vector2d(0.5, 0.25), 1e-15));
  CHECK(next.v.isApprox(Eigen::Vector2d(1, 1), 1e-15));
}

TEST_CASE("principal-axis spin matches the closed form each step") {
  const auto sys = satellite::satellite_smcs({});
  const Eigen::Matrix3d R0 = so3::exp(Eigen::Vector3d(0.4, -0.1, 0.3));
  MechState st{R0, Eigen::Vector3d(0, 0, 2.0)};
  for (int k = 1; k <= 500; ++k) {
    st = step_with_force(sys.smcs, st, Eigen::Vector2d::Zero(), 1e-3);
    const Eigen::Matrix3d exact = R0 * so3::exp(Eigen::Vector3d(0, 0, 2.0e-3 * k));
    REQUIRE((Eigen::Matrix3d(st.q) - exact).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("non-finite states raise Divergence with the step end time") {
  const SMCS s = free_space(1);
  const ForceLaw blowup = [](const MechState&) {
    return Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity());
  };
  try {
    step(s, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)}, blowup, 0.1, ControllerSampling::Stage, 2.0);
    FAIL("expected divergence");
  } catch (const Divergence& d) {
    CHECK(d.time() == doctest::Approx(2.1));
  }
}

TEST_CASE("simulate records a divergence instead of swallowing it") {
  const SMCS s = free_space(1);
  // v' = v^2 blows up at t = 1 from v(0) = 1.
  const ForceLaw law = [](const MechState& st) { return Eigen::VectorXd(st.v.array().square()); };
  const Trajectory t = simulate(s, law, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)}, 1e-2, 3.0, no_values);
  REQUIRE(t.divergence_time.has_value());
  CHECK(*t.divergence_time > 0.9);
  CHECK(*t.divergence_time < 1.5);
  CHECK(t.samples.size() < sample_count(1e-2, 3.0));
}

TEST_CASE("simulate bookkeeping") {
  CHECK(sample_count(1e-3, 20.0) == 20001);
  CHECK(sample_count(0.3, 1.0) == 4);
  CHECK(sample_count(0.1, 0.3) == 4);
  const SMCS s = free_space(2);
  const ForceLaw zero = [](const MechState&) { return Eigen::VectorXd::Zero(2); };
  const MechState st0{Eigen::Vector2d(1, -1), Eigen::Vector2d::Zero()};
  const Trajectory t = simulate(s, zero, st0, 0.01, 1.0, no_values, ControllerSampling::Stage, "abc");
  CHECK(t.samples.size() == 101);
  CHECK(t.meta.dt == 0.01);
  CHECK(t.meta.integrator == "rkmk4");
  CHECK(t.meta.scenario_hash == "abc");
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    CHECK(t.samples[k].t == doctest::Approx(0.01 * k).epsilon(1e-14));
    CHECK(t.samples[k].q == st0.q);
  }
  CHECK_THROWS_AS(simulate(s, zero, st0, 0.5, 0.1, no_values), std::invalid_argument);
  CHECK_THROWS_AS(simulate(s, zero, st0, 0.0, 1.0, no_values), std::invalid_argument);
}

TEST_CASE("zero-order hold evaluates the controller once per step") {
  const SMCS s = free_space(1);
  int calls = 0;
  const ForceLaw law = [&](const MechState&) {
    ++calls;
    return Eigen::VectorXd::Zero(1);
  };
  const MechState st0{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)};
  step(s, st0, law, 0.1, ControllerSampling::ZeroOrderHold);
  CHECK(calls == 1);
  calls = 0;
  step(s, st0, law, 0.1, ControllerSampling::Stage);
  CHECK(calls == 4);
}

TEST_CASE("rotations stay valid over long runs") {
  const auto sys = satellite::satellite_smcs({});
  MechState st{Eigen::Matrix3d::Identity(), Eigen::Vector3d(3, -2, 5)};
  double worst = 0.0;
  for (int k = 0; k < 20000; ++k) {
    st = step_with_force(sys.smcs, st, Eigen::Vector2d(0.1, 0.2), 1e-2);
    worst = std::max(worst, so3::orthonormality_defect(st.q));
  }
  CHECK(worst < 1e-8);
}
