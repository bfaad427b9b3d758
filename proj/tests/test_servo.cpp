#include <doctest.h>

#include <random>

#include "cablesim/model.hpp"
#include "cablesim/servo.hpp"

using namespace cablesim;

namespace {

CableModel servo_chain() {
  CableModel model = identification_subchain(default_paper_model());
  for (JointSpec& joint : model.joints)
    if (joint.pitch && !joint.pitch->locked()) {
      joint.pitch->lower = -2.0 * kPi;
      joint.pitch->upper = 2.0 * kPi;
    }
  return model;
}

}  // namespace

TEST_CASE("frame error basics") {
  const FramePose identity = FramePose::identity();
  CHECK(frame_error(identity, identity).norm() == 0.0);

  FramePose shifted = identity;
  shifted.translation = Vec3(0.1, 0.0, 0.0);
  const Vec6 error = frame_error(identity, shifted);
  CHECK((error - (Vec6() << 0.1, 0, 0, 0, 0, 0).finished()).norm() == 0.0);
}

TEST_CASE("applying the error twist reaches the target exactly") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> component(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    FramePose current, target;
    current.rotation = rot_exp(Vec3(component(rng), component(rng), component(rng)));
    current.translation = Vec3(component(rng), component(rng), component(rng));
    target.rotation = rot_exp(Vec3(component(rng), component(rng), component(rng)));
    target.translation = Vec3(component(rng), component(rng), component(rng));

    const Vec6 error = frame_error(current, target);
    const Vec3 reached_t = current.translation + error.head<3>();
    const Mat3 reached_r = rot_exp(error.tail<3>()) * current.rotation;
    CHECK((reached_t - target.translation).norm() < 1e-9);
    CHECK((reached_r - target.rotation).norm() < 1e-9);
  }
}

TEST_CASE("zero error leaves the controller state untouched") {
  ServoGains gains;
  ServoIntegrator integ;
  const MatX jac = MatX::Random(6, 4);
  const VecX command = servo_step(Vec6::Zero(), jac, gains, integ);
  CHECK(command.norm() == 0.0);
  CHECK(!integ.has_previous);
  CHECK(integ.integral.norm() == 0.0);
}

TEST_CASE("square identity Jacobian passes the velocity through") {
  ServoGains gains;
  gains.damping_lambda = 0.0;
  gains.time_constant = 2.0;
  ServoIntegrator integ;
  Vec6 error;
  error << 0.2, -0.4, 0.6, 0.1, 0.0, -0.1;
  const VecX command = servo_step(error, MatX::Identity(6, 6), gains, integ);
  CHECK((command - error / 2.0).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("rank-deficient Jacobian without damping is an error") {
  ServoGains gains;
  gains.damping_lambda = 0.0;
  ServoIntegrator integ;
  Vec6 error = Vec6::Ones();
  const MatX jac = MatX::Zero(6, 4);
  CHECK_THROWS_AS(servo_step(error, jac, gains, integ), std::runtime_error);
  gains.damping_lambda = 0.05;
  CHECK_NOTHROW(servo_step(error, jac, gains, integ));
}

TEST_CASE("damped pseudoinverse respects the SVD gain bound") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> scale(-1.0, 1.0);
  ServoGains gains;  // kp = 1, pure P
  for (int trial = 0; trial < 1000; ++trial) {
    MatX jac = MatX::Random(6, 4);
    if (trial % 3 == 0) jac.col(1) = jac.col(0);           // rank-deficient
    if (trial % 5 == 0) jac *= 1e-4;                       // near-singular
    Vec6 error;
    for (int i = 0; i < 6; ++i) error[i] = scale(rng);
    ServoIntegrator integ;
    const VecX command = servo_step(error, jac, gains, integ);

    const Eigen::JacobiSVD<MatX> svd(jac);
    double gain = 0.0;
    for (int s = 0; s < svd.singularValues().size(); ++s) {
      const double sigma = svd.singularValues()[s];
      gain = std::max(gain,
                      sigma / (sigma * sigma + gains.damping_lambda * gains.damping_lambda));
    }
    CHECK(command.norm() <= gain * (error / gains.time_constant).norm() + 1e-12);
  }
}

TEST_CASE("kinematic plant converges to reachable targets") {
  const CableModel model = servo_chain();
  ServoGains gains;
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    VecX q_target(4);
    for (int i = 0; i < 4; ++i) q_target[i] = angle(rng);
    const FramePose target = forward_kinematics(model, q_target).tip;

    KinematicPlant plant(model, VecX::Zero(4));
    const ServoResult result = run_servo(plant, target, gains);
    CHECK(result.converged);
    CHECK(!result.diverged);
    CHECK(result.iterations <= gains.max_iters);
    CHECK(static_cast<int>(result.error_history.size()) == result.iterations);

    // Position error decreases monotonically once the transient is over.
    for (size_t k = 5; k + 1 < result.error_history.size(); ++k)
      CHECK(result.error_history[k + 1].x() <= result.error_history[k].x() + 1e-12);
  }
}

TEST_CASE("servo at the target converges in zero iterations") {
  const CableModel model = servo_chain();
  KinematicPlant plant(model, VecX::Constant(4, 0.25));
  const FramePose here = plant.tip();
  const ServoResult result = run_servo(plant, here, ServoGains{});
  CHECK(result.converged);
  CHECK(result.iterations == 0);
  CHECK(result.error_history.empty());
  CHECK((plant.joints() - VecX::Constant(4, 0.25)).norm() == 0.0);
}

TEST_CASE("unreachable target is reported, not chased forever") {
  const CableModel model = servo_chain();
  FramePose target;
  target.translation = Vec3(10.0, 0.0, 0.0);  // far outside the 0.35 m chain
  KinematicPlant plant(model, VecX::Zero(4));
  ServoGains gains;
  gains.max_iters = 500;
  const ServoResult result = run_servo(plant, target, gains);
  CHECK(!result.converged);
  CHECK(static_cast<int>(result.error_history.size()) == result.iterations);
}
