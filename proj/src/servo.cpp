#include "cablesim/servo.hpp"

#include <stdexcept>
#include <utility>

namespace cablesim {

Vec6 frame_error(const FramePose& current, const FramePose& target) {
  Vec6 error;
  error.head<3>() = target.translation - current.translation;
  error.tail<3>() =
      current.rotation * rot_log(current.rotation.transpose() * target.rotation);
  return error;
}

VecX servo_step(const Vec6& error, const MatX& jac, const ServoGains& gains,
                ServoIntegrator& integ) {
  const int n = static_cast<int>(jac.cols());
  if (integ.integral.size() != n) {
    integ.integral = VecX::Zero(n);
    integ.previous = VecX::Zero(n);
    integ.has_previous = false;
  }
  if (error.isZero(0.0)) return VecX::Zero(n);

  const Vec6 velocity = error / gains.time_constant;

  // qd = J^T (J J^T + lambda^2 I)^-1 v
  const double lambda2 = gains.damping_lambda * gains.damping_lambda;
  const MatX normal = jac * jac.transpose() + lambda2 * MatX::Identity(6, 6);
  VecX qd_raw;
  if (gains.damping_lambda > 0.0) {
    qd_raw = jac.transpose() * Eigen::LDLT<MatX>(normal).solve(velocity);
  } else {
    Eigen::FullPivLU<MatX> lu(normal);
    if (!lu.isInvertible())
      throw std::runtime_error("servo_step: singular Jacobian with zero damping");
    qd_raw = jac.transpose() * lu.solve(velocity);
  }

  VecX derivative = VecX::Zero(n);
  if (integ.has_previous) derivative = (qd_raw - integ.previous) / gains.loop_dt;
  integ.integral += qd_raw * gains.loop_dt;
  integ.integral = integ.integral.cwiseMax(-gains.integrator_limit)
                       .cwiseMin(gains.integrator_limit);
  integ.previous = qd_raw;
  integ.has_previous = true;

  return gains.kp * qd_raw + gains.ki * integ.integral + gains.kd * derivative;
}

KinematicPlant::KinematicPlant(CableModel model, VecX q)
    : model_(std::move(model)), q_(std::move(q)) {
  if (q_.size() != model_.dof())
    throw std::invalid_argument("KinematicPlant: q dimension mismatch");
}

FramePose KinematicPlant::tip() const {
  return forward_kinematics(model_, q_).tip;
}

MatX KinematicPlant::jacobian() const { return tip_jacobian(model_, q_); }

void KinematicPlant::apply(const VecX& velocity_command, double dt) {
  q_ += velocity_command * dt;
  q_ = q_.cwiseMax(model_.lower_limits()).cwiseMin(model_.upper_limits());
}

ServoResult run_servo(Plant& plant, const FramePose& target, const ServoGains& gains) {
  ServoResult result;
  ServoIntegrator integ;

  Vec6 error = frame_error(plant.tip(), target);
  const double initial_pos = error.head<3>().norm();
  while (true) {
    const double pos = error.head<3>().norm();
    const double rot = error.tail<3>().norm();
    if (pos < gains.pos_tol && rot < gains.rot_tol) {
      result.converged = true;
      break;
    }
    if (pos > 10.0 * (initial_pos + gains.pos_tol)) {
      result.diverged = true;
      break;
    }
    if (result.iterations >= gains.max_iters) break;

    const VecX command = servo_step(error, plant.jacobian(), gains, integ);
    plant.apply(command, gains.loop_dt);
    result.error_history.emplace_back(pos, rot);
    ++result.iterations;
    error = frame_error(plant.tip(), target);
  }
  result.final_joints = plant.joints();
  return result;
}

}  // namespace cablesim
