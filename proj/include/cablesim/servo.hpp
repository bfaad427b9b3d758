#pragma once

#include "cablesim/kinematics.hpp"
#include "cablesim/types.hpp"

namespace cablesim {

struct ServoGains {
  double kp = 1.0;
  double ki = 0.0;
  double kd = 0.0;
  double time_constant = 1.0;    // s, error-to-velocity divisor
  double damping_lambda = 0.01;  // damped pseudoinverse factor
  double pos_tol = 1e-3;         // m
  double rot_tol = 0.01;         // rad
  int max_iters = 2000;
  double loop_dt = 0.01;         // s, shared with the plant
  double integrator_limit = 10.0;
};

/// Task-space error: translation difference, then the log map of the
/// relative rotation expressed in the world frame.
Vec6 frame_error(const FramePose& current, const FramePose& target);

struct ServoIntegrator {
  VecX integral;
  VecX previous;
  bool has_previous = false;
};

/// One controller update: Cartesian velocity from the error, joint velocity
/// through the damped pseudoinverse, then per-joint PID with a clamped
/// integrator. A zero error returns a zero command and leaves the
/// integrator untouched. Throws on a singular Jacobian with zero damping.
VecX servo_step(const Vec6& error, const MatX& jac, const ServoGains& gains,
                ServoIntegrator& integ);

/// Chain the controller can drive: exposes the tip frame and Jacobian and
/// executes joint-velocity commands over one control period.
class Plant {
 public:
  virtual ~Plant() = default;
  virtual FramePose tip() const = 0;
  virtual MatX jacobian() const = 0;
  virtual VecX joints() const = 0;
  virtual void apply(const VecX& velocity_command, double dt) = 0;
};

/// Ideal velocity-integrating plant on the model's kinematics; commands are
/// executed exactly, positions clamped to the joint limits.
class KinematicPlant : public Plant {
 public:
  KinematicPlant(CableModel model, VecX q);

  FramePose tip() const override;
  MatX jacobian() const override;
  VecX joints() const override { return q_; }
  void apply(const VecX& velocity_command, double dt) override;

 private:
  CableModel model_;
  VecX q_;
};

struct ServoResult {
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  std::vector<Eigen::Vector2d> error_history;  // (position m, rotation rad)
  VecX final_joints;
};

/// Loops servo_step against the plant until both tolerances are met, the
/// iteration budget runs out, or the position error grows tenfold.
ServoResult run_servo(Plant& plant, const FramePose& target, const ServoGains& gains);

}  // namespace cablesim
