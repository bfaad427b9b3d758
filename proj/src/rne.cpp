#include "cablesim/rne.hpp"

#include <stdexcept>
#include <string>

#include "cablesim/kinematics.hpp"

namespace cablesim {

namespace {

struct StageMotion {
  Mat3 rot;       // parent-from-stage rotation
  Vec3 omega;     // angular velocity, stage frame
  Vec3 omega_d;   // angular acceleration, stage frame
  Vec3 accel;     // linear acceleration of the stage origin, stage frame
  Vec3 com_accel; // linear acceleration of the COM, stage frame
};

}  // namespace

VecX rne(const CableModel& model, const ChainState& state, bool gravity_on) {
  check_state(model, state, /*enforce_limits=*/false);
  const std::vector<BodyStage> stages = expand_chain(model);
  const size_t count = stages.size();

  std::vector<StageMotion> motion(count);

  // Forward recursion. The parent of stage 0 is the stationary root, whose
  // linear acceleration carries the gravity seed.
  Vec3 omega_p = Vec3::Zero();
  Vec3 omega_d_p = Vec3::Zero();
  Vec3 accel_p = gravity_on ? Vec3(-model.gravity) : Vec3::Zero();
  for (size_t k = 0; k < count; ++k) {
    const BodyStage& stage = stages[k];
    const double qd = stage.dof >= 0 ? state.qd[stage.dof] : 0.0;
    const double qdd = stage.dof >= 0 ? state.qdd[stage.dof] : 0.0;
    const double angle = stage.dof >= 0 ? state.q[stage.dof] : stage.fixed_angle;

    StageMotion& m = motion[k];
    m.rot = rotation_about(stage.axis, angle);
    const Mat3 rot_t = m.rot.transpose();

    m.omega = rot_t * (omega_p + qd * stage.axis);
    m.omega_d = rot_t * (omega_d_p + qdd * stage.axis + qd * omega_p.cross(stage.axis));
    m.accel = rot_t * (accel_p + omega_d_p.cross(stage.offset) +
                       omega_p.cross(omega_p.cross(stage.offset)));
    m.com_accel = m.accel + m.omega_d.cross(stage.com) +
                  m.omega.cross(m.omega.cross(stage.com));

    omega_p = m.omega;
    omega_d_p = m.omega_d;
    accel_p = m.accel;
  }

  // Backward recursion: force and couple exerted by the parent at each
  // stage origin, in the stage frame.
  VecX torque = VecX::Zero(model.dof());
  Vec3 child_force = Vec3::Zero();
  Vec3 child_moment = Vec3::Zero();
  for (size_t k = count; k-- > 0;) {
    const BodyStage& stage = stages[k];
    const StageMotion& m = motion[k];

    Vec3 force_from_child = Vec3::Zero();
    Vec3 moment_from_child = Vec3::Zero();
    Vec3 child_origin = Vec3::Zero();
    if (k + 1 < count) {
      const Mat3& child_rot = motion[k + 1].rot;
      force_from_child = child_rot * child_force;
      moment_from_child = child_rot * child_moment;
      child_origin = stages[k + 1].offset;
    }

    const Vec3 inertial_moment =
        stage.inertia * m.omega_d + m.omega.cross(stage.inertia * m.omega);
    const Vec3 force = force_from_child + stage.mass * m.com_accel;
    const Vec3 moment = moment_from_child + inertial_moment +
                        stage.com.cross(force) +
                        (child_origin - stage.com).cross(force_from_child);

    if (stage.dof >= 0) torque[stage.dof] = moment.dot(stage.axis);
    child_force = force;
    child_moment = moment;
  }
  return torque;
}

MatX mass_matrix(const CableModel& model, const VecX& q) {
  const int n = model.dof();
  if (q.size() != n)
    throw std::invalid_argument("q dimension mismatch: model has " +
                                std::to_string(n) + " DOF, got " +
                                std::to_string(q.size()));
  ChainState probe = ChainState::zero(n);
  probe.q = q;
  MatX mass(n, n);
  for (int j = 0; j < n; ++j) {
    probe.qdd.setZero();
    probe.qdd[j] = 1.0;
    mass.col(j) = rne(model, probe, /*gravity_on=*/false);
  }
  return 0.5 * (mass + mass.transpose());
}

VecX bias_forces(const CableModel& model, const VecX& q, const VecX& qd) {
  ChainState state = ChainState::zero(model.dof());
  state.q = q;
  state.qd = qd;
  return rne(model, state, /*gravity_on=*/true);
}

VecX gravity_torque(const CableModel& model, const VecX& q) {
  ChainState state = ChainState::zero(model.dof());
  state.q = q;
  return rne(model, state, /*gravity_on=*/true);
}

VecX load_torque(const CableModel& model, const VecX& q,
                 const std::vector<ExternalLoad>& loads) {
  VecX torque = VecX::Zero(model.dof());
  for (const ExternalLoad& load : loads) {
    const MatX jac = jacobian(model, q, load.attachment);
    torque -= jac.transpose() * load.wrench;
  }
  return torque;
}

DynamicsTerms dynamics_terms(const CableModel& model, const ChainState& state) {
  DynamicsTerms terms;
  terms.mass_matrix = mass_matrix(model, state.q);
  terms.bias = bias_forces(model, state.q, state.qd);
  terms.gravity_torque = gravity_torque(model, state.q);
  terms.rne_torque = rne(model, state, /*gravity_on=*/true);
  return terms;
}

VecX inverse_dynamics_full(const CableModel& model, const ChainState& state,
                           const std::vector<ExternalLoad>& loads) {
  const VecX spring = model.stiffness_vector().cwiseProduct(state.q);
  const VecX damper = model.damping_vector().cwiseProduct(state.qd);
  return rne(model, state, /*gravity_on=*/true) +
         load_torque(model, state.q, loads) + spring + damper;
}

}  // namespace cablesim
