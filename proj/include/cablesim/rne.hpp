#pragma once

#include "cablesim/types.hpp"

namespace cablesim {

/// Inverse-dynamics terms of the chain at one state.
/// mass_matrix is symmetric positive definite for any nondegenerate model;
/// rne_torque = mass_matrix * qdd + bias holds to roundoff.
struct DynamicsTerms {
  MatX mass_matrix;     // M(q)
  VecX bias;            // C(q, qd) qd + G(q)
  VecX gravity_torque;  // G(q)
  VecX rne_torque;      // M qdd + C qd + G
};

/// Joint torques that realize the state's motion: two recursions over the
/// expanded chain, velocities and accelerations base to tip, forces and
/// moments tip to base. The base is stationary; when gravity_on its linear
/// acceleration is seeded with -gravity, which folds the gravity torque
/// into the result. With positive pitch sagging downward, holding a
/// horizontal link against gravity takes a negative torque.
VecX rne(const CableModel& model, const ChainState& state, bool gravity_on = true);

/// M(q), extracted column by column from rne with unit accelerations,
/// zero velocity, gravity off. Symmetrized before return.
MatX mass_matrix(const CableModel& model, const VecX& q);

/// C(q, qd) qd + G(q) = rne at zero acceleration.
VecX bias_forces(const CableModel& model, const VecX& q, const VecX& qd);

VecX gravity_torque(const CableModel& model, const VecX& q);

/// Generalized holding torque of external loads: -sum_i J_i^T w_i. For a
/// constant world wrench this is the gradient of its potential.
VecX load_torque(const CableModel& model, const VecX& q,
                 const std::vector<ExternalLoad>& loads);

DynamicsTerms dynamics_terms(const CableModel& model, const ChainState& state);

/// Actuation torque balancing the full joint-space equation: rne torque
/// plus load, spring and damper holding terms. Zero for a free passive
/// chain following its natural motion.
VecX inverse_dynamics_full(const CableModel& model, const ChainState& state,
                           const std::vector<ExternalLoad>& loads);

}  // namespace cablesim
