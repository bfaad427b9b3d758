#pragma once

#include "cablesim/types.hpp"

namespace cablesim {

/// Loads applied from a given time onward, replacing the previous set.
struct LoadEvent {
  double time = 0.0;
  std::vector<ExternalLoad> loads;
};

using LoadSchedule = std::vector<LoadEvent>;

struct Trajectory {
  double dt = 0.0;
  std::vector<double> time;
  std::vector<ChainState> samples;
  std::vector<double> events;  // times at which the load set changed
};

/// Joint accelerations of the free passive chain under the given loads:
/// solves M qdd = -(bias + load + K q + D qd) by Cholesky.
VecX acceleration(const CableModel& model, const ChainState& state,
                  const std::vector<ExternalLoad>& loads);

/// One velocity-first Euler step. The joint damping term acts on the new
/// velocity (the chain's near-massless counter-rotation modes make explicit
/// damping unstable at practical steps); spring, gravity and Coriolis terms
/// stay explicit, so the scheme is symplectic when damping is zero. Joint
/// limits clamp the position and zero the velocity of the clamped DOF. The
/// returned qdd is the acceleration at the input state.
ChainState step(const CableModel& model, const ChainState& state,
                const std::vector<ExternalLoad>& loads, double dt);

/// Integrates for the given duration, recording every step. Each recorded
/// sample's qdd is the acceleration evaluated at that sample, so samples
/// satisfy the equation of motion exactly. Deterministic.
Trajectory simulate(const CableModel& model, const ChainState& initial,
                    const LoadSchedule& schedule, double duration, double dt);

struct EquilibriumOptions {
  double tolerance = 1e-9;  // N m, infinity norm of the residual
  int max_newton_iterations = 100;
  double fd_epsilon = 1e-6;
  int max_rounds = 4;  // Newton attempts interleaved with damped settling
};

/// Joint residual at a candidate equilibrium: K q + G(q) + load torque.
VecX equilibrium_residual(const CableModel& model, const VecX& q,
                          const std::vector<ExternalLoad>& loads);

/// Static equilibrium: Newton iteration on the residual with backtracking,
/// falling back to damped dynamic settling when Newton stalls. Throws on
/// non-convergence, reporting the final residual.
VecX static_equilibrium(const CableModel& model,
                        const std::vector<ExternalLoad>& loads,
                        const VecX& q_init,
                        const EquilibriumOptions& options = {});

VecX static_equilibrium(const CableModel& model,
                        const std::vector<ExternalLoad>& loads);

}  // namespace cablesim
