#include "cablesim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "cablesim/rne.hpp"

namespace cablesim {

VecX acceleration(const CableModel& model, const ChainState& state,
                  const std::vector<ExternalLoad>& loads) {
  const MatX mass = mass_matrix(model, state.q);
  const VecX rhs = -(bias_forces(model, state.q, state.qd) +
                     load_torque(model, state.q, loads) +
                     model.stiffness_vector().cwiseProduct(state.q) +
                     model.damping_vector().cwiseProduct(state.qd));
  Eigen::LLT<MatX> llt(mass);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("acceleration: mass matrix not positive definite (degenerate model)");
  return llt.solve(rhs);
}

namespace {

// Velocity-first Euler update. The joint damping acts on the new velocity:
// the chain has near-massless counter-rotation modes (thin-rod inertias)
// whose explicit damping rate D/lambda_min exceeds the stable step, so the
// damping term is folded into the velocity solve. Spring and bias stay
// explicit, which keeps the scheme symplectic when D = 0.
void advance(const CableModel& model, ChainState& state,
             const std::vector<ExternalLoad>& loads, double dt) {
  const MatX mass = mass_matrix(model, state.q);
  const VecX damping = model.damping_vector();
  const VecX explicit_torque = bias_forces(model, state.q, state.qd) +
                               load_torque(model, state.q, loads) +
                               model.stiffness_vector().cwiseProduct(state.q);
  MatX lhs = mass;
  lhs.diagonal() += dt * damping;
  Eigen::LLT<MatX> llt(lhs);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("step: mass matrix not positive definite (degenerate model)");
  state.qd = llt.solve(mass * state.qd - dt * explicit_torque);
  state.q += state.qd * dt;

  const VecX lo = model.lower_limits();
  const VecX hi = model.upper_limits();
  for (int i = 0; i < state.q.size(); ++i) {
    if (state.q[i] < lo[i]) {
      state.q[i] = lo[i];
      state.qd[i] = 0.0;
    } else if (state.q[i] > hi[i]) {
      state.q[i] = hi[i];
      state.qd[i] = 0.0;
    }
  }
}

}  // namespace

ChainState step(const CableModel& model, const ChainState& state,
                const std::vector<ExternalLoad>& loads, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  check_state(model, state, /*enforce_limits=*/false);

  ChainState next = state;
  next.qdd = acceleration(model, state, loads);
  advance(model, next, loads, dt);
  return next;
}

namespace {

const std::vector<ExternalLoad>& active_loads(const LoadSchedule& schedule,
                                              double t,
                                              const std::vector<ExternalLoad>& none) {
  const std::vector<ExternalLoad>* current = &none;
  for (const LoadEvent& event : schedule) {
    if (event.time <= t + 1e-15) current = &event.loads;
  }
  return *current;
}

}  // namespace

Trajectory simulate(const CableModel& model, const ChainState& initial,
                    const LoadSchedule& schedule, double duration, double dt) {
  if (!(duration > 0.0)) throw std::invalid_argument("simulate: duration must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be positive");
  check_state(model, initial, /*enforce_limits=*/true);

  LoadSchedule sorted = schedule;
  std::sort(sorted.begin(), sorted.end(),
            [](const LoadEvent& a, const LoadEvent& b) { return a.time < b.time; });

  Trajectory traj;
  traj.dt = dt;
  const int steps = static_cast<int>(std::llround(duration / dt));
  traj.time.reserve(steps + 1);
  traj.samples.reserve(steps + 1);
  for (const LoadEvent& event : sorted)
    if (event.time > 0.0 && event.time <= duration) traj.events.push_back(event.time);

  const std::vector<ExternalLoad> none;
  ChainState state = initial;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const std::vector<ExternalLoad>& loads = active_loads(sorted, t, none);
    state.qdd = acceleration(model, state, loads);
    traj.time.push_back(t);
    traj.samples.push_back(state);
    if (k < steps) advance(model, state, loads, dt);
  }
  return traj;
}

VecX equilibrium_residual(const CableModel& model, const VecX& q,
                          const std::vector<ExternalLoad>& loads) {
  return model.stiffness_vector().cwiseProduct(q) + gravity_torque(model, q) +
         load_torque(model, q, loads);
}

namespace {

MatX residual_jacobian(const CableModel& model, const VecX& q,
                       const std::vector<ExternalLoad>& loads, double eps) {
  const int n = static_cast<int>(q.size());
  MatX jac(n, n);
  for (int j = 0; j < n; ++j) {
    VecX hi = q, lo = q;
    hi[j] += eps;
    lo[j] -= eps;
    jac.col(j) = (equilibrium_residual(model, hi, loads) -
                  equilibrium_residual(model, lo, loads)) /
                 (2.0 * eps);
  }
  return jac;
}

// Settles the dynamics with added viscous damping until the chain is slow,
// giving Newton a starting point near the attractor.
VecX damped_settle(const CableModel& model, const std::vector<ExternalLoad>& loads,
                   const VecX& q_init) {
  CableModel damped = model;
  for (JointSpec& joint : damped.joints) {
    if (joint.pitch && !joint.pitch->locked())
      joint.pitch->damping = std::max(joint.pitch->damping, 0.5);
    if (joint.roll && !joint.roll->locked())
      joint.roll->damping = std::max(joint.roll->damping, 0.5);
  }
  ChainState state = ChainState::zero(model.dof());
  state.q = q_init.cwiseMax(damped.lower_limits()).cwiseMin(damped.upper_limits());
  const double dt = 1e-3;
  for (int chunk = 0; chunk < 200; ++chunk) {
    double speed = 0.0;
    for (int k = 0; k < 500; ++k) {
      state = step(damped, state, loads, dt);
      speed = state.qd.lpNorm<Eigen::Infinity>();
    }
    if (speed < 1e-8) break;
  }
  return state.q;
}

}  // namespace

VecX static_equilibrium(const CableModel& model,
                        const std::vector<ExternalLoad>& loads,
                        const VecX& q_init,
                        const EquilibriumOptions& options) {
  const int n = model.dof();
  if (q_init.size() != n)
    throw std::invalid_argument("static_equilibrium: q_init dimension mismatch");

  const bool spring_on_all_dof = model.stiffness_vector().minCoeff() > 0.0;
  VecX q = q_init;
  double best_residual = equilibrium_residual(model, q, loads).lpNorm<Eigen::Infinity>();

  for (int round = 0; round < options.max_rounds; ++round) {
    // Without a spring on every DOF only the hanging solution exists; reach
    // its basin dynamically before applying Newton.
    if (round > 0 || !spring_on_all_dof) q = damped_settle(model, loads, q);

    for (int iter = 0; iter < options.max_newton_iterations; ++iter) {
      const VecX residual = equilibrium_residual(model, q, loads);
      const double norm = residual.lpNorm<Eigen::Infinity>();
      best_residual = std::min(best_residual, norm);
      if (norm < options.tolerance) return q;

      const MatX jac = residual_jacobian(model, q, loads, options.fd_epsilon);
      Eigen::FullPivLU<MatX> lu(jac);
      if (!lu.isInvertible()) break;
      const VecX delta = lu.solve(-residual);

      double alpha = 1.0;
      bool accepted = false;
      while (alpha >= 1e-6) {
        const VecX candidate = q + alpha * delta;
        const double cand_norm =
            equilibrium_residual(model, candidate, loads).lpNorm<Eigen::Infinity>();
        if (cand_norm < (1.0 - 1e-4 * alpha) * norm) {
          q = candidate;
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) break;  // stalled, fall back to settling
    }
  }

  std::ostringstream msg;
  msg << "static_equilibrium: no convergence, best residual " << best_residual
      << " N m exceeds tolerance " << options.tolerance;
  throw std::runtime_error(msg.str());
}

VecX static_equilibrium(const CableModel& model,
                        const std::vector<ExternalLoad>& loads) {
  return static_equilibrium(model, loads, VecX::Zero(model.dof()));
}

}  // namespace cablesim
