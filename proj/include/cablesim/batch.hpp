#pragma once

#include <functional>

#include "cablesim/simulate.hpp"
#include "cablesim/types.hpp"

namespace cablesim {

/// Execution policy for batch kernels. The serial path is the reference:
/// both paths run identical per-item arithmetic and must produce identical
/// results.
enum class Exec { serial, parallel };

/// Runs fn(i) for i in [0, count). Items must be independent; the first
/// exception thrown, if any, is rethrown after the loop.
void parallel_for(int count, const std::function<void(int)>& fn, Exec exec);

/// Number of worker threads the parallel policy uses (1 without OpenMP).
int worker_count();

/// rne over a batch of states.
std::vector<VecX> batch_rne(const CableModel& model,
                            const std::vector<ChainState>& states,
                            bool gravity_on, Exec exec);

/// Passive joint-torque balance rne + load torque over a batch of states.
std::vector<VecX> batch_passive_torque(const CableModel& model,
                                       const std::vector<ChainState>& states,
                                       const std::vector<ExternalLoad>& loads,
                                       Exec exec);

/// Static equilibria of several model variants under matching load sets.
std::vector<VecX> batch_static_equilibrium(
    const std::vector<CableModel>& models,
    const std::vector<std::vector<ExternalLoad>>& load_sets, Exec exec);

}  // namespace cablesim
