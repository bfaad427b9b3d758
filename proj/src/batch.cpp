#include "cablesim/batch.hpp"

#include <exception>
#include <mutex>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cablesim/rne.hpp"

namespace cablesim {

int worker_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void parallel_for(int count, const std::function<void(int)>& fn, Exec exec) {
  if (exec == Exec::serial || worker_count() == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < count; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<VecX> batch_rne(const CableModel& model,
                            const std::vector<ChainState>& states,
                            bool gravity_on, Exec exec) {
  std::vector<VecX> torques(states.size());
  parallel_for(static_cast<int>(states.size()),
               [&](int i) { torques[i] = rne(model, states[i], gravity_on); }, exec);
  return torques;
}

std::vector<VecX> batch_passive_torque(const CableModel& model,
                                       const std::vector<ChainState>& states,
                                       const std::vector<ExternalLoad>& loads,
                                       Exec exec) {
  std::vector<VecX> torques(states.size());
  parallel_for(static_cast<int>(states.size()),
               [&](int i) {
                 torques[i] = rne(model, states[i], true) +
                              load_torque(model, states[i].q, loads);
               },
               exec);
  return torques;
}

std::vector<VecX> batch_static_equilibrium(
    const std::vector<CableModel>& models,
    const std::vector<std::vector<ExternalLoad>>& load_sets, Exec exec) {
  if (models.size() != load_sets.size())
    throw std::invalid_argument("batch_static_equilibrium: size mismatch");
  std::vector<VecX> equilibria(models.size());
  parallel_for(static_cast<int>(models.size()),
               [&](int i) {
                 equilibria[i] = static_equilibrium(models[i], load_sets[i]);
               },
               exec);
  return equilibria;
}

}  // namespace cablesim
