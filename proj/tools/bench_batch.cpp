// Times the batch kernels, serial reference against the OpenMP path.

#include <chrono>
#include <cstdio>
#include <random>

#include "cablesim/batch.hpp"
#include "cablesim/model.hpp"
#include "cablesim/rne.hpp"

using namespace cablesim;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn) {
  const auto start = Clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::vector<ChainState> random_states(const CableModel& model, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::uniform_real_distribution<double> rate(-2.0, 2.0);
  std::uniform_real_distribution<double> accel(-8.0, 8.0);
  std::vector<ChainState> states(count);
  for (ChainState& state : states) {
    state = ChainState::zero(model.dof());
    for (int i = 0; i < model.dof(); ++i) {
      state.q[i] = angle(rng);
      state.qd[i] = rate(rng);
      state.qdd[i] = accel(rng);
    }
  }
  return states;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx\n", name,
              serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
  std::printf("workers: %d\n", worker_count());

  const CableModel sub = identification_subchain(default_paper_model());
  const CableModel full = default_paper_model();

  {
    const auto states = random_states(sub, 200000, 1);
    std::vector<VecX> out_serial, out_parallel;
    const double serial = time_ms([&] { out_serial = batch_rne(sub, states, true, Exec::serial); });
    const double parallel = time_ms([&] { out_parallel = batch_rne(sub, states, true, Exec::parallel); });
    report("rne 4-DOF x 200k", serial, parallel);
    double diff = 0.0;
    for (size_t i = 0; i < out_serial.size(); ++i)
      diff = std::max(diff, (out_serial[i] - out_parallel[i]).lpNorm<Eigen::Infinity>());
    std::printf("  max serial/parallel difference: %g\n", diff);
  }

  {
    const auto states = random_states(full, 50000, 2);
    const double serial = time_ms([&] { batch_rne(full, states, true, Exec::serial); });
    const double parallel = time_ms([&] { batch_rne(full, states, true, Exec::parallel); });
    report("rne 14-DOF x 50k", serial, parallel);
  }

  {
    const auto states = random_states(sub, 100000, 3);
    const std::vector<ExternalLoad> loads = {tip_weight(sub, 0.1)};
    const double serial =
        time_ms([&] { batch_passive_torque(sub, states, loads, Exec::serial); });
    const double parallel =
        time_ms([&] { batch_passive_torque(sub, states, loads, Exec::parallel); });
    report("passive torque x 100k", serial, parallel);
  }

  {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> stiffness(0.1, 5.0);
    std::vector<CableModel> models;
    std::vector<std::vector<ExternalLoad>> load_sets;
    for (int i = 0; i < 96; ++i) {
      CableModel model = sub;
      for (JointSpec& joint : model.joints)
        if (joint.pitch && !joint.pitch->locked()) joint.pitch->stiffness = stiffness(rng);
      load_sets.push_back({tip_weight(model, 0.1)});
      models.push_back(model);
    }
    const double serial =
        time_ms([&] { batch_static_equilibrium(models, load_sets, Exec::serial); });
    const double parallel =
        time_ms([&] { batch_static_equilibrium(models, load_sets, Exec::parallel); });
    report("equilibrium x 96", serial, parallel);
  }

  return 0;
}
