#pragma once

#include <string>
#include <vector>

#include "cablesim/batch.hpp"
#include "cablesim/identify.hpp"

namespace cablesim {
namespace acceptance {

struct CriterionResult {
  std::string name;
  bool pass = false;
  double elapsed_s = 0.0;
  std::string detail;
};

/// All validation scenarios, optionally filtered to one by name. Each
/// scenario runs against its pinned tolerances and reports pass/fail.
std::vector<CriterionResult> run_all(const std::string& only = "",
                                     Exec exec = Exec::parallel);

std::vector<std::string> criterion_names();

/// Builds a synthetic pose log by simulating the given model and sampling
/// tag frames from its kinematics. The transient is recorded at log_rate_hz
/// from t = 0; the run then settles unrecorded until the chain is slower
/// than settle_qd (capped at max_duration) and the final tail_s seconds are
/// recorded. noise_sigma_pos / noise_sigma_rot add per-sample Gaussian pose
/// noise (m, rad) under the given seed.
struct SyntheticLogOptions {
  double log_rate_hz = 500.0;
  double sim_dt = 1e-3;
  double transient_s = 8.0;
  double tail_s = 1.5;
  double settle_qd = 1e-8;
  double max_duration = 900.0;
  double noise_sigma_pos = 0.0;
  double noise_sigma_rot = 0.0;
  unsigned seed = 0;
};

PoseLog synthesize_pose_log(const CableModel& model,
                            const std::vector<ExternalLoad>& loads,
                            const ChainState& initial,
                            const SyntheticLogOptions& options);

}  // namespace acceptance
}  // namespace cablesim
