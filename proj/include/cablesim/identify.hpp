#pragma once

#include <map>
#include <string>

#include "cablesim/kinematics.hpp"
#include "cablesim/types.hpp"

namespace cablesim {

struct PoseLogEntry {
  double t = 0.0;
  int tag_id = 0;
  FramePose pose;
};

/// Timestamped fiducial frames along the cable. tag_order lists the tag ids
/// base to tip; consecutive tags sit one joint apart, tag_spacing_m apart
/// along the cable.
struct PoseLog {
  std::vector<PoseLogEntry> entries;
  std::vector<int> tag_order;
  double tag_spacing_m = 0.0;

  /// Per-tag timestamps must be strictly increasing and every referenced
  /// tag declared in tag_order.
  void validate() const;
};

/// All tag frames observed at (approximately) one instant.
struct TagFrameSet {
  double t = 0.0;
  std::map<int, FramePose> frames;
};

/// Groups log entries into per-instant frame sets: entries join the current
/// set while they fall inside the association window and their tag is not
/// yet present.
std::vector<TagFrameSet> associate_instants(const PoseLog& log,
                                            double window_s = 0.010);

/// Joint angles from one instant's tag frames: the pitch component of each
/// consecutive relative rotation, base to tip. Throws when a tag is missing
/// or a relative rotation has an off-pitch component above 0.05 rad.
VecX poses_to_joint_angles(const TagFrameSet& frames,
                           const std::vector<int>& tag_order,
                           const CableModel& model);

struct StateSample {
  double t = 0.0;
  ChainState state;
  VecX quality;          // per-joint smoothing residual, rad
  bool boundary = false; // one-sided differences near a segment edge
};

/// Resamples position-only samples to a uniform dt (linear interpolation),
/// smooths with a centered moving average, then differentiates twice with
/// central differences. Contiguous segments separated by timestamp gaps
/// larger than 5 dt are processed independently; samples near segment edges
/// use one-sided differences and are flagged boundary. dt_uniform <= 0
/// picks the median observed spacing.
std::vector<StateSample> differentiate_log(const std::vector<StateSample>& positions,
                                           int window = 5,
                                           double dt_uniform = 0.0);

struct IdentifiedParams {
  VecX stiffness;    // N m / rad per joint
  VecX damping;      // N m s / rad per joint
  double residual = 0.0;   // rms of the stacked regression residuals
  double condition = 0.0;  // max/min column norm across per-joint regressors
};

/// Per-joint stiffness from stationary samples: k_i solves k_i q_i = rhs_i
/// stacked over samples in least squares, rhs = -(G(q) + load torque),
/// velocities and accelerations taken as zero per the stationary premise.
/// Throws on a rank-deficient regressor, a velocity above 1e-3 rad/s, or a
/// negative estimate.
VecX identify_stiffness(const CableModel& model,
                        const std::vector<StateSample>& static_samples,
                        const std::vector<ExternalLoad>& loads);

/// Per-joint damping from moving samples: d_i solves d_i qd_i = rhs_i with
/// rhs = -(rne + load torque + K q), K as given. Throws when no sample
/// moves faster than 1e-2 rad/s or an estimate comes out negative.
VecX identify_damping(const CableModel& model, const VecX& stiffness,
                      const std::vector<StateSample>& dynamic_samples,
                      const std::vector<ExternalLoad>& loads);

struct IdentificationResult {
  IdentifiedParams params;
  CableModel updated;       // input model with identified pitch K and D
  int instants = 0;         // frame sets found in the log
  int dropped_instants = 0; // sets skipped (missing tags, off-pitch rotation)
  int static_samples = 0;
  int dynamic_samples = 0;
};

struct IdentificationOptions {
  int smoothing_window = 5;
  double dt_uniform = 0.0;           // 0 = median spacing
  double static_threshold = 1e-3;    // rad/s
  double dynamic_threshold = 1e-2;   // rad/s
  double min_stationary_tail = 0.5;  // s
  double association_window = 0.010; // s
};

/// Full pipeline: tag frames -> joint angles -> differentiation -> split
/// into the stationary tail and the transient -> stiffness then damping.
/// The stationary tail is the trailing run of samples below the static
/// threshold; it must span at least min_stationary_tail seconds.
IdentificationResult run_identification(const CableModel& model, const PoseLog& log,
                                        const std::vector<ExternalLoad>& loads,
                                        const IdentificationOptions& options = {});

}  // namespace cablesim
