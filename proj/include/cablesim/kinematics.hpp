#pragma once

#include "cablesim/types.hpp"

namespace cablesim {

/// Rigid transform, world frame unless stated otherwise.
struct FramePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static FramePose identity() { return FramePose{}; }
};

/// Rotation about a unit axis by an angle.
Mat3 rotation_about(const Vec3& axis, double angle);

/// Exponential map so(3) -> SO(3).
Mat3 rot_exp(const Vec3& rotvec);

/// Log map SO(3) -> so(3), principal value (angle in [0, pi]).
Vec3 rot_log(const Mat3& rotation);

struct ChainPoses {
  /// One frame per link, origin at the proximal joint, axes following the
  /// link. Frame 0 is the welded root (identity).
  std::vector<FramePose> link_frames;
  /// World position of each link's center of mass.
  std::vector<Vec3> com_positions;
  /// Frame at the distal end of the last link.
  FramePose tip;
};

ChainPoses forward_kinematics(const CableModel& model, const VecX& q);

/// World position of a point on the chain at configuration q.
Vec3 point_position(const CableModel& model, const VecX& q, const PointOnLink& point);

/// Geometric Jacobian of a point: 6 x dof, linear rows first, then angular,
/// world frame. Columns of joints distal to the point are zero.
MatX jacobian(const CableModel& model, const VecX& q, const PointOnLink& point);

/// Jacobian of the distal tip of the last link.
MatX tip_jacobian(const CableModel& model, const VecX& q);

/// Pitch rotation of the tip frame relative to the root. For a planar pitch
/// chain this equals the sum of the joint angles; sagging under gravity is
/// positive. Throws when the configuration is not planar (a roll axis away
/// from zero).
double tip_sagging_angle(const CableModel& model, const VecX& q);

}  // namespace cablesim
