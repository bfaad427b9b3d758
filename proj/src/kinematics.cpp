#include "cablesim/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cablesim {

Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Mat3 rot_exp(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-14) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, rotvec / angle).toRotationMatrix();
}

Vec3 rot_log(const Mat3& rotation) {
  Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

namespace {

void check_dimension(const CableModel& model, const VecX& q) {
  if (q.size() != model.dof())
    throw std::invalid_argument("q dimension mismatch: model has " +
                                std::to_string(model.dof()) + " DOF, got " +
                                std::to_string(q.size()));
}

double stage_angle(const BodyStage& stage, const VecX& q) {
  return stage.dof >= 0 ? q[stage.dof] : stage.fixed_angle;
}

void check_point(const CableModel& model, const PointOnLink& point) {
  if (point.link < 0 || point.link >= static_cast<int>(model.links.size()))
    throw std::invalid_argument("point off chain: link " + std::to_string(point.link));
  const double length = model.links[point.link].length;
  if (point.offset < 0.0 || point.offset > length)
    throw std::invalid_argument("point off chain: offset " +
                                std::to_string(point.offset) + " outside [0, " +
                                std::to_string(length) + "]");
}

}  // namespace

ChainPoses forward_kinematics(const CableModel& model, const VecX& q) {
  check_dimension(model, q);
  ChainPoses poses;
  poses.link_frames.resize(model.links.size());
  poses.com_positions.resize(model.links.size());

  poses.link_frames[0] = FramePose::identity();
  poses.com_positions[0] = Vec3(model.links[0].com_offset, 0.0, 0.0);

  Mat3 rot = Mat3::Identity();
  Vec3 pos = Vec3::Zero();
  for (const BodyStage& stage : expand_chain(model)) {
    pos = pos + rot * stage.offset;
    rot = rot * rotation_about(stage.axis, stage_angle(stage, q));
    if (stage.link >= 0) {
      poses.link_frames[stage.link] = FramePose{rot, pos};
      poses.com_positions[stage.link] = pos + rot * stage.com;
    }
  }
  const LinkSpec& last = model.links.back();
  poses.tip.rotation = rot;
  poses.tip.translation = pos + rot * Vec3(last.length, 0.0, 0.0);
  return poses;
}

Vec3 point_position(const CableModel& model, const VecX& q, const PointOnLink& point) {
  check_point(model, point);
  const ChainPoses poses = forward_kinematics(model, q);
  const FramePose& frame = poses.link_frames[point.link];
  return frame.translation + frame.rotation * Vec3(point.offset, 0.0, 0.0);
}

MatX jacobian(const CableModel& model, const VecX& q, const PointOnLink& point) {
  check_dimension(model, q);
  check_point(model, point);

  const std::vector<BodyStage> stages = expand_chain(model);
  MatX jac = MatX::Zero(6, model.dof());

  // Walk the chain once, keeping each DOF's world axis and origin.
  Mat3 rot = Mat3::Identity();
  Vec3 pos = Vec3::Zero();
  std::vector<Vec3> axes(model.dof());
  std::vector<Vec3> origins(model.dof());
  Vec3 target = Vec3::Zero();
  bool target_found = point.link == 0;
  if (target_found) target = Vec3(point.offset, 0.0, 0.0);

  for (const BodyStage& stage : stages) {
    pos = pos + rot * stage.offset;
    if (stage.dof >= 0 && stage.joint < point.link) {
      axes[stage.dof] = rot * stage.axis;
      origins[stage.dof] = pos;
    }
    rot = rot * rotation_about(stage.axis, stage_angle(stage, q));
    if (stage.link == point.link) {
      target = pos + rot * Vec3(point.offset, 0.0, 0.0);
      target_found = true;
    }
  }
  if (!target_found) throw std::logic_error("jacobian: point link not reached");

  for (const BodyStage& stage : stages) {
    if (stage.dof < 0 || stage.joint >= point.link) continue;
    const Vec3& axis = axes[stage.dof];
    jac.block<3, 1>(0, stage.dof) = axis.cross(target - origins[stage.dof]);
    jac.block<3, 1>(3, stage.dof) = axis;
  }
  return jac;
}

MatX tip_jacobian(const CableModel& model, const VecX& q) {
  PointOnLink tip;
  tip.link = static_cast<int>(model.links.size()) - 1;
  tip.offset = model.links.back().length;
  return jacobian(model, q, tip);
}

double tip_sagging_angle(const CableModel& model, const VecX& q) {
  const ChainPoses poses = forward_kinematics(model, q);
  const Vec3 rotvec = rot_log(poses.tip.rotation);
  const double off_pitch = std::hypot(rotvec.x(), rotvec.z());
  if (off_pitch > 1e-9)
    throw std::runtime_error(
        "tip_sagging_angle: non-planar configuration, off-pitch rotation " +
        std::to_string(off_pitch) + " rad");
  return rotvec.y();
}

}  // namespace cablesim
