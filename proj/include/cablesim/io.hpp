#pragma once

#include <string>
#include <utility>

#include "cablesim/curvefit.hpp"
#include "cablesim/identify.hpp"
#include "cablesim/servo.hpp"
#include "cablesim/simulate.hpp"

namespace cablesim {

/// Shortest-round-trip formatting used for every CSV number (9 significant
/// digits, '.' separator).
std::string format_number(double value);

/// Trajectory CSV: header t,q1..qn,qd1..qdn,qdd1..qddn.
std::string trajectory_to_csv(const Trajectory& trajectory);
void write_trajectory_csv(const Trajectory& trajectory, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

/// Pose log CSV: t,tag_id,x,y,z,qx,qy,qz,qw (unit quaternion, world frame).
/// The metadata sidecar is JSON: {"tag_order": [...], "tag_spacing_m": s}.
void write_pose_log(const PoseLog& log, const std::string& csv_path,
                    const std::string& meta_path);
PoseLog read_pose_log(const std::string& csv_path, const std::string& meta_path);

/// Point cloud CSV: x,y,z per row, optional header.
std::vector<Vec3> read_cloud_csv(const std::string& path);
void write_polyline_csv(const std::vector<Vec3>& points, const std::string& path);

/// Servo run report CSV: iter,err_pos,err_rot,q1..qn.
void write_servo_report(const ServoResult& result,
                        const std::vector<VecX>& joint_history,
                        const std::string& path);

/// Label,value rows used by the comparison report inputs.
std::vector<std::pair<std::string, double>> read_values_csv(const std::string& path);

FramePose pose_from_quaternion(const Vec3& translation, double qx, double qy,
                               double qz, double qw);

/// (qx, qy, qz, qw) of the pose's rotation, w non-negative.
Eigen::Vector4d quaternion_of(const FramePose& pose);

}  // namespace cablesim
