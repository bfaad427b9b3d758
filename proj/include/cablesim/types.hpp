#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace cablesim {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Inertia of a thin rod about its center of mass, x axis along the rod.
/// Transverse terms use the slender-rod formula; the axial term keeps the
/// small cylinder contribution so the mass matrix stays positive definite
/// when a roll axis is free.
Mat3 rod_inertia(double mass, double length, double radius);

/// Default cable cross-section radius used when a config gives no inertia.
inline constexpr double kDefaultCableRadius = 0.005;

struct LinkSpec {
  double length = 0.0;      // m
  double mass = 0.0;        // kg
  double com_offset = 0.0;  // m from the proximal joint along the link axis
  Mat3 inertia = Mat3::Zero();  // kg m^2 about the COM, link frame
};

/// One rotational axis of a joint. lower == upper welds the axis at that
/// angle; it then contributes no degree of freedom.
struct AxisSpec {
  double stiffness = 0.0;  // N m / rad
  double damping = 0.0;    // N m s / rad
  double lower = -kPi;     // rad
  double upper = kPi;      // rad

  bool locked() const { return lower == upper; }
};

/// Connection between consecutive links. An absent axis does not rotate.
/// Both absent (or locked) means a rigid weld.
struct JointSpec {
  std::optional<AxisSpec> pitch;  // rotation about the local y axis
  std::optional<AxisSpec> roll;   // rotation about the local x axis

  int dof() const;
};

/// Serial chain. links[0] is welded to the world, horizontal along +x;
/// joints[i] connects links[i] to links[i+1]. The distal end carries the
/// plug link. Gravity default is -z.
///
/// Pitch sign convention: positive pitch rotates the distal direction
/// downward (+x toward -z), so a chain sagging under gravity has positive
/// joint angles.
struct CableModel {
  std::vector<LinkSpec> links;
  std::vector<JointSpec> joints;
  Vec3 gravity{0.0, 0.0, -9.8};

  int dof() const;
  VecX stiffness_vector() const;
  VecX damping_vector() const;
  VecX lower_limits() const;
  VecX upper_limits() const;

  /// Throws std::invalid_argument naming the offending key on violation.
  /// The root link (index 0) never moves and may have zero length/mass;
  /// every other link needs positive length and mass.
  void validate() const;
};

struct ChainState {
  VecX q;    // rad
  VecX qd;   // rad/s
  VecX qdd;  // rad/s^2

  static ChainState zero(int dof);
};

/// Checks state dimensions against the model and that q lies within the
/// joint limits. Limit violations are reported, never clamped here.
void check_state(const CableModel& model, const ChainState& state,
                 bool enforce_limits = true);

/// Point on the chain: a link index plus a distance from its proximal
/// joint along the link axis.
struct PointOnLink {
  int link = 0;
  double offset = 0.0;  // m, 0 <= offset <= links[link].length
};

/// Wrench applied to the chain at a fixed material point, expressed in the
/// world frame (force N, torque N m). Enters the joint-torque balance as
/// the holding term -J^T w.
struct ExternalLoad {
  PointOnLink attachment;
  Vec6 wrench = Vec6::Zero();
};

/// Weight of the given mass hanging from the distal tip of the last link.
ExternalLoad tip_weight(const CableModel& model, double mass_kg);

/// One rotation stage of the expanded chain. Multi-axis joints expand to
/// one stage per axis; only the last stage of a joint carries the child
/// link's mass. Locked or absent axes become fixed stages.
struct BodyStage {
  int joint = -1;      // owning joint index
  int link = -1;       // link carried by this stage, -1 for massless stages
  int dof = -1;        // global DOF index, -1 for fixed stages
  Vec3 axis = Vec3::UnitY();   // rotation axis, same in parent and stage frame
  double fixed_angle = 0.0;    // used when dof < 0
  Vec3 offset = Vec3::Zero();  // stage origin in the parent stage frame
  double mass = 0.0;
  Vec3 com = Vec3::Zero();     // stage frame
  Mat3 inertia = Mat3::Zero(); // about the COM, stage frame
};

/// Expansion of all joints into elementary rotation stages, base to tip.
/// The welded root link is not a stage; stage 0's parent is the root frame.
std::vector<BodyStage> expand_chain(const CableModel& model);

}  // namespace cablesim
