#include "cablesim/types.hpp"

#include <sstream>
#include <stdexcept>

namespace cablesim {

Mat3 rod_inertia(double mass, double length, double radius) {
  const double transverse = mass * length * length / 12.0;
  const double axial = 0.5 * mass * radius * radius;
  Mat3 inertia = Mat3::Zero();
  inertia(0, 0) = axial;
  inertia(1, 1) = transverse;
  inertia(2, 2) = transverse;
  return inertia;
}

int JointSpec::dof() const {
  int n = 0;
  if (pitch && !pitch->locked()) ++n;
  if (roll && !roll->locked()) ++n;
  return n;
}

int CableModel::dof() const {
  int n = 0;
  for (const JointSpec& joint : joints) n += joint.dof();
  return n;
}

namespace {

template <typename Fn>
VecX per_dof(const CableModel& model, Fn&& value) {
  VecX out(model.dof());
  int k = 0;
  for (const JointSpec& joint : model.joints) {
    if (joint.pitch && !joint.pitch->locked()) out[k++] = value(*joint.pitch);
    if (joint.roll && !joint.roll->locked()) out[k++] = value(*joint.roll);
  }
  return out;
}

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw std::invalid_argument(key + ": " + message);
}

void validate_axis(const AxisSpec& axis, const std::string& key) {
  if (!(axis.stiffness >= 0.0)) fail(key + ".stiffness_nm_per_rad", "stiffness must be non-negative");
  if (!(axis.damping >= 0.0)) fail(key + ".damping_nms_per_rad", "damping must be non-negative");
  if (!(axis.lower <= axis.upper)) fail(key + ".limits_rad", "lower limit exceeds upper limit");
}

}  // namespace

VecX CableModel::stiffness_vector() const {
  return per_dof(*this, [](const AxisSpec& a) { return a.stiffness; });
}

VecX CableModel::damping_vector() const {
  return per_dof(*this, [](const AxisSpec& a) { return a.damping; });
}

VecX CableModel::lower_limits() const {
  return per_dof(*this, [](const AxisSpec& a) { return a.lower; });
}

VecX CableModel::upper_limits() const {
  return per_dof(*this, [](const AxisSpec& a) { return a.upper; });
}

void CableModel::validate() const {
  if (links.empty()) fail("links", "at least one link required");
  if (joints.size() != links.size() - 1)
    fail("joints", "joint count must be link count minus one, got " +
                       std::to_string(joints.size()) + " joints for " +
                       std::to_string(links.size()) + " links");
  for (size_t i = 0; i < links.size(); ++i) {
    const LinkSpec& link = links[i];
    const std::string key = "links[" + std::to_string(i) + "]";
    const bool root = i == 0;
    if (root ? !(link.length >= 0.0) : !(link.length > 0.0))
      fail(key + ".length_m", "length must be positive");
    if (root ? !(link.mass >= 0.0) : !(link.mass > 0.0))
      fail(key + ".mass_kg", "mass must be positive");
    if (!(link.com_offset >= 0.0 && link.com_offset <= link.length))
      fail(key + ".com_offset_m", "com offset must lie within [0, length]");
    if (!link.inertia.isApprox(link.inertia.transpose(), 1e-12))
      fail(key + ".inertia_kgm2", "inertia must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3> eigs(link.inertia);
    if (eigs.eigenvalues().minCoeff() < -1e-12)
      fail(key + ".inertia_kgm2", "inertia must be positive semi-definite");
  }
  for (size_t i = 0; i < joints.size(); ++i) {
    const std::string key = "joints[" + std::to_string(i) + "]";
    if (joints[i].pitch) validate_axis(*joints[i].pitch, key + ".pitch");
    if (joints[i].roll) validate_axis(*joints[i].roll, key + ".roll");
  }
  if (!gravity.allFinite()) fail("gravity_mps2", "gravity must be finite");
}

ChainState ChainState::zero(int dof) {
  ChainState state;
  state.q = VecX::Zero(dof);
  state.qd = VecX::Zero(dof);
  state.qdd = VecX::Zero(dof);
  return state;
}

void check_state(const CableModel& model, const ChainState& state,
                 bool enforce_limits) {
  const int n = model.dof();
  if (state.q.size() != n || state.qd.size() != n || state.qdd.size() != n) {
    std::ostringstream msg;
    msg << "state dimension mismatch: model has " << n << " DOF, state has ("
        << state.q.size() << ", " << state.qd.size() << ", "
        << state.qdd.size() << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!enforce_limits) return;
  const VecX lo = model.lower_limits();
  const VecX hi = model.upper_limits();
  for (int i = 0; i < n; ++i) {
    if (state.q[i] < lo[i] - 1e-12 || state.q[i] > hi[i] + 1e-12) {
      std::ostringstream msg;
      msg << "q[" << i << "] = " << state.q[i] << " violates joint limits ["
          << lo[i] << ", " << hi[i] << "]";
      throw std::invalid_argument(msg.str());
    }
  }
}

ExternalLoad tip_weight(const CableModel& model, double mass_kg) {
  ExternalLoad load;
  load.attachment.link = static_cast<int>(model.links.size()) - 1;
  load.attachment.offset = model.links.back().length;
  load.wrench.head<3>() = mass_kg * model.gravity;
  return load;
}

std::vector<BodyStage> expand_chain(const CableModel& model) {
  std::vector<BodyStage> stages;
  int dof_index = 0;
  for (size_t j = 0; j < model.joints.size(); ++j) {
    const JointSpec& joint = model.joints[j];
    const LinkSpec& child = model.links[j + 1];
    const Vec3 parent_offset(model.links[j].length, 0.0, 0.0);

    std::vector<BodyStage> joint_stages;
    auto add_axis = [&](const std::optional<AxisSpec>& axis, const Vec3& dir) {
      if (!axis) return;
      BodyStage stage;
      stage.joint = static_cast<int>(j);
      stage.axis = dir;
      if (axis->locked()) {
        stage.fixed_angle = axis->lower;
      } else {
        stage.dof = dof_index++;
      }
      joint_stages.push_back(stage);
    };
    add_axis(joint.pitch, Vec3::UnitY());
    add_axis(joint.roll, Vec3::UnitX());
    if (joint_stages.empty()) {
      BodyStage weld;
      weld.joint = static_cast<int>(j);
      joint_stages.push_back(weld);  // rigid connection
    }

    joint_stages.front().offset = parent_offset;
    BodyStage& carrier = joint_stages.back();
    carrier.link = static_cast<int>(j + 1);
    carrier.mass = child.mass;
    carrier.com = Vec3(child.com_offset, 0.0, 0.0);
    carrier.inertia = child.inertia;

    for (BodyStage& stage : joint_stages) stages.push_back(stage);
  }
  return stages;
}

}  // namespace cablesim
