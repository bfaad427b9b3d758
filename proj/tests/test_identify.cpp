#include <doctest.h>

#include <cmath>
#include <random>

#include "cablesim/acceptance.hpp"
#include "cablesim/identify.hpp"
#include "cablesim/kinematics.hpp"
#include "cablesim/model.hpp"
#include "cablesim/rne.hpp"
#include "cablesim/simulate.hpp"

using namespace cablesim;

namespace {

CableModel subchain_with(const VecX& stiffness, const VecX& damping) {
  CableModel model = identification_subchain(default_paper_model());
  int k = 0;
  for (JointSpec& joint : model.joints)
    if (joint.pitch && !joint.pitch->locked()) {
      joint.pitch->stiffness = stiffness[k];
      joint.pitch->damping = damping[k];
      joint.pitch->lower = -2.0 * kPi;
      joint.pitch->upper = 2.0 * kPi;
      ++k;
    }
  return model;
}

TagFrameSet frames_from_fk(const CableModel& model, const VecX& q,
                           const std::vector<int>& tag_order, double t = 0.0) {
  const ChainPoses poses = forward_kinematics(model, q);
  TagFrameSet set;
  set.t = t;
  for (size_t i = 0; i < tag_order.size(); ++i)
    set.frames[tag_order[i]] = poses.link_frames[i];
  return set;
}

const std::vector<int> kTags = {5, 4, 3, 2, 1};

StateSample position_sample(double t, const VecX& q) {
  StateSample sample;
  sample.t = t;
  sample.state.q = q;
  sample.state.qd = VecX::Zero(q.size());
  sample.state.qdd = VecX::Zero(q.size());
  return sample;
}

}  // namespace

TEST_CASE("joint angles from consecutive tag rotations") {
  const CableModel model = identification_subchain(default_paper_model());

  TagFrameSet set;
  set.t = 0.0;
  Mat3 rotation = Mat3::Identity();
  for (int i = 0; i < 5; ++i) {
    FramePose pose;
    pose.rotation = rotation;
    pose.translation = Vec3(0.05 * i, 0.0, 0.0);
    set.frames[kTags[i]] = pose;
    rotation = rotation * rotation_about(Vec3::UnitY(), 0.1);
  }
  const VecX q = poses_to_joint_angles(set, kTags, model);
  for (int i = 0; i < 4; ++i) CHECK(q[i] == doctest::Approx(0.1).epsilon(1e-12));

  // Identical frames measure a straight chain.
  TagFrameSet flat;
  for (int tag : kTags) flat.frames[tag] = FramePose::identity();
  CHECK(poses_to_joint_angles(flat, kTags, model).norm() == 0.0);
}

TEST_CASE("joint angles invert forward kinematics") {
  const CableModel model = identification_subchain(default_paper_model());
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> angle(-1.3, 1.3);
  for (int trial = 0; trial < 100; ++trial) {
    VecX q(4);
    for (int i = 0; i < 4; ++i) q[i] = angle(rng);
    const VecX recovered =
        poses_to_joint_angles(frames_from_fk(model, q, kTags), kTags, model);
    CHECK((recovered - q).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("joint angle extraction reports bad frame sets") {
  const CableModel model = identification_subchain(default_paper_model());
  TagFrameSet set = frames_from_fk(model, VecX::Zero(4), kTags);
  set.frames.erase(3);
  CHECK_THROWS_WITH_AS(poses_to_joint_angles(set, kTags, model),
                       "missing tag 3 at t = 0", std::runtime_error);

  TagFrameSet twisted = frames_from_fk(model, VecX::Zero(4), kTags);
  twisted.frames[2].rotation =
      twisted.frames[2].rotation * rotation_about(Vec3::UnitX(), 0.2);
  CHECK_THROWS_AS(poses_to_joint_angles(twisted, kTags, model), std::runtime_error);

  CHECK_THROWS_AS(poses_to_joint_angles(set, {1, 2}, model), std::invalid_argument);
}

TEST_CASE("association groups entries into instants") {
  PoseLog log;
  log.tag_order = {2, 1};
  log.tag_spacing_m = 0.05;
  for (int k = 0; k < 3; ++k)
    for (int tag : {2, 1}) {
      PoseLogEntry entry;
      entry.t = 0.1 * k + (tag == 1 ? 0.002 : 0.0);  // slight per-tag skew
      entry.tag_id = tag;
      entry.pose = FramePose::identity();
      log.entries.push_back(entry);
    }
  const auto instants = associate_instants(log, 0.010);
  REQUIRE(instants.size() == 3);
  for (const TagFrameSet& set : instants) CHECK(set.frames.size() == 2);

  PoseLog bad = log;
  bad.entries.push_back({0.05, 7, FramePose::identity()});
  CHECK_THROWS_AS(associate_instants(bad, 0.010), std::invalid_argument);

  PoseLog regressed = log;
  regressed.entries.push_back({0.0, 2, FramePose::identity()});
  CHECK_THROWS_AS(associate_instants(regressed, 0.010), std::invalid_argument);
}

TEST_CASE("differentiation handles constants, ramps and sines") {
  std::vector<StateSample> constants;
  VecX level(2);
  level << 0.4, -0.2;
  for (int k = 0; k < 40; ++k) constants.push_back(position_sample(0.01 * k, level));
  for (const StateSample& s : differentiate_log(constants, 5, 0.0)) {
    CHECK(s.state.qd.norm() == doctest::Approx(0.0));
    CHECK(s.state.qdd.norm() == doctest::Approx(0.0));
  }

  std::vector<StateSample> ramp;
  for (int k = 0; k < 40; ++k) {
    VecX q(1);
    q[0] = 0.1 * (0.01 * k);
    ramp.push_back(position_sample(0.01 * k, q));
  }
  for (const StateSample& s : differentiate_log(ramp, 5, 0.0)) {
    if (s.boundary) continue;
    CHECK(s.state.qd[0] == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(std::abs(s.state.qdd[0]) < 1e-9);
  }

  // q = A sin(w t): derivatives within 1% at dt = 1 ms, window 5.
  const double amplitude = 0.2, omega = 2.0;
  std::vector<StateSample> sine;
  for (int k = 0; k <= 3000; ++k) {
    VecX q(1);
    q[0] = amplitude * std::sin(omega * 1e-3 * k);
    sine.push_back(position_sample(1e-3 * k, q));
  }
  for (const StateSample& s : differentiate_log(sine, 5, 0.0)) {
    if (s.boundary) continue;
    const double qd_true = amplitude * omega * std::cos(omega * s.t);
    const double qdd_true = -amplitude * omega * omega * std::sin(omega * s.t);
    CHECK(std::abs(s.state.qd[0] - qd_true) <= 0.01 * amplitude * omega);
    CHECK(std::abs(s.state.qdd[0] - qdd_true) <= 0.01 * amplitude * omega * omega);
  }
}

TEST_CASE("differentiation rejects bad inputs") {
  std::vector<StateSample> few;
  for (int k = 0; k < 4; ++k) few.push_back(position_sample(0.01 * k, VecX::Zero(1)));
  CHECK_THROWS_AS(differentiate_log(few, 5, 0.0), std::invalid_argument);

  std::vector<StateSample> shuffled;
  for (int k = 0; k < 10; ++k) shuffled.push_back(position_sample(0.01 * k, VecX::Zero(1)));
  shuffled[5].t = shuffled[4].t;
  CHECK_THROWS_AS(differentiate_log(shuffled, 5, 0.0), std::invalid_argument);

  CHECK_THROWS_AS(differentiate_log(few, 4, 0.0), std::invalid_argument);
}

TEST_CASE("stiffness recovery from exact equilibria") {
  VecX k_true(4), d_true(4);
  k_true << 0.5, 0.45, 0.55, 0.5;
  d_true << 0.01, 0.01, 0.01, 0.01;
  const CableModel model = subchain_with(k_true, d_true);

  auto equilibrium_sample = [&](double tip_mass) {
    const std::vector<ExternalLoad> loads =
        tip_mass > 0.0 ? std::vector<ExternalLoad>{tip_weight(model, tip_mass)}
                       : std::vector<ExternalLoad>{};
    StateSample sample;
    sample.t = 0.0;
    sample.state = ChainState::zero(4);
    sample.state.q = static_equilibrium(model, loads);
    return sample;
  };

  const std::vector<ExternalLoad> heavy = {tip_weight(model, 0.1)};
  const VecX recovered =
      identify_stiffness(model, {equilibrium_sample(0.1)}, heavy);
  CHECK((recovered - k_true).cwiseQuotient(k_true).lpNorm<Eigen::Infinity>() < 1e-6);

  // Different tip weights agree on the same stiffness.
  const std::vector<ExternalLoad> light = {tip_weight(model, 0.05)};
  const VecX from_light =
      identify_stiffness(model, {equilibrium_sample(0.05)}, light);
  CHECK((from_light - recovered).cwiseQuotient(recovered).lpNorm<Eigen::Infinity>() <
        1e-6);
}

TEST_CASE("stiffness errors: rank deficiency, precondition, negative estimate") {
  const CableModel model =
      subchain_with(VecX::Constant(4, 0.5), VecX::Constant(4, 0.01));
  CableModel weightless = model;
  weightless.gravity.setZero();

  StateSample straight;
  straight.t = 0.0;
  straight.state = ChainState::zero(4);
  CHECK_THROWS_AS(identify_stiffness(weightless, {straight}, {}),
                  std::runtime_error);  // q = 0: rank-deficient

  StateSample moving = straight;
  moving.state.qd[1] = 0.1;
  CHECK_THROWS_AS(identify_stiffness(model, {moving}, {}), std::invalid_argument);

  // A chain bent upward under downward gravity load implies negative k.
  StateSample bent_up = straight;
  bent_up.state.q << -0.4, -0.3, -0.3, -0.2;
  CHECK_THROWS_AS(identify_stiffness(model, {bent_up}, {}), std::runtime_error);

  CHECK_THROWS_AS(identify_stiffness(model, {}, {}), std::invalid_argument);
}

TEST_CASE("damping recovery from simulated motion samples") {
  VecX k_true(4), d_true(4);
  k_true << 0.5, 0.45, 0.55, 0.5;
  d_true << 0.01, 0.012, 0.008, 0.011;
  const CableModel model = subchain_with(k_true, d_true);
  const std::vector<ExternalLoad> loads = {tip_weight(model, 0.1)};

  const Trajectory traj =
      simulate(model, ChainState::zero(4), {{0.0, loads}}, 2.0, 1e-3);
  std::vector<StateSample> dynamic;
  for (size_t k = 10; k < traj.samples.size(); k += 7) {
    if (traj.samples[k].qd.lpNorm<Eigen::Infinity>() < 1e-2) continue;
    StateSample sample;
    sample.t = traj.time[k];
    sample.state = traj.samples[k];
    dynamic.push_back(sample);
  }
  REQUIRE(dynamic.size() > 50);

  const VecX recovered = identify_damping(model, k_true, dynamic, loads);
  CHECK((recovered - d_true).cwiseQuotient(d_true).lpNorm<Eigen::Infinity>() < 0.01);

  std::vector<StateSample> static_only = {dynamic.front()};
  static_only[0].state.qd.setZero();
  CHECK_THROWS_AS(identify_damping(model, k_true, static_only, loads),
                  std::invalid_argument);
}

TEST_CASE("damping least squares is invariant to consistent scaling") {
  // Weightless free rod: the balance is M qdd + D qd = 0, linear in the
  // state, so doubling every velocity and acceleration scales both sides.
  CableModel rod;
  rod.links.push_back(LinkSpec{});
  LinkSpec link;
  link.length = 0.05;
  link.mass = 0.05;
  link.com_offset = 0.025;
  link.inertia = rod_inertia(link.mass, link.length, kDefaultCableRadius);
  rod.links.push_back(link);
  JointSpec joint;
  joint.pitch = AxisSpec{0.0, 0.0, -kPi, kPi};
  rod.joints.push_back(joint);
  rod.gravity.setZero();

  const double mass = mass_matrix(rod, VecX::Zero(1))(0, 0);
  const double d_true = 0.004;
  std::vector<StateSample> samples, doubled;
  for (int k = 0; k < 20; ++k) {
    StateSample sample;
    sample.t = 0.01 * k;
    sample.state = ChainState::zero(1);
    sample.state.q[0] = 0.1 + 0.01 * k;
    sample.state.qd[0] = 0.5 + 0.05 * k;
    sample.state.qdd[0] = -(d_true / mass) * sample.state.qd[0];
    samples.push_back(sample);
    sample.state.qd *= 2.0;
    sample.state.qdd *= 2.0;
    doubled.push_back(sample);
  }
  const VecX base = identify_damping(rod, VecX::Zero(1), samples, {});
  const VecX scaled = identify_damping(rod, VecX::Zero(1), doubled, {});
  CHECK(base[0] == doctest::Approx(d_true).epsilon(1e-12));
  CHECK(scaled[0] == doctest::Approx(base[0]).epsilon(1e-12));
}

TEST_CASE("round-trip identifiability across the parameter box") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> log_k(std::log(0.1), std::log(5.0));
  std::uniform_real_distribution<double> log_d(std::log(0.001), std::log(0.1));

  for (int trial = 0; trial < 5; ++trial) {
    VecX k_true(4), d_true(4);
    for (int i = 0; i < 4; ++i) {
      k_true[i] = std::exp(log_k(rng));
      d_true[i] = std::exp(log_d(rng));
    }
    const CableModel model = subchain_with(k_true, d_true);
    const std::vector<ExternalLoad> loads = {tip_weight(model, 0.1)};

    StateSample still;
    still.t = 0.0;
    still.state = ChainState::zero(4);
    still.state.q = static_equilibrium(model, loads);
    const VecX k_hat = identify_stiffness(model, {still}, loads);
    CHECK((k_hat - k_true).cwiseQuotient(k_true).lpNorm<Eigen::Infinity>() < 1e-6);

    const Trajectory traj =
        simulate(model, ChainState::zero(4), {{0.0, loads}}, 1.5, 5e-4);
    std::vector<StateSample> dynamic;
    for (size_t k = 8; k < traj.samples.size(); k += 5) {
      if (traj.samples[k].qd.lpNorm<Eigen::Infinity>() < 1e-2) continue;
      StateSample sample;
      sample.t = traj.time[k];
      sample.state = traj.samples[k];
      dynamic.push_back(sample);
    }
    if (dynamic.size() < 30) continue;  // heavily damped draw, nothing moves
    const VecX d_hat = identify_damping(model, k_hat, dynamic, loads);
    CHECK((d_hat - d_true).cwiseQuotient(d_true).lpNorm<Eigen::Infinity>() < 0.05);
  }
}

TEST_CASE("per-joint least squares matches the normal equations") {
  VecX k_true(4), d_true(4);
  k_true << 1.0, 0.8, 1.2, 0.9;
  d_true << 0.02, 0.02, 0.02, 0.02;
  const CableModel model = subchain_with(k_true, d_true);
  const std::vector<ExternalLoad> loads = {tip_weight(model, 0.1)};

  std::vector<StateSample> statics;
  for (double mass : {0.06, 0.08, 0.1}) {
    StateSample sample;
    sample.t = 0.0;
    sample.state = ChainState::zero(4);
    sample.state.q = static_equilibrium(model, {tip_weight(model, mass)});
    // Perturb so the stacked system is genuinely overdetermined.
    sample.state.q *= 1.0 + 0.02 * mass;
    statics.push_back(sample);
  }
  const VecX k_hat = identify_stiffness(model, statics, loads);

  // Normal equations per joint, accumulated independently.
  for (int i = 0; i < 4; ++i) {
    double qq = 0.0, qr = 0.0;
    for (const StateSample& sample : statics) {
      const VecX rhs = -(gravity_torque(model, sample.state.q) +
                         load_torque(model, sample.state.q, loads));
      qq += sample.state.q[i] * sample.state.q[i];
      qr += sample.state.q[i] * rhs[i];
    }
    const double k_ne = qr / qq;
    double sse_impl = 0.0, sse_ne = 0.0;
    for (const StateSample& sample : statics) {
      const VecX rhs = -(gravity_torque(model, sample.state.q) +
                         load_torque(model, sample.state.q, loads));
      sse_impl += std::pow(rhs[i] - k_hat[i] * sample.state.q[i], 2);
      sse_ne += std::pow(rhs[i] - k_ne * sample.state.q[i], 2);
    }
    CHECK(sse_impl <= sse_ne + 1e-10);
  }
}

TEST_CASE("full pipeline on a synthetic log, with time-shift invariance") {
  VecX k_true(4), d_true(4);
  k_true << 0.5, 0.575, 0.425, 0.525;
  d_true << 0.05, 0.045, 0.055, 0.0475;
  const CableModel truth = subchain_with(k_true, d_true);
  const std::vector<ExternalLoad> loads = {tip_weight(truth, 0.1)};

  acceptance::SyntheticLogOptions options;
  options.log_rate_hz = 200.0;
  options.transient_s = 4.0;
  options.tail_s = 1.0;
  options.settle_qd = 1e-6;
  PoseLog log =
      acceptance::synthesize_pose_log(truth, loads, ChainState::zero(4), options);

  const IdentificationResult result = run_identification(truth, log, loads);
  CHECK((result.params.stiffness - k_true).cwiseQuotient(k_true).lpNorm<Eigen::Infinity>() <
        1e-3);
  CHECK((result.params.damping - d_true).cwiseQuotient(d_true).lpNorm<Eigen::Infinity>() <
        0.05);
  CHECK(result.static_samples > 0);
  CHECK(result.dynamic_samples > 0);
  CHECK(result.params.condition >= 1.0);

  // The updated model carries the estimates.
  CHECK(result.updated.stiffness_vector().isApprox(result.params.stiffness));
  CHECK(result.updated.damping_vector().isApprox(result.params.damping));

  // Shifting every timestamp leaves the estimates untouched.
  PoseLog shifted = log;
  for (PoseLogEntry& entry : shifted.entries) entry.t += 17.25;
  const IdentificationResult moved = run_identification(truth, shifted, loads);
  CHECK((moved.params.stiffness - result.params.stiffness).lpNorm<Eigen::Infinity>() <
        1e-9);
  CHECK((moved.params.damping - result.params.damping).lpNorm<Eigen::Infinity>() <
        1e-9);
}

TEST_CASE("pipeline error paths") {
  const CableModel model =
      subchain_with(VecX::Constant(4, 0.5), VecX::Constant(4, 0.02));
  PoseLog empty;
  empty.tag_order = kTags;
  CHECK_THROWS_AS(run_identification(model, empty, {}), std::invalid_argument);

  // A log that never settles has no stationary tail.
  PoseLog restless;
  restless.tag_order = kTags;
  restless.tag_spacing_m = 0.05;
  for (int k = 0; k < 400; ++k) {
    VecX q = VecX::Constant(4, 0.3 + 0.2 * std::sin(2.0 * kPi * 0.01 * k));
    const ChainPoses poses = forward_kinematics(model, q);
    for (int i = 0; i < 5; ++i)
      restless.entries.push_back({0.01 * k, kTags[i], poses.link_frames[i]});
  }
  CHECK_THROWS_AS(run_identification(model, restless, {}), std::runtime_error);
}
