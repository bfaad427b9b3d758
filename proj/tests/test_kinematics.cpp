#include <doctest.h>

#include <random>

#include "cablesim/kinematics.hpp"
#include "cablesim/model.hpp"

using namespace cablesim;

namespace {

// Uniform pitch-only chain; the root is the first link.
CableModel pitch_chain(int links, double length, double mass) {
  CableModel model;
  LinkSpec link;
  link.length = length;
  link.mass = mass;
  link.com_offset = 0.5 * length;
  link.inertia = rod_inertia(mass, length, 0.005);
  for (int i = 0; i < links; ++i) model.links.push_back(link);
  JointSpec joint;
  joint.pitch = AxisSpec{0.0, 0.0, -2.0 * kPi, 2.0 * kPi};
  for (int i = 0; i < links - 1; ++i) model.joints.push_back(joint);
  return model;
}

CableModel random_chain(std::mt19937_64& rng, int links) {
  std::uniform_real_distribution<double> length(0.03, 0.15);
  std::uniform_real_distribution<double> mass(0.02, 0.3);
  std::uniform_real_distribution<double> fraction(0.1, 0.9);
  CableModel model;
  for (int i = 0; i < links; ++i) {
    LinkSpec link;
    link.length = length(rng);
    link.mass = mass(rng);
    link.com_offset = fraction(rng) * link.length;
    link.inertia = rod_inertia(link.mass, link.length, 0.005);
    model.links.push_back(link);
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < links - 1; ++i) {
    JointSpec joint;
    joint.pitch = AxisSpec{0.0, 0.0, -2.0 * kPi, 2.0 * kPi};
    if (coin(rng) < 0.4) joint.roll = AxisSpec{0.0, 0.0, -2.0 * kPi, 2.0 * kPi};
    model.joints.push_back(joint);
  }
  return model;
}

}  // namespace

TEST_CASE("straight chain stretches along +x") {
  const CableModel model = pitch_chain(4, 0.05, 0.05);
  const ChainPoses poses = forward_kinematics(model, VecX::Zero(3));
  CHECK(poses.tip.translation.x() == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(poses.tip.translation.y() == doctest::Approx(0.0));
  CHECK(poses.tip.translation.z() == doctest::Approx(0.0));
  CHECK((poses.tip.rotation - Mat3::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("single joint quarter turn") {
  CableModel model = pitch_chain(2, 0.05, 0.05);
  model.links[0].length = 0.0;  // pivot at the origin
  model.links[0].mass = 0.0;
  model.links[0].com_offset = 0.0;
  VecX q(1);
  q[0] = kPi / 2.0;
  const ChainPoses poses = forward_kinematics(model, q);
  CHECK(poses.tip.translation.norm() == doctest::Approx(0.05).epsilon(1e-12));
  // Positive pitch sags: the tip points straight down.
  CHECK(poses.tip.translation.z() == doctest::Approx(-0.05).epsilon(1e-12));
  const Vec3 rotvec = rot_log(poses.tip.rotation);
  CHECK(rotvec.y() == doctest::Approx(kPi / 2.0));
}

TEST_CASE("tip stays within total length and frames stay orthonormal") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> angle(-2.0, 2.0);
  const CableModel model = random_chain(rng, 7);
  double total = 0.0;
  for (const LinkSpec& link : model.links) total += link.length;

  for (int trial = 0; trial < 1000; ++trial) {
    VecX q(model.dof());
    for (int i = 0; i < q.size(); ++i) q[i] = angle(rng);
    const ChainPoses poses = forward_kinematics(model, q);
    CHECK(poses.tip.translation.norm() <= total + 1e-12);

    for (const FramePose& frame : poses.link_frames) {
      const Mat3 gram = frame.rotation.transpose() * frame.rotation;
      CHECK((gram - Mat3::Identity()).lpNorm<Eigen::Infinity>() < 1e-9);
      CHECK(frame.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Consecutive origins sit exactly one parent length apart.
    for (size_t i = 1; i < poses.link_frames.size(); ++i) {
      const double gap = (poses.link_frames[i].translation -
                          poses.link_frames[i - 1].translation).norm();
      CHECK(gap == doctest::Approx(model.links[i - 1].length).epsilon(1e-12));
    }
  }
}

TEST_CASE("jacobian lever arm and causality") {
  CableModel model = pitch_chain(2, 0.07, 0.05);
  model.links[0].length = 0.0;
  model.links[0].mass = 0.0;
  model.links[0].com_offset = 0.0;
  PointOnLink tip{1, 0.07};
  const MatX jac = jacobian(model, VecX::Zero(1), tip);
  CHECK(jac.rows() == 6);
  CHECK(jac.cols() == 1);
  CHECK(jac.block<3, 1>(0, 0).norm() == doctest::Approx(0.07).epsilon(1e-12));
  CHECK((jac.block<3, 1>(3, 0) - Vec3::UnitY()).norm() == doctest::Approx(0.0));

  // A point on link 2 of a 5-link chain ignores every joint at or past it.
  const CableModel chain = pitch_chain(5, 0.05, 0.05);
  VecX q(4);
  q << 0.3, -0.2, 0.5, 0.1;
  const MatX mid = jacobian(chain, q, PointOnLink{2, 0.02});
  CHECK(mid.col(2).norm() == 0.0);
  CHECK(mid.col(3).norm() == 0.0);
  CHECK(mid.col(0).norm() > 0.0);

  CHECK_THROWS_AS(jacobian(chain, q, PointOnLink{2, 0.06}), std::invalid_argument);
  CHECK_THROWS_AS(jacobian(chain, q, PointOnLink{9, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(jacobian(chain, VecX::Zero(3), PointOnLink{2, 0.02}),
                  std::invalid_argument);
}

TEST_CASE("jacobian agrees with central finite differences") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> angle(-1.5, 1.5);
  const double eps = 1e-7;

  for (int trial = 0; trial < 100; ++trial) {
    const CableModel model = random_chain(rng, 5);
    VecX q(model.dof());
    for (int i = 0; i < q.size(); ++i) q[i] = angle(rng);
    const PointOnLink tip{static_cast<int>(model.links.size()) - 1,
                          model.links.back().length};
    const MatX jac = jacobian(model, q, tip);

    for (int j = 0; j < q.size(); ++j) {
      VecX hi = q, lo = q;
      hi[j] += eps;
      lo[j] -= eps;
      const Vec3 fd = (point_position(model, hi, tip) - point_position(model, lo, tip)) /
                      (2.0 * eps);
      const Vec3 column = jac.block<3, 1>(0, j);
      CHECK((column - fd).norm() <= 1e-6 * std::max(1.0, column.norm()));
    }
  }
}

TEST_CASE("sagging angle is the planar angle sum") {
  const CableModel model = pitch_chain(3, 0.05, 0.05);
  VecX q(2);
  q << 0.5, 0.3;
  CHECK(tip_sagging_angle(model, q) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(tip_sagging_angle(model, VecX::Zero(2)) == doctest::Approx(0.0));
  q << -0.4, 0.1;
  CHECK(tip_sagging_angle(model, q) == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("sagging angle rejects non-planar configurations") {
  CableModel model = pitch_chain(3, 0.05, 0.05);
  model.joints[0].roll = AxisSpec{0.0, 0.0, -kPi, kPi};
  VecX q(3);             // pitch, roll, pitch
  q << 0.5, 0.2, 0.3;    // roll bent out of plane
  CHECK_THROWS_AS(tip_sagging_angle(model, q), std::runtime_error);
  q << 0.5, 0.0, 0.3;    // roll present but zero stays planar
  CHECK(tip_sagging_angle(model, q) == doctest::Approx(0.8));
}

TEST_CASE("rotation log/exp round trip") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> component(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 rotvec(component(rng), component(rng), component(rng));
    const Vec3 back = rot_log(rot_exp(rotvec));
    CHECK((back - rotvec).norm() < 1e-12 * std::max(1.0, rotvec.norm()) + 1e-12);
  }
}
