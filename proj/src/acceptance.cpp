#include "cablesim/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "cablesim/curvefit.hpp"
#include "cablesim/kinematics.hpp"
#include "cablesim/model.hpp"
#include "cablesim/reference.hpp"
#include "cablesim/report.hpp"
#include "cablesim/rne.hpp"
#include "cablesim/servo.hpp"
#include "cablesim/simulate.hpp"

namespace cablesim {
namespace acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

/// Identification sub-chain with per-joint pitch stiffness/damping and wide
/// limits so test transients never hit a clamp.
CableModel test_subchain(const VecX& stiffness, const VecX& damping,
                         double limit = 2.0 * kPi) {
  CableModel sub = identification_subchain(default_paper_model());
  int k = 0;
  for (JointSpec& joint : sub.joints) {
    if (joint.pitch && !joint.pitch->locked()) {
      joint.pitch->stiffness = stiffness[k];
      joint.pitch->damping = damping[k];
      joint.pitch->lower = -limit;
      joint.pitch->upper = limit;
      ++k;
    }
  }
  return sub;
}

/// Total mechanical energy from first principles: kinetic plus spring,
/// gravity and constant-wrench potentials.
double chain_energy(const CableModel& model, const ChainState& state,
                    const std::vector<ExternalLoad>& loads) {
  const MatX mass = mass_matrix(model, state.q);
  double energy = 0.5 * state.qd.dot(mass * state.qd) +
                  0.5 * state.q.dot(model.stiffness_vector().cwiseProduct(state.q));
  const ChainPoses poses = forward_kinematics(model, state.q);
  for (size_t i = 0; i < model.links.size(); ++i)
    energy -= model.links[i].mass * model.gravity.dot(poses.com_positions[i]);
  for (const ExternalLoad& load : loads) {
    const Vec3 point = point_position(model, state.q, load.attachment);
    energy -= load.wrench.head<3>().dot(point);
  }
  return energy;
}

FramePose perturb_pose(const FramePose& pose, double sigma_pos, double sigma_rot,
                       std::mt19937_64& rng) {
  if (sigma_pos <= 0.0 && sigma_rot <= 0.0) return pose;
  std::normal_distribution<double> unit(0.0, 1.0);
  FramePose noisy = pose;
  for (int i = 0; i < 3; ++i) noisy.translation[i] += sigma_pos * unit(rng);
  const Vec3 delta(sigma_rot * unit(rng), sigma_rot * unit(rng), sigma_rot * unit(rng));
  noisy.rotation = pose.rotation * rot_exp(delta);
  return noisy;
}

}  // namespace

PoseLog synthesize_pose_log(const CableModel& model,
                            const std::vector<ExternalLoad>& loads,
                            const ChainState& initial,
                            const SyntheticLogOptions& options) {
  PoseLog log;
  const int tag_count = model.dof() + 1;
  for (int i = 0; i < tag_count; ++i) log.tag_order.push_back(tag_count - i);
  log.tag_spacing_m = model.links[1].length;

  std::mt19937_64 rng(options.seed);
  const int record_every =
      std::max(1, static_cast<int>(std::llround(1.0 / (options.log_rate_hz * options.sim_dt))));

  auto record = [&](double t, const VecX& q) {
    const ChainPoses poses = forward_kinematics(model, q);
    for (int i = 0; i < tag_count; ++i) {
      PoseLogEntry entry;
      entry.t = t;
      entry.tag_id = log.tag_order[i];
      entry.pose = perturb_pose(poses.link_frames[i], options.noise_sigma_pos,
                                options.noise_sigma_rot, rng);
      log.entries.push_back(entry);
    }
  };

  ChainState state = initial;
  long step_index = 0;
  auto advance = [&]() {
    state = step(model, state, loads, options.sim_dt);
    ++step_index;
  };

  const long transient_steps = std::llround(options.transient_s / options.sim_dt);
  while (step_index < transient_steps) {
    if (step_index % record_every == 0) record(step_index * options.sim_dt, state.q);
    advance();
  }

  const long max_steps = std::llround(options.max_duration / options.sim_dt);
  while (step_index < max_steps &&
         state.qd.lpNorm<Eigen::Infinity>() > options.settle_qd) {
    advance();
  }

  const long tail_steps = std::llround(options.tail_s / options.sim_dt);
  const long tail_end = step_index + tail_steps;
  while (step_index <= tail_end) {
    if (step_index % record_every == 0) record(step_index * options.sim_dt, state.q);
    advance();
  }
  return log;
}

namespace {

// --- two-link torques against the Euler-Lagrange closed form -------------

CriterionResult rne_euler_lagrange(Exec) {
  const auto start = Clock::now();
  Check check;

  CableModel chain;
  LinkSpec root;
  root.length = 0.03;
  root.mass = 0.0;
  chain.links.push_back(root);
  LinkSpec first;
  first.length = 0.05;
  first.mass = 0.05;
  first.com_offset = 0.02;
  first.inertia = rod_inertia(first.mass, first.length, kDefaultCableRadius);
  chain.links.push_back(first);
  LinkSpec second;
  second.length = 0.07;
  second.mass = 0.08;
  second.com_offset = 0.045;
  second.inertia = rod_inertia(second.mass, second.length, kDefaultCableRadius);
  chain.links.push_back(second);
  JointSpec pitch_joint;
  pitch_joint.pitch = AxisSpec{0.0, 0.0, -2.0 * kPi, 2.0 * kPi};
  chain.joints = {pitch_joint, pitch_joint};
  chain.validate();

  reference::TwoLinkParams params;
  params.m1 = first.mass;
  params.m2 = second.mass;
  params.L1 = first.length;
  params.c1 = first.com_offset;
  params.c2 = second.com_offset;
  params.I1 = first.inertia(1, 1);
  params.I2 = second.inertia(1, 1);
  params.g = 9.8;

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> angle(-2.5, 2.5);
  std::uniform_real_distribution<double> rate(-3.0, 3.0);
  std::uniform_real_distribution<double> accel(-10.0, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    ChainState state = ChainState::zero(2);
    state.q << angle(rng), angle(rng);
    state.qd << rate(rng), rate(rng);
    state.qdd << accel(rng), accel(rng);
    const VecX torque = rne(chain, state, true);
    const Eigen::Vector2d oracle = reference::two_link_torque(
        params, state.q, state.qd, state.qdd);
    worst = std::max(worst, (torque - oracle).lpNorm<Eigen::Infinity>());
  }
  check.require(worst < 1e-8, "two-link torque mismatch vs Euler-Lagrange");

  // Single-link statics: holding torque equals the gravity-potential
  // gradient -m g c cos(q) for every angle.
  CableModel rod;
  LinkSpec pivot;
  pivot.length = 0.0;
  rod.links.push_back(pivot);
  rod.links.push_back(first);
  rod.joints = {pitch_joint};
  double worst_static = 0.0;
  for (int i = 0; i <= 40; ++i) {
    const double q = -1.5 + 3.0 * i / 40.0;
    ChainState state = ChainState::zero(1);
    state.q[0] = q;
    const double expected = reference::single_link_holding_torque(
        first.mass, first.com_offset, 9.8, q);
    worst_static = std::max(worst_static, std::abs(rne(rod, state, true)[0] - expected));
  }
  check.require(worst_static < 1e-12, "single-link statics mismatch");

  CriterionResult result{"rne_euler_lagrange", check.pass, seconds_since(start), ""};
  std::ostringstream detail;
  detail << "max |tau - oracle| = " << worst << " N m over 1000 states, statics "
         << worst_static;
  result.detail = check.pass ? detail.str() : check.detail.str();
  check.require(result.elapsed_s < 5.0, "runtime budget 5 s exceeded");
  result.pass = check.pass;
  return result;
}

// --- M/bias decomposition, symmetry, positive definiteness ----------------

CriterionResult dynamics_terms_consistency(Exec) {
  const auto start = Clock::now();
  Check check;

  const CableModel sub = test_subchain(VecX::Constant(4, 0.5), VecX::Constant(4, 0.01));
  const CableModel full = default_paper_model();

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::uniform_real_distribution<double> rate(-2.0, 2.0);
  std::uniform_real_distribution<double> accel(-8.0, 8.0);

  double worst_consistency = 0.0;
  double worst_asymmetry = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 500; ++trial) {
    const CableModel& model = trial % 2 == 0 ? sub : full;
    const int n = model.dof();
    ChainState state = ChainState::zero(n);
    for (int i = 0; i < n; ++i) {
      state.q[i] = angle(rng);
      state.qd[i] = rate(rng);
      state.qdd[i] = accel(rng);
    }

    // Independent assembly: raw unit-acceleration columns, no
    // symmetrization.
    MatX raw(n, n);
    ChainState probe = ChainState::zero(n);
    probe.q = state.q;
    for (int j = 0; j < n; ++j) {
      probe.qdd.setZero();
      probe.qdd[j] = 1.0;
      raw.col(j) = rne(model, probe, false);
    }
    worst_asymmetry =
        std::max(worst_asymmetry, (raw - raw.transpose()).lpNorm<Eigen::Infinity>());

    const MatX mass = mass_matrix(model, state.q);
    const VecX bias = bias_forces(model, state.q, state.qd);
    const VecX torque = rne(model, state, true);
    worst_consistency = std::max(
        worst_consistency,
        (torque - (mass * state.qdd + bias)).lpNorm<Eigen::Infinity>());

    if (trial % 25 == 0) {
      Eigen::SelfAdjointEigenSolver<MatX> eig(mass);
      min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
    }
  }
  check.require(worst_consistency < 1e-10, "rne != M qdd + bias beyond 1e-10");
  check.require(worst_asymmetry < 1e-9, "mass matrix asymmetry beyond 1e-9");
  check.require(min_eig > 0.0, "mass matrix not positive definite");

  CriterionResult result{"dynamics_terms_consistency", check.pass, seconds_since(start), ""};
  std::ostringstream detail;
  detail << "max residual " << worst_consistency << ", max asymmetry " << worst_asymmetry
         << ", min eigenvalue " << min_eig;
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

// --- identification round trip --------------------------------------------

struct RecoveryErrors {
  double stiffness = 0.0;  // max relative error over joints
  double damping = 0.0;
};

RecoveryErrors identification_errors(const IdentificationResult& run, const VecX& k_true,
                                     const VecX& d_true) {
  RecoveryErrors errors;
  for (int i = 0; i < k_true.size(); ++i) {
    errors.stiffness = std::max(
        errors.stiffness, std::abs(run.params.stiffness[i] - k_true[i]) / k_true[i]);
    errors.damping = std::max(
        errors.damping, std::abs(run.params.damping[i] - d_true[i]) / d_true[i]);
  }
  return errors;
}

CriterionResult identification_round_trip(Exec exec) {
  const auto start = Clock::now();
  Check check;
  std::ostringstream detail;

  const std::vector<ExternalLoad> loads = {
      tip_weight(identification_subchain(default_paper_model()), 0.1)};

  // Noise-free sweep across the stiffness/damping box, logged at 500 Hz.
  const std::vector<std::pair<double, double>> corners = {
      {0.1, 0.1}, {0.7, 0.02}, {5.0, 0.001}};
  const Eigen::Vector4d k_shape(1.0, 1.15, 0.85, 1.05);
  const Eigen::Vector4d d_shape(1.0, 0.9, 1.1, 0.95);

  std::vector<RecoveryErrors> corner_errors(corners.size());
  std::vector<std::string> corner_failures(corners.size());
  parallel_for(
      static_cast<int>(corners.size()),
      [&](int c) {
        const VecX k_true = corners[c].first * k_shape;
        const VecX d_true = corners[c].second * d_shape;
        const CableModel truth = test_subchain(k_true, d_true);

        // Settle until the residual motion cannot disturb the stiffness
        // estimate: both the dropped damping term and the inertial
        // oscillation must sit below 1e-6 of the spring torque. The
        // measured error scales linearly with this factor; 0.005 leaves
        // an order of magnitude.
        const VecX q_star = static_equilibrium(truth, loads);
        const MatX mass = mass_matrix(truth, q_star);
        double target = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
          const double scale = k_true[i] * std::abs(q_star[i]);
          const double gain = d_true.maxCoeff() + std::sqrt(mass(i, i) * k_true[i]);
          target = std::min(target, 1e-6 * scale / gain);
        }

        SyntheticLogOptions options;
        options.log_rate_hz = 500.0;
        options.transient_s = 8.0;
        options.tail_s = 1.5;
        options.settle_qd = 0.005 * target;
        options.max_duration = 2000.0;
        const PoseLog log = synthesize_pose_log(
            truth, loads, ChainState::zero(4), options);

        const CableModel blank = test_subchain(VecX::Zero(4), VecX::Zero(4));
        try {
          const IdentificationResult run = run_identification(blank, log, loads);
          corner_errors[c] = identification_errors(run, k_true, d_true);
        } catch (const std::exception& err) {
          corner_failures[c] = err.what();
        }
      },
      exec);

  for (size_t c = 0; c < corners.size(); ++c) {
    std::ostringstream name;
    name << "corner (" << corners[c].first << ", " << corners[c].second << ")";
    if (!corner_failures[c].empty()) {
      check.require(false, name.str() + " failed: " + corner_failures[c]);
      continue;
    }
    check.require(corner_errors[c].stiffness < 1e-6,
                  name.str() + " stiffness error " +
                      std::to_string(corner_errors[c].stiffness));
    check.require(corner_errors[c].damping < 0.05,
                  name.str() + " damping error " +
                      std::to_string(corner_errors[c].damping));
    detail << "K" << c << " " << corner_errors[c].stiffness << " D" << c << " "
           << corner_errors[c].damping << "  ";
  }

  // Monte-Carlo noise study: 1 mm / 0.5 deg pose noise at 50 Hz, 50 seeds.
  // The smoothing window and motion threshold are widened to match the
  // noise level a real tag recording carries.
  const int seeds = 50;
  const VecX k_true = 0.2 * k_shape;
  const VecX d_true = 0.1 * d_shape;
  const CableModel truth = test_subchain(k_true, d_true);
  const CableModel blank = test_subchain(VecX::Zero(4), VecX::Zero(4));
  // A failed seed scores infinity; the medians absorb isolated failures.
  std::vector<double> k_errors(seeds, std::numeric_limits<double>::infinity());
  std::vector<double> d_errors(seeds, std::numeric_limits<double>::infinity());
  parallel_for(
      seeds,
      [&](int seed) {
        SyntheticLogOptions options;
        options.log_rate_hz = 50.0;
        options.transient_s = 6.0;
        options.tail_s = 2.0;
        options.settle_qd = 1e-4;
        options.noise_sigma_pos = 1e-3;
        options.noise_sigma_rot = 0.5 * kPi / 180.0;
        options.seed = 1000 + seed;
        const PoseLog log = synthesize_pose_log(
            truth, loads, ChainState::zero(4), options);
        IdentificationOptions pipeline;
        pipeline.smoothing_window = 7;
        pipeline.dynamic_threshold = 0.15;
        try {
          const IdentificationResult run =
              run_identification(blank, log, loads, pipeline);
          const RecoveryErrors errors = identification_errors(run, k_true, d_true);
          k_errors[seed] = errors.stiffness;
          d_errors[seed] = errors.damping;
        } catch (const std::exception&) {
          // left infinite
        }
      },
      exec);

  auto median = [](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    return values[values.size() / 2];
  };
  int failures = 0;
  for (int s = 0; s < seeds; ++s)
    if (std::isinf(k_errors[s])) ++failures;
  check.require(failures <= 2, std::to_string(failures) + " noisy seeds failed");
  const double k_median = median(k_errors);
  const double d_median = median(d_errors);
  check.require(k_median < 0.10,
                "median noisy stiffness error " + std::to_string(k_median));
  check.require(d_median < 0.25,
                "median noisy damping error " + std::to_string(d_median));
  detail << "noisy medians K " << k_median << " D " << d_median << " ("
         << failures << " seed failures)";

  CriterionResult result{"identification_round_trip", check.pass, seconds_since(start), ""};
  check.require(result.elapsed_s < 60.0, "runtime budget 60 s exceeded");
  result.pass = check.pass;
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

// --- sagging monotonicity across tip weights -------------------------------

CriterionResult sagging_monotonicity(Exec exec) {
  const auto start = Clock::now();
  Check check;

  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> stiffness(0.1, 5.0);
  const std::vector<double> weights = {0.0, 0.05, 0.1};

  std::vector<CableModel> models;
  std::vector<std::vector<ExternalLoad>> load_sets;
  for (int setting = 0; setting < 20; ++setting) {
    VecX k(4);
    for (int i = 0; i < 4; ++i) k[i] = stiffness(rng);
    const CableModel model = test_subchain(k, VecX::Constant(4, 0.01));
    for (double mass : weights) {
      models.push_back(model);
      load_sets.push_back(mass > 0.0
                              ? std::vector<ExternalLoad>{tip_weight(model, mass)}
                              : std::vector<ExternalLoad>{});
    }
  }

  const std::vector<VecX> equilibria = batch_static_equilibrium(models, load_sets, exec);
  double min_gap = std::numeric_limits<double>::infinity();
  for (int setting = 0; setting < 20; ++setting) {
    double previous = -1.0;
    for (size_t w = 0; w < weights.size(); ++w) {
      const size_t idx = setting * weights.size() + w;
      const double angle = tip_sagging_angle(models[idx], equilibria[idx]);
      if (w > 0) min_gap = std::min(min_gap, angle - previous);
      previous = angle;
    }
  }
  check.require(min_gap > 0.0, "sagging angle not strictly increasing with tip weight");

  CriterionResult result{"sagging_monotonicity", check.pass, seconds_since(start), ""};
  std::ostringstream detail;
  detail << "min increase " << min_gap << " rad over 20 stiffness settings";
  check.require(result.elapsed_s < 30.0, "runtime budget 30 s exceeded");
  result.pass = check.pass;
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

// --- comparison-report arithmetic -----------------------------------------

struct ReferenceTable {
  std::string name;
  std::vector<std::string> labels;
  std::vector<double> sim, real, expect_diff, expect_percent;
  double expect_max_percent = 0.0;
};

CriterionResult report_arithmetic(Exec) {
  const auto start = Clock::now();
  Check check;

  const std::vector<std::string> joint_labels = {"joint 4", "joint 3", "joint 2", "joint 1"};
  const std::vector<std::string> fixture_labels = {"5/5", "4/4", "3/3", "2/2"};
  const std::vector<ReferenceTable> tables = {
      {"joint positions, no load", joint_labels,
       {0.560, 0.387, 0.168, 0.098}, {0.565, 0.383, 0.171, 0.100},
       {-0.005, 0.004, -0.003, -0.002}, {0.88, 1.04, 1.75, 2.00}, 2.00},
      {"joint positions, 50 g tip", joint_labels,
       {0.569, 0.438, 0.164, 0.115}, {0.565, 0.437, 0.170, 0.117},
       {0.004, 0.001, -0.006, -0.002}, {0.71, 0.23, 3.53, 1.71}, 3.53},
      {"joint positions, 100 g tip", joint_labels,
       {0.619, 0.423, 0.181, 0.098}, {0.618, 0.426, 0.177, 0.095},
       {0.001, -0.003, 0.004, 0.003}, {0.16, 0.70, 2.26, 3.16}, 3.16},
      {"sagging angle, no load", fixture_labels,
       {1.181, 1.009, 0.694, 0.478}, {1.176, 0.976, 0.685, 0.466},
       {0.005, 0.033, 0.009, 0.012}, {0.43, 3.38, 1.31, 2.58}, 3.38},
      {"sagging angle, 50 g tip", fixture_labels,
       {1.301, 1.142, 0.789, 0.529}, {1.304, 1.122, 0.775, 0.513},
       {-0.003, 0.020, 0.014, 0.016}, {0.23, 1.78, 1.81, 3.12}, 3.12},
      {"sagging angle, 100 g tip", fixture_labels,
       {1.328, 1.216, 0.838, 0.587}, {1.354, 1.168, 0.822, 0.573},
       {-0.026, 0.048, 0.016, 0.014}, {1.92, 4.11, 1.95, 2.44}, 4.11},
  };

  int cells = 0;
  for (const ReferenceTable& table : tables) {
    const ComparisonReport report =
        build_report(table.sim, table.real, table.labels, {table.name, -1, 0.0});
    for (size_t i = 0; i < report.rows.size(); ++i) {
      const double diff = round_half_away(report.rows[i].difference, 3);
      const double percent = round_half_away(report.rows[i].percent, 2);
      check.require(std::abs(diff - table.expect_diff[i]) < 1e-9,
                    table.name + " difference cell " + std::to_string(i));
      check.require(std::abs(percent - table.expect_percent[i]) < 1e-9,
                    table.name + " percent cell " + std::to_string(i));
      cells += 2;
    }
    const double max_percent = round_half_away(report.max_percent_error(), 2);
    check.require(std::abs(max_percent - table.expect_max_percent) < 1e-9,
                  table.name + " max percent error");
  }

  CriterionResult result{"report_arithmetic", check.pass, seconds_since(start), ""};
  std::ostringstream detail;
  detail << cells << " cells reproduced at 2-decimal rounding across 6 datasets";
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

// --- curve fitting ----------------------------------------------------------

CriterionResult curve_fitting(Exec) {
  const auto start = Clock::now();
  Check check;
  std::ostringstream detail;

  std::vector<Eigen::Vector2d> exact;
  for (double u : {0.0, 1.0, 2.0, 3.0, 4.0})
    exact.push_back({u, 2.0 * u * u + 3.0 * u + 1.0});
  const QuadraticFit fit = fit_quadratic_projection(exact);
  check.require((fit.coeffs - Vec3(2.0, 3.0, 1.0)).lpNorm<Eigen::Infinity>() < 1e-12,
                "exact quadratic coefficients off beyond 1e-12");

  // Optimality against the normal-equations route on noisy clouds.
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Eigen::Vector2d> points;
    const double c2 = coeff(rng), c1 = coeff(rng), c0 = coeff(rng);
    for (int i = 0; i < 40; ++i) {
      const double u = -1.0 + 2.0 * i / 39.0;
      points.push_back({u, c2 * u * u + c1 * u + c0 + noise(rng)});
    }
    const QuadraticFit qr_fit = fit_quadratic_projection(points);
    const Vec3 ne = reference::quadratic_normal_equations(points);
    double qr_sse = 0.0, ne_sse = 0.0;
    for (const Eigen::Vector2d& p : points) {
      const double u = p.x();
      const double qr_v = (qr_fit.coeffs[0] * u + qr_fit.coeffs[1]) * u + qr_fit.coeffs[2];
      const double ne_v = (ne[0] * u + ne[1]) * u + ne[2];
      qr_sse += (p.y() - qr_v) * (p.y() - qr_v);
      ne_sse += (p.y() - ne_v) * (p.y() - ne_v);
    }
    worst_gap = std::max(worst_gap, qr_sse - ne_sse);
  }
  check.require(worst_gap <= 1e-10, "QR residual exceeds normal-equations residual");

  // Sagging cables from the simulator: cloud sampled along every link.
  double worst_rms = 0.0;
  for (double k : {2.0, 3.0, 5.0}) {
    const CableModel model = test_subchain(VecX::Constant(4, k), VecX::Constant(4, 0.01));
    const std::vector<ExternalLoad> loads = {tip_weight(model, 0.05)};
    const VecX q_star = static_equilibrium(model, loads);
    const ChainPoses poses = forward_kinematics(model, q_star);
    std::vector<Vec3> cloud;
    for (size_t link = 0; link < model.links.size(); ++link) {
      const FramePose& frame = poses.link_frames[link];
      for (int s = 0; s <= 5; ++s) {
        const double offset = model.links[link].length * s / 5.0;
        cloud.push_back(frame.translation + frame.rotation * Vec3(offset, 0.0, 0.0));
      }
    }
    const PolyCurve3D curve = fit_curve3d(cloud);
    worst_rms = std::max(worst_rms, curve.rms_residual);
  }
  check.require(worst_rms < 5e-3, "sagging-cable fit rms " + std::to_string(worst_rms));
  detail << "optimality gap " << worst_gap << ", worst sagging rms " << worst_rms << " m";

  CriterionResult result{"curve_fitting", check.pass, seconds_since(start), ""};
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

// --- servo convergence -------------------------------------------------------

CriterionResult servo_convergence(Exec) {
  const auto start = Clock::now();
  Check check;
  std::ostringstream detail;

  const CableModel model = test_subchain(VecX::Constant(4, 0.5), VecX::Constant(4, 0.01));
  ServoGains gains;
  gains.pos_tol = 1e-3;
  gains.rot_tol = 0.01;
  gains.max_iters = 2000;

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-1.0, 1.0);
  int converged = 0;
  int worst_iters = 0;
  for (int trial = 0; trial < 100; ++trial) {
    VecX q_target(4);
    for (int i = 0; i < 4; ++i) q_target[i] = angle(rng);
    const FramePose target = forward_kinematics(model, q_target).tip;
    KinematicPlant plant(model, VecX::Zero(4));
    const ServoResult run = run_servo(plant, target, gains);
    if (run.converged) ++converged;
    worst_iters = std::max(worst_iters, run.iterations);
  }
  check.require(converged == 100,
                std::to_string(100 - converged) + " of 100 targets failed to converge");

  // Zero-error idempotence.
  {
    KinematicPlant plant(model, VecX::Constant(4, 0.3));
    const FramePose here = plant.tip();
    const ServoResult run = run_servo(plant, here, gains);
    check.require(run.converged && run.iterations == 0 && run.error_history.empty(),
                  "zero-error start did not converge in 0 iterations");
    ServoIntegrator integ;
    const VecX command = servo_step(Vec6::Zero(), tip_jacobian(model, plant.joints()),
                                    gains, integ);
    check.require(command.isZero(0.0) && !integ.has_previous,
                  "zero error produced a nonzero command or touched the integrator");
  }

  // Damped-least-squares norm bound along full servo runs.
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 10; ++trial) {
    VecX q_target(4);
    for (int i = 0; i < 4; ++i) q_target[i] = angle(rng);
    const FramePose target = forward_kinematics(model, q_target).tip;
    KinematicPlant plant(model, VecX::Zero(4));
    ServoIntegrator integ;
    for (int iter = 0; iter < 400; ++iter) {
      const Vec6 error = frame_error(plant.tip(), target);
      const MatX jac = plant.jacobian();
      const VecX command = servo_step(error, jac, gains, integ);
      const Eigen::JacobiSVD<MatX> svd(jac);
      double bound_gain = 0.0;
      for (int s = 0; s < svd.singularValues().size(); ++s) {
        const double sigma = svd.singularValues()[s];
        bound_gain = std::max(bound_gain, sigma / (sigma * sigma +
                                                   gains.damping_lambda * gains.damping_lambda));
      }
      const double bound = bound_gain * (error / gains.time_constant).norm();
      worst_excess = std::max(worst_excess, command.norm() - bound - 1e-12);
      plant.apply(command, gains.loop_dt);
    }
  }
  check.require(worst_excess <= 0.0, "damped-least-squares norm bound violated");
  detail << "100/100 converged, max iterations " << worst_iters << ", bound slack "
         << -worst_excess;

  CriterionResult result{"servo_convergence", check.pass, seconds_since(start), ""};
  check.require(result.elapsed_s < 30.0, "runtime budget 30 s exceeded");
  result.pass = check.pass;
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

// --- energy behavior ----------------------------------------------------------

CriterionResult energy_behavior(Exec) {
  const auto start = Clock::now();
  Check check;
  std::ostringstream detail;

  // Damped chain with a constant tip load: energy never increases.
  {
    const CableModel model =
        test_subchain(VecX::Constant(4, 0.5), VecX::Constant(4, 0.05));
    const std::vector<ExternalLoad> loads = {tip_weight(model, 0.1)};
    ChainState initial = ChainState::zero(4);
    initial.qd << 1.0, -0.5, 0.5, -0.25;
    const double e0 = chain_energy(model, initial, loads);
    check.require(e0 > 0.0, "starting energy not positive");

    LoadSchedule schedule = {{0.0, loads}};
    const Trajectory traj = simulate(model, initial, schedule, 10.0, 1e-3);
    double previous = e0;
    double worst_rise = -std::numeric_limits<double>::infinity();
    for (size_t k = 1; k < traj.samples.size(); ++k) {
      const double energy = chain_energy(model, traj.samples[k], loads);
      worst_rise = std::max(worst_rise, energy - previous);
      previous = energy;
    }
    check.require(worst_rise <= 1e-9 * e0,
                  "damped energy rose by " + std::to_string(worst_rise));
    detail << "max per-step energy rise " << worst_rise << " J";
  }

  // Free chain, gravity off: kinetic energy drift stays under 0.1%.
  {
    CableModel model = test_subchain(VecX::Zero(4), VecX::Zero(4), 1e6);
    model.gravity.setZero();
    ChainState initial = ChainState::zero(4);
    initial.qd << 0.5, -0.3, 0.4, -0.2;
    const double e0 = chain_energy(model, initial, {});
    const Trajectory traj = simulate(model, initial, {}, 10.0, 1e-3);
    double worst_drift = 0.0;
    for (size_t k = 0; k < traj.samples.size(); k += 10) {
      const double energy = chain_energy(model, traj.samples[k], {});
      worst_drift = std::max(worst_drift, std::abs(energy - e0) / e0);
    }
    check.require(worst_drift < 1e-3,
                  "kinetic energy drift " + std::to_string(worst_drift));
    detail << ", free-chain drift " << worst_drift;
  }

  CriterionResult result{"energy_behavior", check.pass, seconds_since(start), ""};
  result.detail = check.pass ? detail.str() : check.detail.str();
  return result;
}

}  // namespace

std::vector<std::string> criterion_names() {
  return {"rne_euler_lagrange",    "dynamics_terms_consistency",
          "identification_round_trip", "sagging_monotonicity",
          "report_arithmetic",     "curve_fitting",
          "servo_convergence",     "energy_behavior"};
}

std::vector<CriterionResult> run_all(const std::string& only, Exec exec) {
  using Runner = CriterionResult (*)(Exec);
  const std::vector<std::pair<std::string, Runner>> scenarios = {
      {"rne_euler_lagrange", rne_euler_lagrange},
      {"dynamics_terms_consistency", dynamics_terms_consistency},
      {"identification_round_trip", identification_round_trip},
      {"sagging_monotonicity", sagging_monotonicity},
      {"report_arithmetic", report_arithmetic},
      {"curve_fitting", curve_fitting},
      {"servo_convergence", servo_convergence},
      {"energy_behavior", energy_behavior},
  };
  std::vector<CriterionResult> results;
  for (const auto& [name, runner] : scenarios) {
    if (!only.empty() && name != only) continue;
    try {
      results.push_back(runner(exec));
    } catch (const std::exception& err) {
      results.push_back({name, false, 0.0, std::string("exception: ") + err.what()});
    }
  }
  if (results.empty() && !only.empty())
    throw std::invalid_argument("unknown criterion: " + only);
  return results;
}

}  // namespace acceptance
}  // namespace cablesim
