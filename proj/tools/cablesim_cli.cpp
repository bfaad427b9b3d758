// Command-line surface: simulation, statics, identification, curve fitting,
// servoing, comparison reports and the validation suite.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cablesim/acceptance.hpp"
#include "cablesim/batch.hpp"
#include "cablesim/curvefit.hpp"
#include "cablesim/identify.hpp"
#include "cablesim/io.hpp"
#include "cablesim/kinematics.hpp"
#include "cablesim/model.hpp"
#include "cablesim/report.hpp"
#include "cablesim/rne.hpp"
#include "cablesim/servo.hpp"
#include "cablesim/simulate.hpp"

namespace {

using namespace cablesim;

CableModel resolve_model(const std::string& path) {
  if (path.empty()) return default_paper_model();
  return load_model_file(path);
}

VecX parse_vector(const std::string& text, int expected, const std::string& what) {
  std::vector<double> values;
  std::istringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) values.push_back(std::stod(field));
  if (expected >= 0 && static_cast<int>(values.size()) != expected)
    throw std::runtime_error(what + ": expected " + std::to_string(expected) +
                             " comma-separated values, got " +
                             std::to_string(values.size()));
  VecX out(values.size());
  for (size_t i = 0; i < values.size(); ++i) out[i] = values[i];
  return out;
}

std::vector<ExternalLoad> tip_loads(const CableModel& model, double tip_mass) {
  std::vector<ExternalLoad> loads;
  if (tip_mass > 0.0) loads.push_back(tip_weight(model, tip_mass));
  return loads;
}

int cmd_simulate(const std::string& model_path, const std::string& q0_text,
                 double tip_mass, double duration, double dt, const std::string& out) {
  const CableModel model = resolve_model(model_path);
  ChainState initial = ChainState::zero(model.dof());
  if (!q0_text.empty()) initial.q = parse_vector(q0_text, model.dof(), "--q0");

  LoadSchedule schedule;
  if (tip_mass > 0.0) schedule.push_back({0.0, tip_loads(model, tip_mass)});
  const Trajectory traj = simulate(model, initial, schedule, duration, dt);
  if (out.empty()) {
    std::cout << trajectory_to_csv(traj);
  } else {
    write_trajectory_csv(traj, out);
    std::cout << "wrote " << traj.samples.size() << " samples to " << out << "\n";
  }
  return 0;
}

int cmd_static(const std::string& model_path, int fixed_link, double tip_mass,
               const std::string& out) {
  CableModel model = resolve_model(model_path);
  if (fixed_link > 0) model = fix_link(model, fixed_link);
  const std::vector<ExternalLoad> loads = tip_loads(model, tip_mass);
  const VecX q_star = static_equilibrium(model, loads);
  const double sagging = tip_sagging_angle(model, q_star);

  std::ostringstream text;
  for (int i = 0; i < q_star.size(); ++i)
    text << "joint " << q_star.size() - i << ": " << format_number(q_star[i])
         << " rad\n";
  text << "sagging angle: " << format_number(sagging) << " rad\n";
  std::cout << text.str();
  if (!out.empty()) {
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot write " + out);
    file << "label,value\n";
    for (int i = 0; i < q_star.size(); ++i)
      file << "joint " << q_star.size() - i << "," << format_number(q_star[i]) << "\n";
    file << "sagging angle," << format_number(sagging) << "\n";
  }
  return 0;
}

int cmd_identify(const std::string& model_path, const std::string& log_path,
                 const std::string& meta_path, double tip_mass,
                 const std::string& out) {
  CableModel model = resolve_model(model_path);
  if (model.dof() != 4) model = identification_subchain(model);
  const std::string meta =
      meta_path.empty() ? log_path + ".meta.json" : meta_path;
  const PoseLog log = read_pose_log(log_path, meta);
  const std::vector<ExternalLoad> loads = tip_loads(model, tip_mass);

  const IdentificationResult result = run_identification(model, log, loads);
  std::cout << "instants: " << result.instants << " (dropped "
            << result.dropped_instants << ")\n"
            << "static samples: " << result.static_samples
            << ", dynamic samples: " << result.dynamic_samples << "\n";
  for (int i = 0; i < result.params.stiffness.size(); ++i)
    std::cout << "joint " << result.params.stiffness.size() - i
              << ": stiffness " << format_number(result.params.stiffness[i])
              << " N m/rad, damping " << format_number(result.params.damping[i])
              << " N m s/rad\n";
  std::cout << "regression residual: " << format_number(result.params.residual)
            << " N m, regressor condition: "
            << format_number(result.params.condition) << "\n";
  if (!out.empty()) {
    save_model_file(result.updated, out);
    std::cout << "wrote updated model to " << out << "\n";
  }
  return 0;
}

int cmd_fit_curve(const std::string& cloud_path, int count, double grasp_arclength,
                  const std::string& tip_end, const std::string& out) {
  const std::vector<Vec3> cloud = read_cloud_csv(cloud_path);
  PolyCurve3D curve = fit_curve3d(cloud);
  curve.tip_at_max = tip_end != "min";

  const char axis_name[3] = {'x', 'y', 'z'};
  const auto tv = curve.transverse_axes();
  std::cout << "axis: " << axis_name[curve.axis] << ", range ["
            << format_number(curve.param_min) << ", "
            << format_number(curve.param_max) << "] m\n";
  std::cout << axis_name[tv[0]] << " = " << format_number(curve.coeffs_a[0]) << " u^2 + "
            << format_number(curve.coeffs_a[1]) << " u + "
            << format_number(curve.coeffs_a[2]) << "\n";
  std::cout << axis_name[tv[1]] << " = " << format_number(curve.coeffs_b[0]) << " u^2 + "
            << format_number(curve.coeffs_b[1]) << " u + "
            << format_number(curve.coeffs_b[2]) << "\n";
  std::cout << "rms residual: " << format_number(curve.rms_residual) << " m, arc length: "
            << format_number(curve_arclength(curve)) << " m\n";

  if (grasp_arclength >= 0.0) {
    const GraspPoint grasp = grasp_point(curve, grasp_arclength);
    std::cout << "grasp point: " << format_number(grasp.position.x()) << ", "
              << format_number(grasp.position.y()) << ", "
              << format_number(grasp.position.z()) << " (tangent "
              << format_number(grasp.tangent.x()) << ", "
              << format_number(grasp.tangent.y()) << ", "
              << format_number(grasp.tangent.z()) << ")\n";
  }
  if (!out.empty()) {
    write_polyline_csv(sample_curve(curve, count), out);
    std::cout << "wrote " << count << " polyline points to " << out << "\n";
  }
  return 0;
}

int cmd_servo(const std::string& model_path, const std::string& target_text,
              const std::string& q0_text, const ServoGains& gains,
              const std::string& report_path) {
  CableModel model = resolve_model(model_path);
  if (model.dof() != 4) model = identification_subchain(model);
  const VecX target_fields = parse_vector(target_text, 7, "--target");
  const FramePose target = pose_from_quaternion(
      target_fields.head<3>(), target_fields[3], target_fields[4], target_fields[5],
      target_fields[6]);

  VecX q0 = VecX::Zero(model.dof());
  if (!q0_text.empty()) q0 = parse_vector(q0_text, model.dof(), "--q0");
  KinematicPlant plant(model, q0);

  // Rerun step by step so the per-iteration joint history can be reported.
  std::vector<VecX> joint_history;
  ServoIntegrator integ;
  ServoResult result;
  Vec6 error = frame_error(plant.tip(), target);
  const double initial_pos = error.head<3>().norm();
  while (true) {
    const double pos = error.head<3>().norm();
    const double rot = error.tail<3>().norm();
    if (pos < gains.pos_tol && rot < gains.rot_tol) {
      result.converged = true;
      break;
    }
    if (pos > 10.0 * (initial_pos + gains.pos_tol)) {
      result.diverged = true;
      break;
    }
    if (result.iterations >= gains.max_iters) break;
    const VecX command = servo_step(error, plant.jacobian(), gains, integ);
    plant.apply(command, gains.loop_dt);
    result.error_history.emplace_back(pos, rot);
    joint_history.push_back(plant.joints());
    ++result.iterations;
    error = frame_error(plant.tip(), target);
  }
  result.final_joints = plant.joints();

  std::cout << (result.converged ? "converged" : result.diverged ? "diverged" : "iteration budget exhausted")
            << " after " << result.iterations << " iterations\n";
  std::cout << "final error: " << format_number(error.head<3>().norm()) << " m, "
            << format_number(error.tail<3>().norm()) << " rad\n";
  if (!report_path.empty()) {
    write_servo_report(result, joint_history, report_path);
    std::cout << "wrote servo report to " << report_path << "\n";
  }
  return result.converged ? 0 : 3;
}

int cmd_report(const std::string& sim_path, const std::string& real_path,
               const std::string& experiment, const std::string& out) {
  const auto sim = read_values_csv(sim_path);
  const auto real = read_values_csv(real_path);
  if (sim.size() != real.size())
    throw std::runtime_error("report: sim and real files differ in row count");
  std::vector<double> sim_values, real_values;
  std::vector<std::string> labels;
  for (size_t i = 0; i < sim.size(); ++i) {
    labels.push_back(sim[i].first);
    sim_values.push_back(sim[i].second);
    real_values.push_back(real[i].second);
  }
  const ComparisonReport report =
      build_report(sim_values, real_values, labels, {experiment, -1, 0.0});
  std::cout << render_text(report);
  if (!out.empty()) {
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot write " + out);
    file << render_csv(report);
  }
  return 0;
}

int cmd_validate(const std::string& only, bool serial) {
  const auto results =
      acceptance::run_all(only, serial ? Exec::serial : Exec::parallel);
  bool all_pass = true;
  for (const auto& result : results) {
    std::printf("[%s] %-28s (%6.2f s) %s\n", result.pass ? "PASS" : "FAIL",
                result.name.c_str(), result.elapsed_s, result.detail.c_str());
    all_pass = all_pass && result.pass;
  }
  return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flexible-cable modeling toolkit: simulation, identification, "
               "curve fitting and tip servoing"};
  app.require_subcommand(1);

  std::string model_path, out, q0_text;
  double dt = 1e-3, tip_mass = 0.0;

  auto* simulate_cmd = app.add_subcommand("simulate", "integrate the passive chain");
  double duration = 1.0;
  simulate_cmd->add_option("--model", model_path, "model config file");
  simulate_cmd->add_option("--q0", q0_text, "initial joint angles, comma separated");
  simulate_cmd->add_option("--tip-mass", tip_mass, "tip weight in kg");
  simulate_cmd->add_option("--duration", duration, "seconds to simulate");
  simulate_cmd->add_option("--dt", dt, "integrator step in seconds");
  simulate_cmd->add_option("--out", out, "trajectory CSV path");

  auto* static_cmd = app.add_subcommand("static", "solve the loaded equilibrium");
  int fixed_link = 0;
  static_cmd->add_option("--model", model_path, "model config file");
  static_cmd->add_option("--fix-link", fixed_link,
                         "fix this link (counted from the tip) horizontally");
  static_cmd->add_option("--tip-mass", tip_mass, "tip weight in kg");
  static_cmd->add_option("--out", out, "equilibrium CSV path");

  auto* identify_cmd = app.add_subcommand("identify", "estimate joint stiffness and damping");
  std::string log_path, meta_path;
  identify_cmd->add_option("--model", model_path, "model config file");
  identify_cmd->add_option("--log", log_path, "pose log CSV")->required();
  identify_cmd->add_option("--tags", meta_path, "tag metadata JSON (default <log>.meta.json)");
  identify_cmd->add_option("--tip-mass", tip_mass, "tip weight during the recording, kg");
  identify_cmd->add_option("--out", out, "updated model config path");

  auto* fit_cmd = app.add_subcommand("fit-curve", "fit the geometric cable model");
  std::string cloud_path, tip_end = "max";
  int sample_count = 50;
  double grasp_arclength = -1.0;
  fit_cmd->add_option("--cloud", cloud_path, "point cloud CSV")->required();
  fit_cmd->add_option("--count", sample_count, "polyline sample count");
  fit_cmd->add_option("--grasp-arclength", grasp_arclength,
                      "report the grasp point this far from the tip, m");
  fit_cmd->add_option("--tip-end", tip_end, "which parameter end is the tip: min|max");
  fit_cmd->add_option("--out", out, "polyline CSV path");

  auto* servo_cmd = app.add_subcommand("servo", "drive the tip to a target frame");
  std::string target_text;
  ServoGains gains;
  servo_cmd->add_option("--model", model_path, "model config file");
  servo_cmd->add_option("--target", target_text, "x,y,z,qx,qy,qz,qw")->required();
  servo_cmd->add_option("--q0", q0_text, "initial joint angles");
  servo_cmd->add_option("--kp", gains.kp, "proportional gain");
  servo_cmd->add_option("--ki", gains.ki, "integral gain");
  servo_cmd->add_option("--kd", gains.kd, "derivative gain");
  servo_cmd->add_option("--time-constant", gains.time_constant, "error-to-velocity divisor, s");
  servo_cmd->add_option("--lambda", gains.damping_lambda, "pseudoinverse damping");
  servo_cmd->add_option("--pos-tol", gains.pos_tol, "position tolerance, m");
  servo_cmd->add_option("--rot-tol", gains.rot_tol, "rotation tolerance, rad");
  servo_cmd->add_option("--max-iters", gains.max_iters, "iteration budget");
  servo_cmd->add_option("--dt", gains.loop_dt, "control period, s");
  servo_cmd->add_option("--report", out, "per-iteration CSV path");

  auto* report_cmd = app.add_subcommand("report", "sim-vs-real comparison table");
  std::string sim_path, real_path, experiment;
  report_cmd->add_option("--sim", sim_path, "simulated label,value CSV")->required();
  report_cmd->add_option("--real", real_path, "measured label,value CSV")->required();
  report_cmd->add_option("--experiment", experiment, "table caption");
  report_cmd->add_option("--out", out, "report CSV path");

  auto* validate_cmd = app.add_subcommand("validate", "run the synthetic validation suite");
  std::string only;
  bool serial = false;
  validate_cmd->add_option("--only", only, "run a single criterion by name");
  validate_cmd->add_flag("--serial", serial, "disable parallel execution");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate_cmd->parsed())
      return cmd_simulate(model_path, q0_text, tip_mass, duration, dt, out);
    if (static_cmd->parsed()) return cmd_static(model_path, fixed_link, tip_mass, out);
    if (identify_cmd->parsed())
      return cmd_identify(model_path, log_path, meta_path, tip_mass, out);
    if (fit_cmd->parsed())
      return cmd_fit_curve(cloud_path, sample_count, grasp_arclength, tip_end, out);
    if (servo_cmd->parsed())
      return cmd_servo(model_path, target_text, q0_text, gains, out);
    if (report_cmd->parsed()) return cmd_report(sim_path, real_path, experiment, out);
    if (validate_cmd->parsed()) return cmd_validate(only, serial);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
