#include "cablesim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cablesim {

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return in;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_number(const std::string& text, const std::string& context) {
  try {
    size_t used = 0;
    const double value = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw std::runtime_error(context + ": not a number: '" + text + "'");
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
  std::ostringstream out;
  const int n = trajectory.samples.empty()
                    ? 0
                    : static_cast<int>(trajectory.samples.front().q.size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",q" << i;
  for (int i = 1; i <= n; ++i) out << ",qd" << i;
  for (int i = 1; i <= n; ++i) out << ",qdd" << i;
  out << "\n";
  for (size_t k = 0; k < trajectory.samples.size(); ++k) {
    out << format_number(trajectory.time[k]);
    const ChainState& s = trajectory.samples[k];
    for (int i = 0; i < n; ++i) out << "," << format_number(s.q[i]);
    for (int i = 0; i < n; ++i) out << "," << format_number(s.qd[i]);
    for (int i = 0; i < n; ++i) out << "," << format_number(s.qdd[i]);
    out << "\n";
  }
  return out.str();
}

void write_trajectory_csv(const Trajectory& trajectory, const std::string& path) {
  open_output(path) << trajectory_to_csv(trajectory);
}

Trajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty trajectory file");
  const size_t columns = split_csv(line).size();
  if (columns < 4 || (columns - 1) % 3 != 0)
    throw std::runtime_error(path + ": malformed trajectory header");
  const int n = static_cast<int>((columns - 1) / 3);

  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != columns)
      throw std::runtime_error(path + ": row width mismatch");
    traj.time.push_back(parse_number(fields[0], path));
    ChainState state = ChainState::zero(n);
    for (int i = 0; i < n; ++i) state.q[i] = parse_number(fields[1 + i], path);
    for (int i = 0; i < n; ++i) state.qd[i] = parse_number(fields[1 + n + i], path);
    for (int i = 0; i < n; ++i) state.qdd[i] = parse_number(fields[1 + 2 * n + i], path);
    traj.samples.push_back(state);
  }
  if (traj.time.size() > 1) traj.dt = traj.time[1] - traj.time[0];
  return traj;
}

FramePose pose_from_quaternion(const Vec3& translation, double qx, double qy,
                               double qz, double qw) {
  Eigen::Quaterniond quat(qw, qx, qy, qz);
  if (quat.norm() < 1e-12)
    throw std::runtime_error("pose quaternion has zero norm");
  quat.normalize();
  FramePose pose;
  pose.rotation = quat.toRotationMatrix();
  pose.translation = translation;
  return pose;
}

Eigen::Vector4d quaternion_of(const FramePose& pose) {
  Eigen::Quaterniond quat(pose.rotation);
  if (quat.w() < 0.0) quat.coeffs() = -quat.coeffs();
  return {quat.x(), quat.y(), quat.z(), quat.w()};
}

void write_pose_log(const PoseLog& log, const std::string& csv_path,
                    const std::string& meta_path) {
  std::ofstream out = open_output(csv_path);
  out << "t,tag_id,x,y,z,qx,qy,qz,qw\n";
  for (const PoseLogEntry& entry : log.entries) {
    const Eigen::Vector4d quat = quaternion_of(entry.pose);
    out << format_number(entry.t) << "," << entry.tag_id;
    for (int i = 0; i < 3; ++i) out << "," << format_number(entry.pose.translation[i]);
    for (int i = 0; i < 4; ++i) out << "," << format_number(quat[i]);
    out << "\n";
  }

  nlohmann::json meta;
  meta["tag_order"] = log.tag_order;
  meta["tag_spacing_m"] = log.tag_spacing_m;
  open_output(meta_path) << meta.dump(2) << "\n";
}

PoseLog read_pose_log(const std::string& csv_path, const std::string& meta_path) {
  PoseLog log;
  {
    std::ifstream meta_in = open_input(meta_path);
    nlohmann::json meta;
    try {
      meta_in >> meta;
    } catch (const nlohmann::json::parse_error& err) {
      throw std::runtime_error(meta_path + ": " + err.what());
    }
    if (!meta.contains("tag_order") || !meta["tag_order"].is_array())
      throw std::runtime_error(meta_path + ": missing tag_order array");
    for (const auto& id : meta["tag_order"]) log.tag_order.push_back(id.get<int>());
    log.tag_spacing_m = meta.value("tag_spacing_m", 0.0);
  }

  std::ifstream in = open_input(csv_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(csv_path + ": empty pose log");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 9)
      throw std::runtime_error(csv_path + ": expected 9 columns, got " +
                               std::to_string(fields.size()));
    PoseLogEntry entry;
    entry.t = parse_number(fields[0], csv_path);
    entry.tag_id = static_cast<int>(parse_number(fields[1], csv_path));
    const Vec3 translation(parse_number(fields[2], csv_path),
                           parse_number(fields[3], csv_path),
                           parse_number(fields[4], csv_path));
    entry.pose = pose_from_quaternion(translation, parse_number(fields[5], csv_path),
                                      parse_number(fields[6], csv_path),
                                      parse_number(fields[7], csv_path),
                                      parse_number(fields[8], csv_path));
    log.entries.push_back(entry);
  }
  log.validate();
  return log;
}

std::vector<Vec3> read_cloud_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<Vec3> cloud;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 3)
      throw std::runtime_error(path + ": expected 3 columns, got " +
                               std::to_string(fields.size()));
    if (first) {
      first = false;
      try {
        parse_number(fields[0], path);
      } catch (const std::runtime_error&) {
        continue;  // header row
      }
    }
    cloud.emplace_back(parse_number(fields[0], path), parse_number(fields[1], path),
                       parse_number(fields[2], path));
  }
  return cloud;
}

void write_polyline_csv(const std::vector<Vec3>& points, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "x,y,z\n";
  for (const Vec3& p : points)
    out << format_number(p.x()) << "," << format_number(p.y()) << ","
        << format_number(p.z()) << "\n";
}

void write_servo_report(const ServoResult& result,
                        const std::vector<VecX>& joint_history,
                        const std::string& path) {
  std::ofstream out = open_output(path);
  const int n = joint_history.empty() ? 0 : static_cast<int>(joint_history.front().size());
  out << "iter,err_pos,err_rot";
  for (int i = 1; i <= n; ++i) out << ",q" << i;
  out << "\n";
  for (size_t k = 0; k < result.error_history.size(); ++k) {
    out << k << "," << format_number(result.error_history[k].x()) << ","
        << format_number(result.error_history[k].y());
    if (k < joint_history.size())
      for (int i = 0; i < n; ++i) out << "," << format_number(joint_history[k][i]);
    out << "\n";
  }
}

std::vector<std::pair<std::string, double>> read_values_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::pair<std::string, double>> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 2)
      throw std::runtime_error(path + ": expected label,value rows");
    if (first) {
      first = false;
      try {
        parse_number(fields[1], path);
      } catch (const std::runtime_error&) {
        continue;  // header row
      }
    }
    values.emplace_back(fields[0], parse_number(fields[1], path));
  }
  return values;
}

}  // namespace cablesim
