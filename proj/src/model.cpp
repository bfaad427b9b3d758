#include "cablesim/model.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cablesim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  throw std::invalid_argument(key + ": " + message);
}

double require_number(const json& node, const std::string& key,
                      const std::string& path) {
  if (!node.contains(key)) fail(path + "." + key, "missing required key");
  if (!node[key].is_number()) fail(path + "." + key, "expected a number");
  return node[key].get<double>();
}

AxisSpec parse_axis(const json& node, const std::string& path) {
  AxisSpec axis;
  axis.stiffness = require_number(node, "stiffness_nm_per_rad", path);
  axis.damping = require_number(node, "damping_nms_per_rad", path);
  if (!node.contains("limits_rad")) fail(path + ".limits_rad", "missing required key");
  const json& lim = node["limits_rad"];
  if (!lim.is_array() || lim.size() != 2 || !lim[0].is_number() || !lim[1].is_number())
    fail(path + ".limits_rad", "expected [lower, upper]");
  axis.lower = lim[0].get<double>();
  axis.upper = lim[1].get<double>();
  return axis;
}

json axis_to_json(const AxisSpec& axis) {
  return json{{"stiffness_nm_per_rad", axis.stiffness},
              {"damping_nms_per_rad", axis.damping},
              {"limits_rad", {axis.lower, axis.upper}}};
}

}  // namespace

CableModel load_model(const std::string& config_text) {
  json doc;
  try {
    doc = json::parse(config_text);
  } catch (const json::parse_error& err) {
    throw std::invalid_argument(std::string("config parse failure: ") + err.what());
  }

  CableModel model;
  if (doc.contains("gravity_mps2")) {
    const json& g = doc["gravity_mps2"];
    if (!g.is_array() || g.size() != 3) fail("gravity_mps2", "expected [gx, gy, gz]");
    for (int i = 0; i < 3; ++i) {
      if (!g[i].is_number()) fail("gravity_mps2", "expected a number");
      model.gravity[i] = g[i].get<double>();
    }
  }

  if (!doc.contains("links") || !doc["links"].is_array() || doc["links"].empty())
    fail("links", "expected a non-empty array");
  for (size_t i = 0; i < doc["links"].size(); ++i) {
    const json& node = doc["links"][i];
    const std::string path = "links[" + std::to_string(i) + "]";
    LinkSpec link;
    link.length = require_number(node, "length_m", path);
    link.mass = require_number(node, "mass_kg", path);
    link.com_offset = node.contains("com_offset_m")
                          ? require_number(node, "com_offset_m", path)
                          : 0.5 * link.length;
    if (node.contains("inertia_kgm2")) {
      const json& inertia = node["inertia_kgm2"];
      if (!inertia.is_array() || inertia.size() != 9)
        fail(path + ".inertia_kgm2", "expected 9 numbers, row major");
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          if (!inertia[3 * r + c].is_number())
            fail(path + ".inertia_kgm2", "expected a number");
          link.inertia(r, c) = inertia[3 * r + c].get<double>();
        }
    } else {
      const double radius = node.contains("radius_m")
                                ? require_number(node, "radius_m", path)
                                : kDefaultCableRadius;
      link.inertia = rod_inertia(link.mass, link.length, radius);
    }
    model.links.push_back(link);
  }

  if (!doc.contains("joints") || !doc["joints"].is_array())
    fail("joints", "expected an array");
  for (size_t i = 0; i < doc["joints"].size(); ++i) {
    const json& node = doc["joints"][i];
    const std::string path = "joints[" + std::to_string(i) + "]";
    JointSpec joint;
    if (node.contains("pitch")) joint.pitch = parse_axis(node["pitch"], path + ".pitch");
    if (node.contains("roll")) joint.roll = parse_axis(node["roll"], path + ".roll");
    model.joints.push_back(joint);
  }

  model.validate();
  return model;
}

CableModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model config: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return load_model(text.str());
}

std::string save_model(const CableModel& model) {
  json doc;
  doc["gravity_mps2"] = {model.gravity[0], model.gravity[1], model.gravity[2]};
  doc["links"] = json::array();
  for (const LinkSpec& link : model.links) {
    json node{{"length_m", link.length},
              {"mass_kg", link.mass},
              {"com_offset_m", link.com_offset}};
    json inertia = json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) inertia.push_back(link.inertia(r, c));
    node["inertia_kgm2"] = inertia;
    doc["links"].push_back(node);
  }
  doc["joints"] = json::array();
  for (const JointSpec& joint : model.joints) {
    json node = json::object();
    if (joint.pitch) node["pitch"] = axis_to_json(*joint.pitch);
    if (joint.roll) node["roll"] = axis_to_json(*joint.roll);
    doc["joints"].push_back(node);
  }
  return doc.dump(2) + "\n";
}

void save_model_file(const CableModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model config: " + path);
  out << save_model(model);
}

CableModel default_paper_model() {
  CableModel model;
  LinkSpec cable_link;
  cable_link.length = 0.05;
  cable_link.mass = 0.05;
  cable_link.com_offset = 0.025;
  cable_link.inertia = rod_inertia(cable_link.mass, cable_link.length, kDefaultCableRadius);
  for (int i = 0; i < 15; ++i) model.links.push_back(cable_link);

  LinkSpec plug;
  plug.length = 0.10;
  plug.mass = 0.10;
  plug.com_offset = 0.05;
  plug.inertia = rod_inertia(plug.mass, plug.length, kDefaultCableRadius);
  model.links.push_back(plug);

  JointSpec revolute;
  revolute.pitch = AxisSpec{0.0, 0.0, -kPi, kPi};
  revolute.roll = AxisSpec{0.0, 0.0, 0.0, 0.0};  // locked until identified
  for (int i = 0; i < 14; ++i) model.joints.push_back(revolute);
  model.joints.push_back(JointSpec{});  // plug is welded to the last cable link

  model.validate();
  return model;
}

CableModel fix_link(const CableModel& model, int link_id_from_tip) {
  const int count = static_cast<int>(model.links.size());
  if (link_id_from_tip < 0 || link_id_from_tip >= count)
    throw std::invalid_argument("fix_link: link " + std::to_string(link_id_from_tip) +
                                " does not exist in a " + std::to_string(count) +
                                "-link chain");
  const int root = count - 1 - link_id_from_tip;
  CableModel sub;
  sub.gravity = model.gravity;
  sub.links.assign(model.links.begin() + root, model.links.end());
  sub.joints.assign(model.joints.begin() + root, model.joints.end());
  if (sub.dof() == 0)
    throw std::invalid_argument("fix_link: no articulated joint remains distal to link " +
                                std::to_string(link_id_from_tip));
  return sub;
}

CableModel identification_subchain(const CableModel& model) {
  if (model.links.size() < 6)
    throw std::invalid_argument(
        "identification_subchain: model too short, need at least 6 links, got " +
        std::to_string(model.links.size()));
  CableModel sub = fix_link(model, 5);
  for (size_t i = 0; i < sub.joints.size(); ++i) {
    sub.joints[i].roll.reset();
    if (i + 1 == sub.joints.size()) sub.joints[i].pitch.reset();  // rigid plug mount
  }
  if (sub.dof() != 4)
    throw std::invalid_argument("identification_subchain: expected 4 pitch DOF, got " +
                                std::to_string(sub.dof()));
  return sub;
}

}  // namespace cablesim
