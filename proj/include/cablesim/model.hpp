#pragma once

#include <string>

#include "cablesim/types.hpp"

namespace cablesim {

/// Parses a model from its JSON config text. Keys carry SI units in their
/// names (length_m, mass_kg, stiffness_nm_per_rad, ...); see README for the
/// schema. Throws std::invalid_argument with the offending key path.
CableModel load_model(const std::string& config_text);

/// Reads a config file from disk. Throws std::runtime_error when the file
/// cannot be read.
CableModel load_model_file(const std::string& path);

/// Serializes a model back to config text. load(save(m)) reproduces every
/// numeric field bit for bit.
std::string save_model(const CableModel& model);

void save_model_file(const CableModel& model, const std::string& path);

/// The 16-link cable: 15 cable links of 0.05 m / 0.05 kg plus a 0.10 m /
/// 0.10 kg plug welded to the last one. Fourteen pitch+roll joints, roll
/// locked at zero, stiffness and damping zero until identified.
CableModel default_paper_model();

/// Sub-model used for identification: the 4 distal cable links plus the
/// plug, rooted at the fifth-from-last cable link, pitch only (4 DOF).
/// Requires at least 6 links.
CableModel identification_subchain(const CableModel& model);

/// Reroots the chain at a link given by its distance from the tip: link 1
/// is the cable link the plug is welded to, link 2 the one before it, and
/// so on. The fixed link becomes the new welded root; distal links and
/// joints are preserved unchanged. Throws when no articulated DOF remains
/// distal to the fixed link.
CableModel fix_link(const CableModel& model, int link_id_from_tip);

}  // namespace cablesim
