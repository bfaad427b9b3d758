#pragma once

#include <array>

#include "cablesim/types.hpp"

namespace cablesim {

struct QuadraticFit {
  Vec3 coeffs = Vec3::Zero();  // (c2, c1, c0): v = c2 u^2 + c1 u + c0
  double rms = 0.0;            // sqrt(mean squared residual)
};

/// Least-squares quadratic through (u, v) pairs, solved by column-pivoted
/// QR of the Vandermonde matrix. Needs at least 3 points with 3 distinct
/// u values.
QuadraticFit fit_quadratic_projection(const std::vector<Eigen::Vector2d>& points);

/// 3D cable curve as two quadratic projections over a common parameter
/// axis. For axis k the transverse coordinates (a, b) are the remaining
/// two in x, y, z order.
struct PolyCurve3D {
  int axis = 0;                  // 0 = x, 1 = y, 2 = z
  Vec3 coeffs_a = Vec3::Zero();  // first transverse coordinate
  Vec3 coeffs_b = Vec3::Zero();  // second transverse coordinate
  double param_min = 0.0;
  double param_max = 0.0;
  double rms_residual = 0.0;     // m, transverse plane
  bool tip_at_max = true;        // which parameter end carries the plug

  std::array<int, 2> transverse_axes() const;
  Vec3 point_at(double u) const;
  Vec3 derivative_at(double u) const;  // d(point)/du
};

/// Fits both projections over the axis of largest cloud extent (ties break
/// toward x, then y). The cloud must span more than 1 cm along that axis.
PolyCurve3D fit_curve3d(const std::vector<Vec3>& cloud);

/// count points at uniform parameter spacing over the curve's range,
/// ordered from param_min to param_max. count >= 2.
std::vector<Vec3> sample_curve(const PolyCurve3D& curve, int count);

/// Arc length of the full curve.
double curve_arclength(const PolyCurve3D& curve);

struct GraspPoint {
  Vec3 position = Vec3::Zero();
  Vec3 tangent = Vec3::Zero();  // unit, oriented from the tip inward
};

/// Point at the given arc length measured from the tip end of the curve.
GraspPoint grasp_point(const PolyCurve3D& curve, double arclength_from_tip);

}  // namespace cablesim
