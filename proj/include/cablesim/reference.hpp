#pragma once

#include <functional>

#include "cablesim/types.hpp"

namespace cablesim {
namespace reference {

/// Closed-form planar two-link pendulum used to cross-check the recursive
/// dynamics. Angles follow the chain convention (positive pitch sags);
/// com offsets are measured from each link's proximal joint; inertias are
/// transverse values about the COM.
struct TwoLinkParams {
  double m1 = 0.0, m2 = 0.0;
  double L1 = 0.0;          // first moving link length
  double c1 = 0.0, c2 = 0.0;
  double I1 = 0.0, I2 = 0.0;
  double g = 9.8;           // magnitude, acting along -z
};

/// Joint torques of the two-link pendulum from the Euler-Lagrange
/// equations: M(q) qdd + c(q, qd) + G(q).
Eigen::Vector2d two_link_torque(const TwoLinkParams& params,
                                const Eigen::Vector2d& q,
                                const Eigen::Vector2d& qd,
                                const Eigen::Vector2d& qdd);

Eigen::Matrix2d two_link_mass(const TwoLinkParams& params, const Eigen::Vector2d& q);

/// Holding torque of a single uniform link pivoted at one end: the gradient
/// of its gravity potential, -m g c cos(q) under the sag-positive sign.
double single_link_holding_torque(double mass, double com_offset, double g, double q);

/// Least-squares quadratic through (u, v) pairs via the normal equations,
/// independent of the QR path. Returns (c2, c1, c0).
Vec3 quadratic_normal_equations(const std::vector<Eigen::Vector2d>& points);

/// Trapezoid-refinement quadrature (Romberg), independent of the adaptive
/// Simpson rule used by the curve module.
double romberg(const std::function<double(double)>& f, double a, double b,
               double tol = 1e-12);

/// Bisection root of f on [lo, hi]; f(lo) and f(hi) must bracket.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              double tol = 1e-12);

}  // namespace reference
}  // namespace cablesim
