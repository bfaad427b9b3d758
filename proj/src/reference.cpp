#include "cablesim/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace cablesim {
namespace reference {

Eigen::Matrix2d two_link_mass(const TwoLinkParams& p, const Eigen::Vector2d& q) {
  const double cos2 = std::cos(q[1]);
  Eigen::Matrix2d mass;
  mass(0, 0) = p.I1 + p.m1 * p.c1 * p.c1 + p.I2 +
               p.m2 * (p.L1 * p.L1 + p.c2 * p.c2 + 2.0 * p.L1 * p.c2 * cos2);
  mass(0, 1) = p.I2 + p.m2 * (p.c2 * p.c2 + p.L1 * p.c2 * cos2);
  mass(1, 0) = mass(0, 1);
  mass(1, 1) = p.I2 + p.m2 * p.c2 * p.c2;
  return mass;
}

Eigen::Vector2d two_link_torque(const TwoLinkParams& p, const Eigen::Vector2d& q,
                                const Eigen::Vector2d& qd, const Eigen::Vector2d& qdd) {
  const double h = p.m2 * p.L1 * p.c2 * std::sin(q[1]);
  Eigen::Vector2d coriolis;
  coriolis[0] = -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]);
  coriolis[1] = h * qd[0] * qd[0];

  // V(q) = -g (m1 c1 sin q1 + m2 (L1 sin q1 + c2 sin(q1+q2)))
  Eigen::Vector2d gravity;
  gravity[0] = -p.g * ((p.m1 * p.c1 + p.m2 * p.L1) * std::cos(q[0]) +
                       p.m2 * p.c2 * std::cos(q[0] + q[1]));
  gravity[1] = -p.g * p.m2 * p.c2 * std::cos(q[0] + q[1]);

  return two_link_mass(p, q) * qdd + coriolis + gravity;
}

double single_link_holding_torque(double mass, double com_offset, double g, double q) {
  return -mass * g * com_offset * std::cos(q);
}

Vec3 quadratic_normal_equations(const std::vector<Eigen::Vector2d>& points) {
  Mat3 normal = Mat3::Zero();
  Vec3 rhs = Vec3::Zero();
  for (const Eigen::Vector2d& point : points) {
    const double u = point.x();
    const Vec3 row(u * u, u, 1.0);
    normal += row * row.transpose();
    rhs += row * point.y();
  }
  return normal.ldlt().solve(rhs);
}

double romberg(const std::function<double(double)>& f, double a, double b, double tol) {
  constexpr int kMaxLevels = 24;
  double table[kMaxLevels][kMaxLevels];
  double h = b - a;
  table[0][0] = 0.5 * h * (f(a) + f(b));
  for (int level = 1; level < kMaxLevels; ++level) {
    h *= 0.5;
    double sum = 0.0;
    const long points = 1L << (level - 1);
    for (long k = 0; k < points; ++k) sum += f(a + (2 * k + 1) * h);
    table[level][0] = 0.5 * table[level - 1][0] + h * sum;
    double factor = 1.0;
    for (int j = 1; j <= level; ++j) {
      factor *= 4.0;
      table[level][j] = table[level][j - 1] +
                        (table[level][j - 1] - table[level - 1][j - 1]) / (factor - 1.0);
    }
    if (level > 2 &&
        std::abs(table[level][level] - table[level - 1][level - 1]) < tol)
      return table[level][level];
  }
  return table[kMaxLevels - 1][kMaxLevels - 1];
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw std::invalid_argument("bisect: endpoints do not bracket a root");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace reference
}  // namespace cablesim
