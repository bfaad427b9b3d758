#include "cablesim/curvefit.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cablesim {

QuadraticFit fit_quadratic_projection(const std::vector<Eigen::Vector2d>& points) {
  const int count = static_cast<int>(points.size());
  if (count < 3)
    throw std::invalid_argument("fit_quadratic_projection: need at least 3 points, got " +
                                std::to_string(count));
  MatX design(count, 3);
  VecX values(count);
  for (int i = 0; i < count; ++i) {
    const double u = points[i].x();
    design(i, 0) = u * u;
    design(i, 1) = u;
    design(i, 2) = 1.0;
    values[i] = points[i].y();
  }
  Eigen::ColPivHouseholderQR<MatX> qr(design);
  if (qr.rank() < 3)
    throw std::invalid_argument(
        "fit_quadratic_projection: rank-deficient fit, need 3 distinct u values");
  QuadraticFit fit;
  fit.coeffs = qr.solve(values);
  fit.rms = std::sqrt((design * fit.coeffs - values).squaredNorm() / count);
  return fit;
}

std::array<int, 2> PolyCurve3D::transverse_axes() const {
  switch (axis) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

namespace {

double eval_quadratic(const Vec3& c, double u) { return (c[0] * u + c[1]) * u + c[2]; }

double eval_quadratic_derivative(const Vec3& c, double u) { return 2.0 * c[0] * u + c[1]; }

// Adaptive Simpson quadrature of the arc-length integrand.
double simpson(const PolyCurve3D& curve, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  auto f = [&](double u) { return curve.derivative_at(u).norm(); };
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(curve, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(curve, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double arclength_between(const PolyCurve3D& curve, double a, double b) {
  if (b <= a) return 0.0;
  auto f = [&](double u) { return curve.derivative_at(u).norm(); };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(curve, a, b, fa, fm, fb, whole, 1e-12, 40);
}

}  // namespace

Vec3 PolyCurve3D::point_at(double u) const {
  const std::array<int, 2> tv = transverse_axes();
  Vec3 p;
  p[axis] = u;
  p[tv[0]] = eval_quadratic(coeffs_a, u);
  p[tv[1]] = eval_quadratic(coeffs_b, u);
  return p;
}

Vec3 PolyCurve3D::derivative_at(double u) const {
  const std::array<int, 2> tv = transverse_axes();
  Vec3 d;
  d[axis] = 1.0;
  d[tv[0]] = eval_quadratic_derivative(coeffs_a, u);
  d[tv[1]] = eval_quadratic_derivative(coeffs_b, u);
  return d;
}

PolyCurve3D fit_curve3d(const std::vector<Vec3>& cloud) {
  if (cloud.size() < 3)
    throw std::invalid_argument("fit_curve3d: need at least 3 points, got " +
                                std::to_string(cloud.size()));
  Vec3 lo = cloud.front(), hi = cloud.front();
  for (const Vec3& p : cloud) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = hi - lo;
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (extent[k] > extent[axis]) axis = k;
  if (extent[axis] <= 0.01)
    throw std::invalid_argument("fit_curve3d: degenerate cloud, largest extent " +
                                std::to_string(extent[axis]) + " m");

  PolyCurve3D curve;
  curve.axis = axis;
  curve.param_min = lo[axis];
  curve.param_max = hi[axis];
  const std::array<int, 2> tv = curve.transverse_axes();

  std::vector<Eigen::Vector2d> proj_a(cloud.size()), proj_b(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) {
    proj_a[i] = {cloud[i][axis], cloud[i][tv[0]]};
    proj_b[i] = {cloud[i][axis], cloud[i][tv[1]]};
  }
  const QuadraticFit fit_a = fit_quadratic_projection(proj_a);
  const QuadraticFit fit_b = fit_quadratic_projection(proj_b);
  curve.coeffs_a = fit_a.coeffs;
  curve.coeffs_b = fit_b.coeffs;
  curve.rms_residual = std::sqrt(fit_a.rms * fit_a.rms + fit_b.rms * fit_b.rms);
  return curve;
}

std::vector<Vec3> sample_curve(const PolyCurve3D& curve, int count) {
  if (count < 2)
    throw std::invalid_argument("sample_curve: need at least 2 points, got " +
                                std::to_string(count));
  std::vector<Vec3> points(count);
  const double span = curve.param_max - curve.param_min;
  for (int i = 0; i < count; ++i) {
    const double u = curve.param_min + span * i / (count - 1);
    points[i] = curve.point_at(u);
  }
  return points;
}

double curve_arclength(const PolyCurve3D& curve) {
  return arclength_between(curve, curve.param_min, curve.param_max);
}

GraspPoint grasp_point(const PolyCurve3D& curve, double arclength_from_tip) {
  const double total = curve_arclength(curve);
  if (arclength_from_tip < 0.0 || arclength_from_tip > total + 1e-12)
    throw std::invalid_argument("grasp_point: arc length " +
                                std::to_string(arclength_from_tip) +
                                " outside [0, " + std::to_string(total) + "]");

  // Cumulative arc length from the tip end is monotone in u; bisect.
  auto from_tip = [&](double u) {
    return curve.tip_at_max ? arclength_between(curve, u, curve.param_max)
                            : arclength_between(curve, curve.param_min, u);
  };
  double lo = curve.param_min, hi = curve.param_max;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double s = from_tip(mid);
    const bool go_up = curve.tip_at_max ? s > arclength_from_tip : s < arclength_from_tip;
    (go_up ? lo : hi) = mid;
    if (hi - lo < 1e-14 * std::max(1.0, std::abs(hi))) break;
  }
  const double u = 0.5 * (lo + hi);

  GraspPoint grasp;
  grasp.position = curve.point_at(u);
  Vec3 dir = curve.derivative_at(u);
  if (curve.tip_at_max) dir = -dir;
  grasp.tangent = dir.normalized();
  return grasp;
}

}  // namespace cablesim
