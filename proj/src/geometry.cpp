#include "mvtrack/geometry.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace mvtrack {

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

bool RigidTransform::is_valid(double tol) const {
  if (!rotation_.allFinite() || !translation_.allFinite()) return false;
  const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation_.determinant() - 1.0) <= tol;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Mat4 hat(const Twist& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = skew(xi.phi);
  m.topRightCorner<3, 1>() = xi.rho;
  return m;
}

RigidTransform exp_se3(const Twist& xi) {
  constexpr double kSmallAngle = 1e-2;
  const double theta2 = xi.phi.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 k = skew(xi.phi);
  const Mat3 k2 = k * k;

  double a, b, c;  // sin(t)/t, (1-cos t)/t^2, (t - sin t)/t^3
  if (theta < kSmallAngle) {
    const double theta4 = theta2 * theta2;
    a = 1.0 - theta2 / 6.0 + theta4 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta4 / 720.0;
    c = 1.0 / 6.0 - theta2 / 120.0 + theta4 / 5040.0;
  } else {
    const double s = std::sin(theta);
    const double co = std::cos(theta);
    a = s / theta;
    b = (1.0 - co) / theta2;
    c = (theta - s) / (theta2 * theta);
  }
  const Mat3 r = Mat3::Identity() + a * k + b * k2;
  const Mat3 v = Mat3::Identity() + b * k + c * k2;
  return {r, v * xi.rho};
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

Mat36 point_jacobian(const RigidTransform& t, const Vec3& x) {
  Mat36 j;
  j.leftCols<3>() = Mat3::Identity();
  j.rightCols<3>() = -skew(t.apply(x));
  return j;
}

Mat3 axis_angle(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace mvtrack
