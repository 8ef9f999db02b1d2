#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mvtrack {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat23 = Eigen::Matrix<double, 2, 3>;
using Mat26 = Eigen::Matrix<double, 2, 6>;
using Mat36 = Eigen::Matrix<double, 3, 6>;
using Row2 = Eigen::RowVector2d;
using Row6 = Eigen::Matrix<double, 1, 6>;

/// Coordinate frame a point is expressed in.
enum class Frame { Template, Object, Camera };

/// A 3D point (mm) whose frame is part of its type.
template <Frame F>
struct Point3 {
  Vec3 xyz = Vec3::Zero();

  Point3() = default;
  explicit Point3(const Vec3& v) : xyz(v) {}
  Point3(double x, double y, double z) : xyz(x, y, z) {}

  static constexpr Frame frame = F;
};

using TemplatePoint = Point3<Frame::Template>;
using ObjectPoint = Point3<Frame::Object>;
using CameraPoint = Point3<Frame::Camera>;

/// Element of se(3). Flattened layout is (rho, phi): translation first, then
/// rotation, matching the [I | -X^] point Jacobian.
struct Twist {
  Vec3 rho = Vec3::Zero();  // mm
  Vec3 phi = Vec3::Zero();  // rad

  Twist() = default;
  Twist(const Vec3& rho_, const Vec3& phi_) : rho(rho_), phi(phi_) {}

  static Twist from_vector(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
  Vec6 vector() const {
    Vec6 v;
    v << rho, phi;
    return v;
  }
  bool finite() const { return rho.allFinite() && phi.allFinite(); }
};

/// Rigid transform x -> R x + t, translations in mm.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static RigidTransform identity() { return {}; }
  static RigidTransform from_matrix(const Mat4& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }
  static RigidTransform translation_only(const Vec3& t) { return {Mat3::Identity(), t}; }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat4 matrix() const;
  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }

  template <Frame To, Frame From>
  Point3<To> apply(const Point3<From>& p) const {
    return Point3<To>(apply(p.xyz));
  }

  /// Orthonormality and determinant check at the given tolerance.
  bool is_valid(double tol = 1e-9) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

Mat3 skew(const Vec3& v);

/// 4x4 matrix [phi^ rho; 0 0].
Mat4 hat(const Twist& xi);

/// SE(3) exponential. Below 1e-8 rad the rotation and V matrices use their
/// second-order series.
RigidTransform exp_se3(const Twist& xi);

/// (a * b)(x) = a(b(x)).
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, b);
}

/// d(exp(dxi^) (R x + t)) / d(dxi) at dxi = 0, i.e. [I | -(R x + t)^].
Mat36 point_jacobian(const RigidTransform& t, const Vec3& x);

/// Rotation about a unit axis (Rodrigues).
Mat3 axis_angle(const Vec3& axis, double angle_rad);

/// Nearest rotation in the Frobenius sense (polar decomposition via SVD).
Mat3 nearest_rotation(const Mat3& m);

constexpr double kPi = 3.14159265358979323846;
inline constexpr double deg2rad(double d) { return d * kPi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace mvtrack
