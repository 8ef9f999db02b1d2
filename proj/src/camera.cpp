#include "mvtrack/camera.hpp"

#include <cmath>
#include <string>

#include "mvtrack/errors.hpp"

namespace mvtrack {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("intrinsics: fx and fy must be positive");
  if (width < 1 || height < 1) throw InvalidArgument("intrinsics: width and height must be >= 1");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw InvalidArgument("intrinsics: non-finite principal point");
}

CameraIntrinsics CameraIntrinsics::scaled_to_width(int new_width) const {
  const double s = static_cast<double>(new_width) / width;
  CameraIntrinsics k;
  k.width = new_width;
  k.height = static_cast<int>(std::lround(height * s));
  k.fx = fx * s;
  k.fy = fy * s;
  // Keep the principal point at the same relative position in pixel-center coordinates.
  k.cx = (cx + 0.5) * s - 0.5;
  k.cy = (cy + 0.5) * s - 0.5;
  return k;
}

Vec2 project_camera(const CameraIntrinsics& k, const Vec3& x_c) {
  const double c = x_c.z();
  if (!(c > 0.0)) throw BehindCamera();
  return {(k.fx * x_c.x() + k.cx * c) / c, (k.fy * x_c.y() + k.cy * c) / c};
}

Vec2 project(const CameraView& view, const ObjectPoint& x_o) {
  return project_camera(view.intrinsics, view.camera_from_object().apply(x_o.xyz));
}

Mat23 projection_point_jacobian(const CameraView& view, const ObjectPoint& x_o) {
  const RigidTransform cam_from_obj = view.camera_from_object();
  const Mat3& t = cam_from_obj.rotation();  // t_ij, i,j in 1..3
  const Vec3 abc = cam_from_obj.apply(x_o.xyz);
  const double a = abc.x(), b = abc.y(), c = abc.z();
  if (!(c > 0.0)) throw BehindCamera();

  const auto& k = view.intrinsics;
  const double num_x = k.fx * a + k.cx * c;
  const double num_y = k.fy * b + k.cy * c;
  const double c2 = c * c;
  Mat23 j;
  for (int col = 0; col < 3; ++col) {
    // dA/dX = t_1j, dB/dX = t_2j, dC/dX = t_3j
    const double da = t(0, col), db = t(1, col), dc = t(2, col);
    j(0, col) = ((k.fx * da + k.cx * dc) * c - num_x * dc) / c2;
    j(1, col) = ((k.fy * db + k.cy * dc) * c - num_y * dc) / c2;
  }
  return j;
}

Mat26 full_pose_jacobian(const CameraView& view, const Vec3& x, const RigidTransform& current) {
  const ObjectPoint x_o(current.apply(x));
  return projection_point_jacobian(view, x_o) * point_jacobian(current, x);
}

double pixel_to_spatial_error(double pixel_error, double focal, double depth) {
  if (!(focal > 0.0)) throw InvalidArgument("pixel_to_spatial_error: focal length must be positive");
  if (!(depth > 0.0)) throw InvalidArgument("pixel_to_spatial_error: depth must be positive");
  return pixel_error * depth / focal;
}

}  // namespace mvtrack
