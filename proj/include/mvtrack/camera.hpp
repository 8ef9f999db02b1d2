#pragma once

#include <vector>

#include "mvtrack/geometry.hpp"

namespace mvtrack {

/// Pinhole intrinsics. Pixel origin is the top-left pixel center, +x right,
/// +y down; pixel centers sit at integer coordinates. No distortion.
struct CameraIntrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 319.5;
  double cy = 239.5;
  int width = 640;
  int height = 480;

  void validate() const;
  /// Same field of view at a new width, height following the aspect ratio.
  CameraIntrinsics scaled_to_width(int new_width) const;
};

/// One calibrated camera of a rig. `object_from_camera` maps camera
/// coordinates into the shared object-centered frame.
struct CameraView {
  CameraIntrinsics intrinsics;
  RigidTransform object_from_camera;
  int index = 0;

  RigidTransform camera_from_object() const { return invert(object_from_camera); }
};

using Rig = std::vector<CameraView>;

/// Projects a camera-frame point. Throws BehindCamera when z <= 0.
Vec2 project_camera(const CameraIntrinsics& k, const Vec3& x_c);

/// Projects a point of the object-centered frame through the view.
Vec2 project(const CameraView& view, const ObjectPoint& x_o);

/// d(pixel)/d(X_o), from the quotient rule on (fx A + cx C) / C and
/// (fy B + cy C) / C with (A, B, C) = camera_from_object * X_o.
Mat23 projection_point_jacobian(const CameraView& view, const ObjectPoint& x_o);

/// d(pixel)/d(dxi) for the point current * x under the left increment
/// exp(dxi^) applied in the object-centered frame.
Mat26 full_pose_jacobian(const CameraView& view, const Vec3& x, const RigidTransform& current);

/// Spatial error (mm) that a reprojection error of `pixel_error` px corresponds
/// to at depth `depth` (mm) with focal length `focal` (px).
double pixel_to_spatial_error(double pixel_error, double focal, double depth);

}  // namespace mvtrack
