#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "mvtrack/camera.hpp"
#include "mvtrack/geometry.hpp"
#include "mvtrack/mesh.hpp"

namespace mvtrack {

/// Binary silhouette, row-major, 1 = object.
struct SilhouetteMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> occupancy;

  SilhouetteMask() = default;
  SilhouetteMask(int w, int h) : width(w), height(h), occupancy(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return occupancy[static_cast<std::size_t>(y) * width + x] != 0; }
  std::size_t count() const;
};

/// Rasterization output: silhouette plus, optionally, per-pixel nearest depth
/// (mm) and the template-frame surface point seen at that pixel.
struct RenderResult {
  SilhouetteMask mask;
  std::vector<float> depth;
  std::vector<Eigen::Vector3f> surface;
  std::vector<float> far_depth;
  std::vector<Eigen::Vector3f> far_surface;

  bool has_surface() const { return !surface.empty(); }
  /// Midpoint of the nearest and farthest surface hits along the pixel ray.
  /// Near the silhouette of a smooth closed surface this approaches the rim.
  Vec3 rim_point(std::size_t idx) const { return 0.5 * (surface[idx] + far_surface[idx]).cast<double>(); }
};

/// Signed distance field of a silhouette in pixels: positive inside,
/// negative outside. `nearest_contour` holds, per pixel, the flat index of the
/// closest contour pixel (-1 when the mask has no contour).
struct LevelSetField {
  int width = 0;
  int height = 0;
  std::vector<double> phi;
  std::vector<int> nearest_contour;

  double at(int x, int y) const { return phi[static_cast<std::size_t>(y) * width + x]; }
  /// Value used when the mask is all-foreground or all-background.
  double sentinel() const { return static_cast<double>(width + height); }
};

/// One pixel of the contour band. `model_point` is the template-frame surface
/// point behind the nearest contour pixel.
struct BandSample {
  int x = 0;
  int y = 0;
  double phi = 0.0;
  Vec3 model_point = Vec3::Zero();
};

using SampleSet = std::vector<BandSample>;

/// Rasterizes `mesh` posed by `object_pose` (template -> object-centered frame)
/// into `view`. Pixel (x, y) is foreground iff its center lies inside a
/// projected triangle in front of the near plane. Both windings are drawn.
RenderResult rasterize(const TriangleMesh& mesh, const CameraView& view, const RigidTransform& object_pose,
                       bool want_surface = true);

SilhouetteMask rasterize_silhouette(const TriangleMesh& mesh, const CameraView& view,
                                    const RigidTransform& object_pose);

/// Per-pixel fraction of `supersample` x `supersample` sub-pixel samples
/// covered by the mesh. Used to synthesize anti-aliased images.
std::vector<float> render_coverage(const TriangleMesh& mesh, const CameraView& view,
                                   const RigidTransform& object_pose, int supersample);

/// Exact Euclidean signed distance, positive inside. A contour pixel is a
/// foreground pixel with at least one background 4-neighbour. The zero level
/// sits on the pixel boundary: foreground pixels hold (distance to the
/// nearest background pixel) - 1/2, background pixels -(distance to the
/// nearest contour pixel - 1/2), so flipping the mask negates phi.
///
/// With a finite `max_distance`, phi is clamped to [-max_distance,
/// max_distance] and only computed near the silhouette; values with
/// |phi| < max_distance and their nearest contour pixels stay exact.
/// Clamped pixels may have no nearest contour pixel (-1).
LevelSetField signed_distance(const SilhouetteMask& mask,
                              double max_distance = std::numeric_limits<double>::infinity());

/// Pixels within `band_halfwidth` (Euclidean) of their nearest contour
/// pixel, subsampled on a `stride` grid. When
/// `render` carries a surface buffer, each sample gets the model point of its
/// nearest contour pixel. Image-border pixels are excluded.
SampleSet contour_band(const LevelSetField& levelset, double band_halfwidth, const RenderResult* render = nullptr,
                       int stride = 1);

/// Squared Euclidean distance transform to the pixels where `sites` is
/// non-zero (Felzenszwalb-Huttenlocher). Optional arg-min as flat indices.
std::vector<double> distance_transform_squared(const std::vector<std::uint8_t>& sites, int width, int height,
                                               std::vector<int>* nearest = nullptr);

}  // namespace mvtrack
