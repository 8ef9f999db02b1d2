#include "mvtrack/renderer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mvtrack {
namespace {

constexpr double kNearPlane = 1.0;  // mm
constexpr double kFar = 1e20;       // "no site" value for the distance transform

struct ClipVertex {
  Vec3 cam;
  Vec3 model;
};

// Sutherland-Hodgman against z >= kNearPlane. At most 4 output vertices.
int clip_near(const std::array<ClipVertex, 3>& in, std::array<ClipVertex, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const bool a_in = a.cam.z() >= kNearPlane;
    const bool b_in = b.cam.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearPlane - a.cam.z()) / (b.cam.z() - a.cam.z());
      out[n++] = {a.cam + t * (b.cam - a.cam), a.model + t * (b.model - a.model)};
    }
  }
  return n;
}

class Rasterizer {
 public:
  Rasterizer(const CameraIntrinsics& k, RenderResult& out, bool want_surface)
      : k_(k), out_(out), want_surface_(want_surface) {}

  void triangle(const ClipVertex& v0, const ClipVertex& v1, const ClipVertex& v2) {
    const std::array<const ClipVertex*, 3> v = {&v0, &v1, &v2};
    std::array<Vec2, 3> p;
    for (int i = 0; i < 3; ++i) {
      const Vec3& c = v[i]->cam;
      p[i] = {k_.fx * c.x() / c.z() + k_.cx, k_.fy * c.y() / c.z() + k_.cy};
    }
    const double area = edge(p[0], p[1], p[2]);
    if (!(std::abs(area) > 1e-12)) return;

    const double umin = std::min({p[0].x(), p[1].x(), p[2].x()});
    const double umax = std::max({p[0].x(), p[1].x(), p[2].x()});
    const double vmin = std::min({p[0].y(), p[1].y(), p[2].y()});
    const double vmax = std::max({p[0].y(), p[1].y(), p[2].y()});
    const int w = out_.mask.width, h = out_.mask.height;
    if (umax < 0.0 || vmax < 0.0 || umin > w - 1 || vmin > h - 1) return;
    const int x0 = std::max(0, static_cast<int>(std::ceil(umin)));
    const int x1 = std::min(w - 1, static_cast<int>(std::floor(umax)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(vmin)));
    const int y1 = std::min(h - 1, static_cast<int>(std::floor(vmax)));
    const double inv_area = 1.0 / area;

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Vec2 q(x, y);
        const double l0 = edge(p[1], p[2], q) * inv_area;
        const double l1 = edge(p[2], p[0], q) * inv_area;
        const double l2 = edge(p[0], p[1], q) * inv_area;
        if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
        const std::size_t idx = static_cast<std::size_t>(y) * w + x;
        out_.mask.occupancy[idx] = 1;
        if (!want_surface_) continue;
        // Perspective-correct interpolation.
        const double q0 = l0 / v0.cam.z(), q1 = l1 / v1.cam.z(), q2 = l2 / v2.cam.z();
        const double s = q0 + q1 + q2;
        const double z = 1.0 / s;
        if (z < out_.depth[idx]) {
          out_.depth[idx] = static_cast<float>(z);
          out_.surface[idx] = ((q0 * v0.model + q1 * v1.model + q2 * v2.model) / s).cast<float>();
        }
        if (z > out_.far_depth[idx]) {
          out_.far_depth[idx] = static_cast<float>(z);
          out_.far_surface[idx] = ((q0 * v0.model + q1 * v1.model + q2 * v2.model) / s).cast<float>();
        }
      }
    }
  }

 private:
  static double edge(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
  }

  const CameraIntrinsics& k_;
  RenderResult& out_;
  bool want_surface_;
};

// 1D squared distance transform of sampled function f (Felzenszwalb-Huttenlocher).
void edt_1d(const double* f, int n, double* d, int* arg, std::vector<int>& v, std::vector<double>& z) {
  // Uniform lines (all sites or no site) are common away from the silhouette.
  const double f0 = f[0];
  if (f0 == 0.0 || f0 >= kFar) {
    int q = 1;
    while (q < n && f[q] == f0) ++q;
    if (q == n) {
      for (q = 0; q < n; ++q) {
        d[q] = f0;
        arg[q] = q;
      }
      return;
    }
  }
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  auto intersect = [&](int q, int vk) {
    return ((f[q] + static_cast<double>(q) * q) - (f[vk] + static_cast<double>(vk) * vk)) / (2.0 * (q - vk));
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
    arg[q] = v[k];
  }
}

}  // namespace

std::size_t SilhouetteMask::count() const {
  return static_cast<std::size_t>(std::count(occupancy.begin(), occupancy.end(), std::uint8_t{1}));
}

RenderResult rasterize(const TriangleMesh& mesh, const CameraView& view, const RigidTransform& object_pose,
                       bool want_surface) {
  const auto& k = view.intrinsics;
  RenderResult out;
  out.mask = SilhouetteMask(k.width, k.height);
  const std::size_t n = static_cast<std::size_t>(k.width) * k.height;
  if (want_surface) {
    out.depth.assign(n, std::numeric_limits<float>::infinity());
    out.surface.assign(n, Eigen::Vector3f::Zero());
    out.far_depth.assign(n, -std::numeric_limits<float>::infinity());
    out.far_surface.assign(n, Eigen::Vector3f::Zero());
  }
  const RigidTransform cam_from_model = compose(view.camera_from_object(), object_pose);
  std::vector<Vec3> cam(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) cam[i] = cam_from_model.apply(mesh.vertices[i]);

  Rasterizer raster(k, out, want_surface);
  std::array<ClipVertex, 4> clipped;
  for (const auto& f : mesh.faces) {
    const std::array<ClipVertex, 3> tri = {ClipVertex{cam[f[0]], mesh.vertices[f[0]]},
                                           ClipVertex{cam[f[1]], mesh.vertices[f[1]]},
                                           ClipVertex{cam[f[2]], mesh.vertices[f[2]]}};
    if (tri[0].cam.z() >= kNearPlane && tri[1].cam.z() >= kNearPlane && tri[2].cam.z() >= kNearPlane) {
      raster.triangle(tri[0], tri[1], tri[2]);
      continue;
    }
    const int m = clip_near(tri, clipped);
    for (int i = 1; i + 1 < m; ++i) raster.triangle(clipped[0], clipped[i], clipped[i + 1]);
  }
  return out;
}

SilhouetteMask rasterize_silhouette(const TriangleMesh& mesh, const CameraView& view,
                                    const RigidTransform& object_pose) {
  return rasterize(mesh, view, object_pose, false).mask;
}

std::vector<float> render_coverage(const TriangleMesh& mesh, const CameraView& view,
                                   const RigidTransform& object_pose, int supersample) {
  const int s = std::max(1, supersample);
  const auto& k = view.intrinsics;
  CameraView fine = view;
  fine.intrinsics = k.scaled_to_width(k.width * s);
  fine.intrinsics.height = k.height * s;
  const SilhouetteMask mask = rasterize_silhouette(mesh, fine, object_pose);

  std::vector<float> coverage(static_cast<std::size_t>(k.width) * k.height, 0.0f);
  const float inv = 1.0f / static_cast<float>(s * s);
  for (int fy = 0; fy < mask.height; ++fy) {
    const std::uint8_t* row = &mask.occupancy[static_cast<std::size_t>(fy) * mask.width];
    float* out = &coverage[static_cast<std::size_t>(fy / s) * k.width];
    for (int fx = 0; fx < mask.width; ++fx) {
      if (row[fx]) out[fx / s] += inv;
    }
  }
  return coverage;
}

std::vector<double> distance_transform_squared(const std::vector<std::uint8_t>& sites, int width, int height,
                                               std::vector<int>* nearest) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> col_d(n);
  std::vector<int> col_arg(n);
  const int len = std::max(width, height);
  std::vector<double> f(len), d(len), z(len + 1);
  std::vector<int> arg(len), v(len);

  // Columns are processed in blocks so that each image row is read and
  // written contiguously.
  constexpr int kBlock = 16;
  std::vector<double> fb(static_cast<std::size_t>(kBlock) * height), db(fb.size());
  std::vector<int> ab(fb.size());
  for (int x0 = 0; x0 < width; x0 += kBlock) {
    const int nb = std::min(kBlock, width - x0);
    for (int y = 0; y < height; ++y) {
      const std::uint8_t* row = &sites[static_cast<std::size_t>(y) * width + x0];
      for (int b = 0; b < nb; ++b) fb[static_cast<std::size_t>(b) * height + y] = row[b] ? 0.0 : kFar;
    }
    for (int b = 0; b < nb; ++b) {
      const std::size_t off = static_cast<std::size_t>(b) * height;
      edt_1d(&fb[off], height, &db[off], &ab[off], v, z);
    }
    for (int y = 0; y < height; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * width + x0;
      for (int b = 0; b < nb; ++b) {
        col_d[row + b] = db[static_cast<std::size_t>(b) * height + y];
        col_arg[row + b] = ab[static_cast<std::size_t>(b) * height + y];
      }
    }
  }

  std::vector<double> out(n);
  if (nearest) nearest->assign(n, -1);
  for (int y = 0; y < height; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    edt_1d(&col_d[row], width, &out[row], arg.data(), v, z);
    if (nearest) {
      for (int x = 0; x < width; ++x) {
        const int sx = arg[x];
        if (out[row + x] < kFar) (*nearest)[row + x] = col_arg[row + sx] * width + sx;
      }
    }
  }
  return out;
}

namespace {

LevelSetField signed_distance_full(const SilhouetteMask& mask) {
  const int w = mask.width, h = mask.height;
  const std::size_t n = static_cast<std::size_t>(w) * h;
  LevelSetField field;
  field.width = w;
  field.height = h;

  std::vector<std::uint8_t> contour(n, 0), background(n, 0);
  bool any_contour = false;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (!mask.occupancy[idx]) {
        background[idx] = 1;
        continue;
      }
      const bool edge = (x > 0 && !mask.at(x - 1, y)) || (x + 1 < w && !mask.at(x + 1, y)) ||
                        (y > 0 && !mask.at(x, y - 1)) || (y + 1 < h && !mask.at(x, y + 1));
      if (edge) {
        contour[idx] = 1;
        any_contour = true;
      }
    }
  }

  if (!any_contour) {
    // All-foreground or all-background.
    field.phi.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) field.phi[i] = mask.occupancy[i] ? field.sentinel() : -field.sentinel();
    field.nearest_contour.assign(n, -1);
    return field;
  }

  // Outside, the nearest foreground pixel is always a contour pixel, so one
  // transform to the contour serves both the outside distance and the
  // contour association.
  const std::vector<double> d_contour = distance_transform_squared(contour, w, h, &field.nearest_contour);
  const std::vector<double> d_background = distance_transform_squared(background, w, h);
  field.phi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    field.phi[i] = mask.occupancy[i] ? std::sqrt(d_background[i]) - 0.5 : -(std::sqrt(d_contour[i]) - 0.5);
  }
  return field;
}

}  // namespace

LevelSetField signed_distance(const SilhouetteMask& mask, double max_distance) {
  const int w = mask.width, h = mask.height;
  int x_min = w, x_max = -1, y_min = h, y_max = -1;
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = &mask.occupancy[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      if (!row[x]) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max < 0 || !(max_distance < static_cast<double>(w + h))) return signed_distance_full(mask);

  // Every pixel within max_distance of the contour lies in the foreground
  // bounding box grown by the margin, and so do the nearest sites of those pixels.
  const int margin = static_cast<int>(std::ceil(max_distance)) + 1;
  const int x0 = std::max(0, x_min - margin), x1 = std::min(w - 1, x_max + margin);
  const int y0 = std::max(0, y_min - margin), y1 = std::min(h - 1, y_max + margin);
  if (x0 == 0 && y0 == 0 && x1 == w - 1 && y1 == h - 1) {
    LevelSetField field = signed_distance_full(mask);
    for (auto& p : field.phi) p = std::clamp(p, -max_distance, max_distance);
    return field;
  }
  const int cw = x1 - x0 + 1, ch = y1 - y0 + 1;
  SilhouetteMask crop(cw, ch);
  for (int y = 0; y < ch; ++y)
    std::copy_n(&mask.occupancy[static_cast<std::size_t>(y + y0) * w + x0], cw,
                &crop.occupancy[static_cast<std::size_t>(y) * cw]);
  const LevelSetField sub = signed_distance_full(crop);

  LevelSetField field;
  field.width = w;
  field.height = h;
  field.phi.assign(static_cast<std::size_t>(w) * h, -max_distance);
  field.nearest_contour.assign(field.phi.size(), -1);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const std::size_t si = static_cast<std::size_t>(y) * cw + x;
      const std::size_t di = static_cast<std::size_t>(y + y0) * w + (x + x0);
      field.phi[di] = std::clamp(sub.phi[si], -max_distance, max_distance);
      const int c = sub.nearest_contour[si];
      if (c >= 0) field.nearest_contour[di] = (c / cw + y0) * w + (c % cw + x0);
    }
  }
  return field;
}

SampleSet contour_band(const LevelSetField& levelset, double band_halfwidth, const RenderResult* render, int stride) {
  SampleSet samples;
  const int w = levelset.width, h = levelset.height;
  if (w < 3 || h < 3 || band_halfwidth < 0.0) return samples;
  const bool attach = render != nullptr && render->has_surface();
  stride = std::max(1, stride);
  for (int y = 1; y < h - 1; y += stride) {
    for (int x = 1; x < w - 1; x += stride) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const int c = levelset.nearest_contour[idx];
      if (c < 0) continue;
      const double dist = std::hypot(x - c % w, y - c / w);
      if (dist > band_halfwidth) continue;
      BandSample s;
      s.x = x;
      s.y = y;
      s.phi = levelset.phi[idx];
      if (attach) {
        s.model_point = render->rim_point(static_cast<std::size_t>(c));
      }
      samples.push_back(s);
    }
  }
  return samples;
}

}  // namespace mvtrack
