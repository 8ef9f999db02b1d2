#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mvtrack/camera.hpp"
#include "mvtrack/geometry.hpp"

namespace mvtrack::testing {

inline Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return Vec3(u(rng), u(rng), u(rng));
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_transform(std::mt19937_64& rng, double t_scale = 100.0) {
  return RigidTransform(random_rotation(rng), random_vec(rng, t_scale));
}

inline Twist random_twist(std::mt19937_64& rng, double rho = 10.0, double phi = 0.3) {
  return Twist(random_vec(rng, rho), random_vec(rng, phi));
}

// Camera looking at the origin of O_o from `distance` along a random direction.
inline CameraView random_view(std::mt19937_64& rng, double distance = 600.0) {
  const Mat3 r = random_rotation(rng);
  CameraView v;
  // camera_from_object = (R, (0,0,distance)) so the O_o origin sits on the optical axis.
  v.object_from_camera = invert(RigidTransform(r, Vec3(0.0, 0.0, distance)));
  return v;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const char* root = std::getenv("MVTRACK_TEST_TMP");
  std::filesystem::path p = std::filesystem::path(root ? root : std::filesystem::temp_directory_path().string()) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace mvtrack::testing
