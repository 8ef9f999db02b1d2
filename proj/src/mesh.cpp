#include "mvtrack/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <utility>

#include "mvtrack/errors.hpp"

namespace mvtrack {

void TriangleMesh::validate() const {
  if (vertices.size() < 4) throw InvalidArgument("mesh: need at least 4 vertices");
  if (faces.size() < 4) throw InvalidArgument("mesh: need at least 4 faces");
  const int n = static_cast<int>(vertices.size());
  for (const auto& f : faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) throw InvalidArgument("mesh: face index out of range");
    }
  }
}

Vec3 TriangleMesh::bbox_min() const {
  if (vertices.empty()) throw EmptyMesh();
  Vec3 lo = vertices.front();
  for (const auto& v : vertices) lo = lo.cwiseMin(v);
  return lo;
}

Vec3 TriangleMesh::bbox_max() const {
  if (vertices.empty()) throw EmptyMesh();
  Vec3 hi = vertices.front();
  for (const auto& v : vertices) hi = hi.cwiseMax(v);
  return hi;
}

Vec3 TriangleMesh::center() const { return 0.5 * (bbox_min() + bbox_max()); }

double TriangleMesh::bbox_longest_side() const { return (bbox_max() - bbox_min()).maxCoeff(); }

TriangleMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path.string() + "'");
  TriangleMesh mesh;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x() >> v.y() >> v.z())) fail("malformed vertex record");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        int i = 0;
        try {
          i = std::stoi(tok.substr(0, tok.find('/')));
        } catch (const std::exception&) {
          fail("malformed face index '" + tok + "'");
        }
        // OBJ indices are 1-based; negative values count from the end.
        i = i > 0 ? i - 1 : static_cast<int>(mesh.vertices.size()) + i;
        idx.push_back(i);
      }
      if (idx.size() < 3) fail("face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < idx.size(); ++k) mesh.faces.push_back({idx[0], idx[k], idx[k + 1]});
    }
  }
  if (mesh.vertices.empty()) throw IoError(path.string() + ": no vertices");
  try {
    mesh.validate();
  } catch (const InvalidArgument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path.string() + "'");
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

namespace meshes {
namespace {

void append_box(TriangleMesh& mesh, const Vec3& lo, const Vec3& hi) {
  const int base = static_cast<int>(mesh.vertices.size());
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  static constexpr int kFaces[12][3] = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                                        {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  for (const auto& f : kFaces) mesh.faces.push_back({base + f[0], base + f[1], base + f[2]});
}

// Tube of `sides` segments swept along a closed polyline.
TriangleMesh sweep_tube(const std::vector<Vec3>& curve, double radius, int sides) {
  TriangleMesh mesh;
  const int n = static_cast<int>(curve.size());
  for (int i = 0; i < n; ++i) {
    const Vec3 tangent = (curve[(i + 1) % n] - curve[(i + n - 1) % n]).normalized();
    Vec3 ref = std::abs(tangent.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 u = tangent.cross(ref).normalized();
    const Vec3 v = tangent.cross(u);
    for (int s = 0; s < sides; ++s) {
      const double a = 2.0 * kPi * s / sides;
      mesh.vertices.push_back(curve[i] + radius * (std::cos(a) * u + std::sin(a) * v));
    }
  }
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    for (int s = 0; s < sides; ++s) {
      const int t = (s + 1) % sides;
      const int a = i * sides + s, b = i * sides + t, c = j * sides + s, d = j * sides + t;
      mesh.faces.push_back({a, c, b});
      mesh.faces.push_back({b, c, d});
    }
  }
  return mesh;
}

}  // namespace

TriangleMesh cube(double side) {
  TriangleMesh mesh;
  append_box(mesh, Vec3::Constant(-0.5 * side), Vec3::Constant(0.5 * side));
  return mesh;
}

TriangleMesh icosphere(double radius, int subdivisions) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  mesh.faces = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (auto& v : mesh.vertices) v.normalize();
  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      const int idx = static_cast<int>(mesh.vertices.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(next);
  }
  for (auto& v : mesh.vertices) v *= radius;
  return mesh;
}

TriangleMesh sphere_with_bumps() {
  TriangleMesh mesh = icosphere(1.0, 3);
  for (auto& v : mesh.vertices) {
    const double bump = 0.18 * std::sin(3.0 * v.x()) * std::cos(2.0 * v.y()) + 0.12 * std::sin(4.0 * v.z() + 1.0) +
                        0.1 * v.x() * v.y();
    // Stretch along x so the shape has no rotational symmetry.
    v = Vec3(1.25 * v.x(), v.y(), 0.85 * v.z()) * (55.0 * (1.0 + bump));
  }
  return mesh;
}

TriangleMesh box_with_notch() {
  // 160 x 100 x 70 block with a 50 x 40 notch cut from one top edge.
  TriangleMesh mesh;
  append_box(mesh, {-80, -50, -35}, {80, 10, 35});
  append_box(mesh, {-80, 10, -35}, {30, 50, 35});
  append_box(mesh, {30, 10, -35}, {80, 50, -5});
  return mesh;
}

TriangleMesh l_bracket() {
  // Longest side 100 mm.
  TriangleMesh mesh;
  append_box(mesh, {-50, -30, -25}, {50, -12, 25});
  append_box(mesh, {-50, -12, -25}, {-32, 45, 25});
  append_box(mesh, {-32, -12, -5}, {-12, 8, 5});  // gusset
  return mesh;
}

TriangleMesh torus_knot() {
  // (2,3) torus knot, longest side about 225 mm.
  std::vector<Vec3> curve;
  const int n = 160;
  for (int i = 0; i < n; ++i) {
    const double s = 2.0 * kPi * i / n;
    const double r = 2.0 + std::cos(3.0 * s);
    curve.emplace_back(r * std::cos(2.0 * s) * 31.0, r * std::sin(2.0 * s) * 31.0, -std::sin(3.0 * s) * 31.0);
  }
  return sweep_tube(curve, 16.0, 12);
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"sphere_bumps", "box_notch", "l_bracket", "torus_knot"};
  return names;
}

TriangleMesh by_name(const std::string& name) {
  if (name == "sphere_bumps") return sphere_with_bumps();
  if (name == "box_notch") return box_with_notch();
  if (name == "l_bracket") return l_bracket();
  if (name == "torus_knot") return torus_knot();
  if (name == "cube") return cube(100.0);
  if (name == "icosphere") return icosphere(50.0, 3);
  throw InvalidArgument("unknown builtin mesh '" + name + "'");
}

}  // namespace meshes

TriangleMesh load_mesh(const std::string& ref) {
  static const std::string kPrefix = "builtin:";
  if (ref.rfind(kPrefix, 0) == 0) return meshes::by_name(ref.substr(kPrefix.size()));
  return load_obj(ref);
}

}  // namespace mvtrack
