#include "mvtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "mvtrack/errors.hpp"

namespace mvtrack {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string where(const fs::path& path, int line) { return path.string() + ":" + std::to_string(line) + ": "; }

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string() + ": cannot create directory: " + ec.message());
  }
}

// Reads the next whitespace-delimited header token of a PNM file, skipping comments.
std::string pnm_token(std::istream& in, const fs::path& path) {
  std::string tok;
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> tok;
  if (tok.empty()) throw IoError(path.string() + ": truncated PPM header");
  return tok;
}

int pnm_int(std::istream& in, const fs::path& path, const char* field) {
  const std::string tok = pnm_token(in, path);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": bad PPM " + field + " '" + tok + "'");
  }
}

double json_number(const json& j, const char* field, const fs::path& path, std::size_t cam) {
  const std::string ctx = path.string() + ": cameras[" + std::to_string(cam) + "].";
  if (!j.contains(field)) throw IoError(ctx + field + " missing");
  if (!j.at(field).is_number()) throw IoError(ctx + field + " must be a number");
  return j.at(field).get<double>();
}

int json_int(const json& j, const char* field, const fs::path& path, std::size_t cam) {
  const std::string ctx = path.string() + ": cameras[" + std::to_string(cam) + "].";
  if (!j.contains(field)) throw IoError(ctx + field + " missing");
  if (!j.at(field).is_number_integer()) throw IoError(ctx + field + " must be an integer");
  return j.at(field).get<int>();
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string() + ": write failed");
}

void write_ppm(const RgbImage& image, const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

RgbImage read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  if (pnm_token(in, path) != "P6") throw IoError(path.string() + ": not a binary PPM (P6)");
  const int w = pnm_int(in, path, "width");
  const int h = pnm_int(in, path, "height");
  const int maxval = pnm_int(in, path, "maxval");
  if (maxval != 255) throw IoError(path.string() + ": only maxval 255 is supported");
  in.get();
  RgbImage img(w, h);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) throw IoError(path.string() + ": truncated pixel data");
  return img;
}

void write_trajectory(const std::vector<PoseRecord>& records, const fs::path& path) {
  std::ostringstream out;
  out << "# mvtrack-poses v1\n";
  out << "# index r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz (mm)\n";
  for (const auto& rec : records) {
    out << rec.frame;
    const Mat3& r = rec.pose.rotation();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out << ' ' << exact(r(i, j));
    for (int i = 0; i < 3; ++i) out << ' ' << exact(rec.pose.translation()[i]);
    out << '\n';
  }
  write_text_file(path, out.str());
}

void write_trajectory(const std::vector<RigidTransform>& poses, const fs::path& path, int first_frame) {
  std::vector<PoseRecord> records;
  records.reserve(poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) records.push_back({first_frame + static_cast<int>(i), poses[i]});
  write_trajectory(records, path);
}

std::vector<PoseRecord> read_trajectory(const fs::path& path, const WarningSink& warn) {
  std::istringstream in(read_text_file(path));
  std::vector<PoseRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<std::string> tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != 13)
      throw IoError(where(path, lineno) + "expected 13 fields (index + 12 numbers), got " + std::to_string(tokens.size()));

    PoseRecord rec;
    try {
      std::size_t used = 0;
      rec.frame = std::stoi(tokens[0], &used);
      if (used != tokens[0].size()) throw std::invalid_argument(tokens[0]);
    } catch (const std::exception&) {
      throw IoError(where(path, lineno) + "bad frame index '" + tokens[0] + "'");
    }
    double v[12];
    for (int k = 0; k < 12; ++k) {
      try {
        std::size_t used = 0;
        v[k] = std::stod(tokens[k + 1], &used);
        if (used != tokens[k + 1].size() || !std::isfinite(v[k])) throw std::invalid_argument(tokens[k + 1]);
      } catch (const std::exception&) {
        throw IoError(where(path, lineno) + "field " + std::to_string(k + 2) + " is not a finite number ('" +
                      tokens[k + 1] + "')");
      }
    }
    if (!records.empty() && rec.frame <= records.back().frame)
      throw IoError(where(path, lineno) + "frame index " + std::to_string(rec.frame) + " does not increase");

    Mat3 r;
    r << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    const double dev = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    if (r.determinant() <= 0.0 || dev > 0.1)
      throw IoError(where(path, lineno) + "rotation block is not a rotation matrix");
    if (dev > 1e-6) {
      r = nearest_rotation(r);
      if (warn) warn(where(path, lineno) + "rotation re-orthonormalized (deviation " + exact(dev) + ")");
    }
    rec.pose = RigidTransform(r, Vec3(v[9], v[10], v[11]));
    records.push_back(rec);
  }
  return records;
}

std::vector<RigidTransform> poses_of(const std::vector<PoseRecord>& records) {
  std::vector<RigidTransform> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.pose);
  return out;
}

void write_rig(const Rig& rig, const fs::path& path) {
  json cams = json::array();
  for (const auto& v : rig) {
    json m = json::array();
    const Mat4 t = v.object_from_camera.matrix();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m.push_back(t(i, j));
    cams.push_back({{"index", v.index},
                    {"fx", v.intrinsics.fx},
                    {"fy", v.intrinsics.fy},
                    {"cx", v.intrinsics.cx},
                    {"cy", v.intrinsics.cy},
                    {"width", v.intrinsics.width},
                    {"height", v.intrinsics.height},
                    {"object_from_camera", m}});
  }
  write_text_file(path, json{{"cameras", cams}}.dump(2) + "\n");
}

Rig read_rig(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("cameras") || !doc["cameras"].is_array())
    throw IoError(path.string() + ": cameras missing or not an array");
  if (doc["cameras"].empty()) throw IoError(path.string() + ": cameras is empty");
  Rig rig;
  for (std::size_t c = 0; c < doc["cameras"].size(); ++c) {
    const json& j = doc["cameras"][c];
    if (!j.is_object()) throw IoError(path.string() + ": cameras[" + std::to_string(c) + "] is not an object");
    CameraView v;
    v.index = json_int(j, "index", path, c);
    v.intrinsics.fx = json_number(j, "fx", path, c);
    v.intrinsics.fy = json_number(j, "fy", path, c);
    v.intrinsics.cx = json_number(j, "cx", path, c);
    v.intrinsics.cy = json_number(j, "cy", path, c);
    v.intrinsics.width = json_int(j, "width", path, c);
    v.intrinsics.height = json_int(j, "height", path, c);
    const std::string ctx = path.string() + ": cameras[" + std::to_string(c) + "].";
    if (!j.contains("object_from_camera")) throw IoError(ctx + "object_from_camera missing");
    const json& m = j["object_from_camera"];
    if (!m.is_array() || m.size() != 16) throw IoError(ctx + "object_from_camera must hold 16 numbers");
    Mat4 t;
    for (int k = 0; k < 16; ++k) {
      if (!m[k].is_number()) throw IoError(ctx + "object_from_camera[" + std::to_string(k) + "] must be a number");
      t(k / 4, k % 4) = m[k].get<double>();
    }
    v.object_from_camera = RigidTransform::from_matrix(t);
    if (!v.object_from_camera.is_valid(1e-6)) throw IoError(ctx + "object_from_camera is not a rigid transform");
    try {
      v.intrinsics.validate();
    } catch (const Error& e) {
      throw IoError(ctx.substr(0, ctx.size() - 1) + ": " + e.what());
    }
    rig.push_back(v);
  }
  return rig;
}

void write_report_csv(const SequenceReport& report, const fs::path& path) {
  std::ostringstream out;
  out << "frames,resets";
  for (const auto& r : report.rates) out << ',' << r.name;
  out << ",AUC,mean_time_ms\n";
  out << report.frames.size() << ',' << report.reset_frames.size();
  for (const auto& r : report.rates) out << ',' << fmt(r.percent, 2);
  out << ',' << fmt(report.auc, 6) << ',' << fmt(report.mean_time_ms, 3) << '\n';
  write_text_file(path, out.str());
}

void write_report_json(const SequenceReport& report, const fs::path& path) {
  json rates = json::object();
  for (const auto& r : report.rates) rates[r.name] = r.percent;
  json frames = json::array();
  for (const auto& e : report.frames) {
    frames.push_back({{"rotation_deg", e.rotation_deg},
                      {"translation_mm", e.translation_mm},
                      {"per_axis_mm", {e.per_axis_mm.x(), e.per_axis_mm.y(), e.per_axis_mm.z()}},
                      {"add_mm", e.add_mm}});
  }
  json doc{{"frames", report.frames.size()},
           {"diameter_mm", report.diameter_mm},
           {"rates", rates},
           {"reset_frames", report.reset_frames},
           {"auc", report.auc},
           {"add_curve", report.add_curve},
           {"mean_time_ms", report.mean_time_ms},
           {"per_frame", frames}};
  write_text_file(path, doc.dump(2) + "\n");
}

void write_add_curve_svg(const SequenceReport& report, const fs::path& path) {
  const double w = 480, h = 320, left = 50, right = 20, top = 20, bottom = 40;
  const double pw = w - left - right, ph = h - top - bottom;
  const std::size_t n = report.add_curve.size();
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g stroke=\"black\" fill=\"none\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph << "\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n";
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = left + pw * k / 4.0, y = top + ph - ph * k / 4.0;
    out << "<text x=\"" << fmt(x, 1) << "\" y=\"" << top + ph + 15 << "\" text-anchor=\"middle\">" << fmt(0.05 * k, 2)
        << "</text>\n";
    out << "<text x=\"" << left - 5 << "\" y=\"" << fmt(y + 4, 1) << "\" text-anchor=\"end\">" << 25 * k
        << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 5 << "\" text-anchor=\"middle\">ADD threshold (d)</text>\n";
  out << "<text x=\"12\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 12 " << top + ph / 2
      << ")\" text-anchor=\"middle\">success (%)</text>\n</g>\n";
  if (n > 0) {
    out << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < n; ++j) {
      const double x = left + (n > 1 ? pw * j / (n - 1.0) : 0.0);
      const double y = top + ph - ph * report.add_curve[j];
      out << (j ? " " : "") << fmt(x, 2) << ',' << fmt(y, 2);
    }
    out << "\"/>\n";
  }
  out << "<text x=\"" << left + pw - 5 << "\" y=\"" << top + ph - 8
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">AUC " << fmt(report.auc, 4) << "</text>\n";
  out << "</svg>\n";
  write_text_file(path, out.str());
}

void write_error_table_csv(const ErrorTable& table, const fs::path& path) {
  std::ostringstream out;
  auto row = [&](const std::string& label, auto&& cell) {
    out << label;
    for (std::size_t c = 0; c < table.cells.size(); ++c) out << ',' << cell(c);
    out << '\n';
  };
  row(table.header_label, [&](std::size_t c) { return table.columns[c]; });
  row("Camera Index", [&](std::size_t c) { return table.camera_labels[c]; });
  auto value = [&](double ErrorTable::Cell::* field) {
    return [&table, field](std::size_t c) {
      return table.cells[c].error.empty() ? fmt(table.cells[c].*field, 4) : std::string("ERR");
    };
  };
  row("r(°)", value(&ErrorTable::Cell::r));
  row("tx(mm)", value(&ErrorTable::Cell::tx));
  row("ty(mm)", value(&ErrorTable::Cell::ty));
  row("tz(mm)", value(&ErrorTable::Cell::tz));
  row("Lost Number", [&](std::size_t c) { return std::to_string(table.cells[c].lost); });
  const bool any_error = std::any_of(table.cells.begin(), table.cells.end(), [](const auto& c) { return !c.error.empty(); });
  if (any_error) {
    row("Error", [&](std::size_t c) {
      std::string e = table.cells[c].error;
      std::replace(e.begin(), e.end(), ',', ';');
      std::replace(e.begin(), e.end(), '\n', ' ');
      return e;
    });
  }
  write_text_file(path, out.str());
}

std::string format_error_table(const ErrorTable& table) {
  std::ostringstream out;
  out << table.title << '\n';
  out << std::left << std::setw(16) << table.header_label;
  for (const auto& c : table.columns) out << std::setw(12) << c;
  out << '\n' << std::setw(16) << "Camera Index";
  for (const auto& c : table.camera_labels) out << std::setw(12) << c;
  out << '\n';
  auto line = [&](const char* label, double ErrorTable::Cell::* field) {
    out << std::setw(16) << label;
    for (const auto& c : table.cells) out << std::setw(12) << (c.error.empty() ? fmt(c.*field, 4) : "ERR");
    out << '\n';
  };
  line("r(deg)", &ErrorTable::Cell::r);
  line("tx(mm)", &ErrorTable::Cell::tx);
  line("ty(mm)", &ErrorTable::Cell::ty);
  line("tz(mm)", &ErrorTable::Cell::tz);
  out << std::setw(16) << "Lost Number";
  for (const auto& c : table.cells) out << std::setw(12) << c.lost;
  out << '\n';
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    if (!table.cells[c].error.empty()) out << table.columns[c] << ": " << table.cells[c].error << '\n';
  }
  return out.str();
}

fs::path frame_image_path(const fs::path& sequence, int view, int frame) {
  return sequence / ("view_" + std::to_string(view)) / ("frame_" + std::to_string(frame) + ".ppm");
}

Rig NativeSequenceAdapter::load_rig(const fs::path& sequence) const { return read_rig(sequence / "rig.json"); }

std::vector<PoseRecord> NativeSequenceAdapter::load_ground_truth(const fs::path& sequence) const {
  return read_trajectory(sequence / "gt.poses");
}

RgbImage NativeSequenceAdapter::load_image(const fs::path& sequence, int view, int frame) const {
  return read_ppm(frame_image_path(sequence, view, frame));
}

int NativeSequenceAdapter::frame_count(const fs::path& sequence) const {
  return static_cast<int>(load_ground_truth(sequence).size());
}

}  // namespace mvtrack
