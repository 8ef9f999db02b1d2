#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mvtrack/camera.hpp"
#include "mvtrack/geometry.hpp"
#include "mvtrack/image.hpp"
#include "mvtrack/metrics.hpp"
#include "mvtrack/simulator.hpp"

namespace mvtrack {

/// Binary PPM (P6, maxval 255). Throws IoError with the path.
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

struct PoseRecord {
  int frame = 0;
  RigidTransform pose;
};

/// Called for every rotation re-orthonormalized on load.
using WarningSink = std::function<void(const std::string&)>;

/// Plain-text trajectory: `# mvtrack-poses v1` header, then one line per
/// frame `index r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz`. `#` starts a
/// comment anywhere on a line.
void write_trajectory(const std::vector<PoseRecord>& records, const std::filesystem::path& path);
void write_trajectory(const std::vector<RigidTransform>& poses, const std::filesystem::path& path, int first_frame = 0);

/// Rejects malformed lines, non-increasing indices and rotations that are
/// not within 1e-6 of orthonormal after projection; rotations off by more
/// than 1e-6 but still well-conditioned are projected onto SO(3) and
/// reported through `warn`. Throws IoError with path:line.
std::vector<PoseRecord> read_trajectory(const std::filesystem::path& path, const WarningSink& warn = {});
std::vector<RigidTransform> poses_of(const std::vector<PoseRecord>& records);

/// Calibration JSON: {"cameras": [{"index", "fx", "fy", "cx", "cy",
/// "width", "height", "object_from_camera": [16 numbers, row-major]}]}.
/// Every field is required.
void write_rig(const Rig& rig, const std::filesystem::path& path);
Rig read_rig(const std::filesystem::path& path);

/// Report emission.
void write_report_csv(const SequenceReport& report, const std::filesystem::path& path);
void write_report_json(const SequenceReport& report, const std::filesystem::path& path);
/// ADD success curve, abscissa in units of d.
void write_add_curve_svg(const SequenceReport& report, const std::filesystem::path& path);
/// Table layout: header row of camera labels, one row per error term.
void write_error_table_csv(const ErrorTable& table, const std::filesystem::path& path);
std::string format_error_table(const ErrorTable& table);

/// Adapter for external benchmark annotations. Implementations map their
/// native calibration and pose files onto the types above.
class DatasetAdapter {
 public:
  virtual ~DatasetAdapter() = default;
  virtual Rig load_rig(const std::filesystem::path& sequence) const = 0;
  virtual std::vector<PoseRecord> load_ground_truth(const std::filesystem::path& sequence) const = 0;
  virtual RgbImage load_image(const std::filesystem::path& sequence, int view, int frame) const = 0;
  virtual int frame_count(const std::filesystem::path& sequence) const = 0;
};

/// Adapter for directories written by `cli_simulate`.
class NativeSequenceAdapter : public DatasetAdapter {
 public:
  Rig load_rig(const std::filesystem::path& sequence) const override;
  std::vector<PoseRecord> load_ground_truth(const std::filesystem::path& sequence) const override;
  RgbImage load_image(const std::filesystem::path& sequence, int view, int frame) const override;
  int frame_count(const std::filesystem::path& sequence) const override;
};

std::filesystem::path frame_image_path(const std::filesystem::path& sequence, int view, int frame);

/// Whole-file read with IoError on failure.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace mvtrack
