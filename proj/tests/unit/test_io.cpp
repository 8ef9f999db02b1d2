#include <gtest/gtest.h>

#include <random>

#include "mvtrack/errors.hpp"
#include "mvtrack/io.hpp"
#include "mvtrack/simulator.hpp"
#include "test_support.hpp"

using namespace mvtrack;
using mvtrack::testing::random_transform;
using mvtrack::testing::temp_dir;

namespace {

const char* kPose = " 1 0 0 0 1 0 0 0 1 1.5 -2 700";

std::string expect_io_error(const std::filesystem::path& p) {
  try {
    read_trajectory(p);
  } catch (const IoError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no IoError for " << p;
  return {};
}

}  // namespace

TEST(Ppm, RoundTrip) {
  const auto dir = temp_dir("io_ppm");
  RgbImage img(7, 5);
  std::mt19937_64 rng(1);
  for (auto& b : img.data) b = static_cast<std::uint8_t>(rng());
  write_ppm(img, dir / "a.ppm");
  EXPECT_EQ(read_ppm(dir / "a.ppm"), img);
  write_text_file(dir / "bad.ppm", "P3\n1 1\n255\n0 0 0\n");
  EXPECT_THROW(read_ppm(dir / "bad.ppm"), IoError);
  write_text_file(dir / "short.ppm", "P6\n4 4\n255\nabc");
  EXPECT_THROW(read_ppm(dir / "short.ppm"), IoError);
  EXPECT_THROW(read_ppm(dir / "missing.ppm"), IoError);
}

TEST(Trajectory, RoundTripIsExact) {
  const auto dir = temp_dir("io_traj");
  std::mt19937_64 rng(2);
  std::vector<RigidTransform> poses;
  for (int i = 0; i < 20; ++i) poses.push_back(random_transform(rng, 1000.0));
  write_trajectory(poses, dir / "p.poses", 3);
  const auto text = read_text_file(dir / "p.poses");
  EXPECT_EQ(text.rfind("# mvtrack-poses v1\n", 0), 0u);
  int warnings = 0;
  const auto records = read_trajectory(dir / "p.poses", [&](const std::string&) { ++warnings; });
  ASSERT_EQ(records.size(), poses.size());
  EXPECT_EQ(warnings, 0);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    EXPECT_EQ(records[i].frame, static_cast<int>(i) + 3);
    EXPECT_EQ(records[i].pose.matrix(), poses[i].matrix());
  }
  EXPECT_EQ(poses_of(records).size(), poses.size());
}

TEST(Trajectory, CommentsAndBlankLines) {
  const auto dir = temp_dir("io_comments");
  write_text_file(dir / "c.poses", std::string("# header\n\n0") + kPose + "  # trailing\n   \n2" + kPose + "\n");
  const auto records = read_trajectory(dir / "c.poses");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].frame, 2);
  EXPECT_EQ(records[1].pose.translation(), Vec3(1.5, -2, 700));
}

TEST(Trajectory, SlightlyOffRotationIsProjectedWithWarning) {
  const auto dir = temp_dir("io_ortho");
  write_text_file(dir / "o.poses", "0 1.0001 0 0 0 1 0 0 0 1 0 0 0\n");
  std::vector<std::string> warnings;
  const auto records = read_trajectory(dir / "o.poses", [&](const std::string& w) { warnings.push_back(w); });
  ASSERT_EQ(records.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find(":1:"), std::string::npos) << warnings[0];
  const Mat3 r = records[0].pose.rotation();
  EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
}

TEST(Trajectory, MalformedInputIsRejectedWithLocation) {
  const auto dir = temp_dir("io_bad");
  write_text_file(dir / "fields.poses", "0 1 0 0 0 1 0 0 0 1 0 0\n");
  EXPECT_NE(expect_io_error(dir / "fields.poses").find("fields.poses:1"), std::string::npos);

  write_text_file(dir / "nan.poses", std::string("0") + kPose + "\n1 1 0 0 0 1 0 0 0 1 nan 0 0\n");
  EXPECT_NE(expect_io_error(dir / "nan.poses").find("nan.poses:2"), std::string::npos);

  write_text_file(dir / "word.poses", "x 1 0 0 0 1 0 0 0 1 0 0 0\n");
  EXPECT_NE(expect_io_error(dir / "word.poses").find("frame index"), std::string::npos);

  write_text_file(dir / "order.poses", std::string("4") + kPose + "\n4" + kPose + "\n");
  EXPECT_NE(expect_io_error(dir / "order.poses").find("does not increase"), std::string::npos);

  write_text_file(dir / "reflect.poses", "0 -1 0 0 0 1 0 0 0 1 0 0 0\n");
  EXPECT_NE(expect_io_error(dir / "reflect.poses").find("rotation"), std::string::npos);

  write_text_file(dir / "scaled.poses", "0 2 0 0 0 2 0 0 0 2 0 0 0\n");
  expect_io_error(dir / "scaled.poses");
  expect_io_error(dir / "absent.poses");
}

TEST(Rig, RoundTrip) {
  const auto dir = temp_dir("io_rig");
  RigSpec spec;
  spec.included_angles_deg = {30.0, 90.0};
  spec.pattern = RigPattern::kCone;
  const Rig rig = make_rig(spec);
  write_rig(rig, dir / "rig.json");
  const Rig back = read_rig(dir / "rig.json");
  ASSERT_EQ(back.size(), rig.size());
  for (std::size_t i = 0; i < rig.size(); ++i) {
    EXPECT_EQ(back[i].index, rig[i].index);
    EXPECT_EQ(back[i].intrinsics.fx, rig[i].intrinsics.fx);
    EXPECT_EQ(back[i].intrinsics.cy, rig[i].intrinsics.cy);
    EXPECT_EQ(back[i].intrinsics.width, rig[i].intrinsics.width);
    EXPECT_EQ(back[i].object_from_camera.matrix(), rig[i].object_from_camera.matrix());
  }
}

TEST(Rig, MissingAndWrongFieldsAreNamed) {
  const auto dir = temp_dir("io_rig_bad");
  const std::string identity = "[1,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]";
  auto camera = [&](const std::string& skip) {
    std::string s = "{";
    const std::vector<std::pair<std::string, std::string>> fields = {
        {"index", "0"},     {"fx", "500"},      {"fy", "500"},
        {"cx", "319.5"},    {"cy", "239.5"},    {"width", "640"},
        {"height", "480"},  {"object_from_camera", identity}};
    bool first = true;
    for (const auto& [k, v] : fields) {
      if (k == skip) continue;
      s += (first ? "\"" : ",\"") + k + "\":" + v;
      first = false;
    }
    return s + "}";
  };
  write_text_file(dir / "ok.json", "{\"cameras\":[" + camera("") + "]}");
  EXPECT_EQ(read_rig(dir / "ok.json").size(), 1u);
  for (const std::string field : {"index", "fx", "cy", "height", "object_from_camera"}) {
    write_text_file(dir / "m.json", "{\"cameras\":[" + camera(field) + "]}");
    try {
      read_rig(dir / "m.json");
      ADD_FAILURE() << field;
    } catch (const IoError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  }
  write_text_file(dir / "type.json", "{\"cameras\":[{\"index\":0,\"fx\":\"500\"}]}");
  EXPECT_THROW(read_rig(dir / "type.json"), IoError);
  write_text_file(dir / "empty.json", "{\"cameras\":[]}");
  EXPECT_THROW(read_rig(dir / "empty.json"), IoError);
  write_text_file(dir / "syntax.json", "{\"cameras\":[");
  EXPECT_THROW(read_rig(dir / "syntax.json"), IoError);
  write_text_file(dir / "skew.json",
                  "{\"cameras\":[{\"index\":0,\"fx\":500,\"fy\":500,\"cx\":1,\"cy\":1,\"width\":4,\"height\":4,"
                  "\"object_from_camera\":[2,0,0,0, 0,1,0,0, 0,0,1,0, 0,0,0,1]}]}");
  EXPECT_THROW(read_rig(dir / "skew.json"), IoError);
}

TEST(Reports, CsvAndTableLayout) {
  const auto dir = temp_dir("io_report");
  PoseError e;
  const SequenceReport r = score_errors({e, e}, 100.0);
  write_report_csv(r, dir / "report.csv");
  const std::string csv = read_text_file(dir / "report.csv");
  EXPECT_EQ(csv.rfind("frames,resets,ADD-0.02d,ADD-0.05d,ADD-0.1d,5°5cm,2°2cm,5°,2°,5cm,2cm,AUC,mean_time_ms\n", 0),
            0u)
      << csv;
  write_report_json(r, dir / "report.json");
  write_add_curve_svg(r, dir / "curve.svg");
  EXPECT_NE(read_text_file(dir / "curve.svg").find("<polyline"), std::string::npos);

  ErrorTable t;
  t.header_label = "Included Angle";
  t.columns = {"Mono.", "90°"};
  t.camera_labels = {"C-0", "C-0/C-1"};
  t.cells.resize(2);
  t.cells[1].error = "boom";
  write_error_table_csv(t, dir / "table.csv");
  const std::string table = read_text_file(dir / "table.csv");
  for (const char* row : {"Included Angle", "Camera Index", "r(°)", "tx(mm)", "ty(mm)", "tz(mm)", "Lost Number", "ERR"})
    EXPECT_NE(table.find(row), std::string::npos) << row;
  EXPECT_NE(format_error_table(t).find("C-0/C-1"), std::string::npos);
}

TEST(Adapter, NativeLayoutPaths) {
  EXPECT_EQ(frame_image_path("seq", 1, 12), std::filesystem::path("seq") / "view_1" / "frame_12.ppm");
}
