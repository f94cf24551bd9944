#include <fstream>
#include <string>

#include "afbench/stack_io.hpp"
#include "afbench/types.hpp"
#include "doctest.h"
#include "support/checks.hpp"
#include "support/fixtures.hpp"
#include "support/tmpdir.hpp"

using namespace afbench;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

FocalStack small_stack(bool dual) {
  FocalStack stack;
  stack.dual_pixel = dual;
  stack.focus_distances_m = {0.3, 0.5, 0.9};
  stack.ground_truth_index = 1;
  for (int k = 0; k < 3; ++k) {
    const uint64_t seed = 100 + static_cast<uint64_t>(k);
    if (dual) {
      stack.slices.push_back(testfix::random_pair(12, 9, seed));
    } else {
      stack.slices.push_back({testfix::random_patch(12, 9, seed), Patch{}});
    }
  }
  return stack;
}

}  // namespace

TEST_CASE("pgm16 survives a round trip within one quantization step") {
  testfix::TempDir tmp("pgm");
  const Patch original = testfix::random_patch(17, 11, 4);
  write_pgm16(tmp / "p.pgm", original);
  const Patch loaded = read_pgm16(tmp / "p.pgm");
  REQUIRE(loaded.width == 17);
  REQUIRE(loaded.height == 11);
  CHECK(testfix::max_abs_diff(original, loaded) <= 0.5 / 65535.0 + 1e-12);
}

TEST_CASE("pgm16 write clips out-of-range values") {
  testfix::TempDir tmp("pgmclip");
  Patch p(4, 1, 0.5);
  p.at(0, 0) = -0.75;
  p.at(1, 0) = 1.5;
  write_pgm16(tmp / "p.pgm", p);
  const Patch loaded = read_pgm16(tmp / "p.pgm");
  CHECK(loaded.at(0, 0) == 0.0);
  CHECK(loaded.at(1, 0) == 1.0);
  CHECK(loaded.at(2, 0) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("pgm16 reader accepts comments and loose header whitespace") {
  testfix::TempDir tmp("pgmhdr");
  // 2x1, maxval 65535, pixels 0 and 65535 big-endian.
  const std::string body = {'\x00', '\x00', '\xff', '\xff'};
  write_text(tmp / "p.pgm",
             "P5 # comment after magic\n# a full comment line\n  2\n\t1 \n65535\n" + body);
  const Patch loaded = read_pgm16(tmp / "p.pgm");
  REQUIRE(loaded.width == 2);
  REQUIRE(loaded.height == 1);
  CHECK(loaded.at(0, 0) == 0.0);
  CHECK(loaded.at(1, 0) == 1.0);
}

TEST_CASE("pgm16 reader rejects malformed files") {
  testfix::TempDir tmp("pgmbad");
  write_text(tmp / "magic.pgm", "P6 2 1 65535 xxxx");
  CHECK_THROWS_AS(read_pgm16(tmp / "magic.pgm"), Error);

  write_text(tmp / "maxval.pgm", std::string("P5 2 1 255\n") + "\x01\x02");
  CHECK_THROWS_AS(read_pgm16(tmp / "maxval.pgm"), Error);

  write_text(tmp / "short.pgm", std::string("P5 2 1 65535\n") + std::string(2, '\x01'));
  try {
    read_pgm16(tmp / "short.pgm");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }

  try {
    read_pgm16(tmp / "missing.pgm");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("focal stacks round trip through their directory format") {
  for (bool dual : {true, false}) {
    CAPTURE(dual);
    testfix::TempDir tmp("stack");
    const FocalStack original = small_stack(dual);
    save_stack(tmp.path(), original);

    const FocalStack loaded = load_stack(tmp.path());
    CHECK(loaded.dual_pixel == dual);
    REQUIRE(loaded.slice_count() == 3);
    REQUIRE(loaded.ground_truth_index.has_value());
    CHECK(*loaded.ground_truth_index == 1);
    for (size_t i = 0; i < 3; ++i) {
      CHECK(loaded.focus_distances_m[i] == original.focus_distances_m[i]);
    }
    for (int k = 0; k < 3; ++k) {
      CHECK(testfix::max_abs_diff(original.slices[static_cast<size_t>(k)].left,
                                  loaded.slices[static_cast<size_t>(k)].left) < 1e-5);
      if (dual) {
        CHECK(testfix::max_abs_diff(original.slices[static_cast<size_t>(k)].right,
                                    loaded.slices[static_cast<size_t>(k)].right) < 1e-5);
      } else {
        CHECK(loaded.slices[static_cast<size_t>(k)].right.empty());
      }
    }
  }
}

TEST_CASE("stack loading surfaces tampered or missing metadata") {
  testfix::TempDir tmp("stackbad");
  save_stack(tmp.path(), small_stack(true));

  write_text(tmp / "manifest.json", "{ not json");
  try {
    load_stack(tmp.path());
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }

  try {
    load_stack(tmp.path() / "nope");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("camera configuration round trips exactly") {
  testfix::TempDir tmp("camera");
  CameraConfig cam = CameraConfig::defaults();
  cam.alpha = 0.731;
  cam.pixel_pitch_m = 1.7e-6;
  cam.calibration_grid.grid_w = 2;
  cam.calibration_grid.grid_h = 3;
  cam.calibration_grid.values = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  save_camera_json(tmp / "camera.json", cam);

  const CameraConfig loaded = load_camera_json(tmp / "camera.json");
  CHECK(loaded.focal_length_f == cam.focal_length_f);
  CHECK(loaded.aperture_radius_l == cam.aperture_radius_l);
  CHECK(loaded.pixel_pitch_m == cam.pixel_pitch_m);
  CHECK(loaded.alpha == cam.alpha);
  REQUIRE(loaded.focus_distances_m.size() == cam.focus_distances_m.size());
  for (size_t i = 0; i < cam.focus_distances_m.size(); ++i) {
    CHECK(loaded.focus_distances_m[i] == cam.focus_distances_m[i]);
  }
  REQUIRE(loaded.calibration_grid.values.size() == 6u);
  CHECK(loaded.calibration_grid.grid_w == 2);
  CHECK(loaded.calibration_grid.values[4] == 5.0);
}

TEST_CASE("camera fields default when absent") {
  testfix::TempDir tmp("camdef");
  write_text(tmp / "camera.json", "{}");
  const CameraConfig loaded = load_camera_json(tmp / "camera.json");
  const CameraConfig def = CameraConfig::defaults();
  CHECK(loaded.focal_length_f == def.focal_length_f);
  CHECK(loaded.focus_distances_m == def.focus_distances_m);
  CHECK(loaded.calibration_grid.empty());
}

TEST_CASE("calibration tables validate their size") {
  testfix::TempDir tmp("calib");
  write_text(tmp / "ok.json", R"({"grid_w": 2, "grid_h": 2, "values": [1, 2, 3, 4]})");
  const CalibrationGrid grid = load_calibration_json(tmp / "ok.json");
  CHECK(grid.grid_w == 2);
  CHECK(grid.values.size() == 4u);

  write_text(tmp / "bad.json", R"({"grid_w": 2, "grid_h": 2, "values": [1, 2]})");
  CHECK_THROWS_AS(load_calibration_json(tmp / "bad.json"), Error);
}

TEST_CASE("dataset directories enumerate and lazily load their stacks") {
  testfix::TempDir tmp("dataset");
  CameraConfig cam = CameraConfig::defaults();
  cam.focus_distances_m = {0.3, 0.5, 0.9};
  std::filesystem::create_directories(tmp / "s0");
  std::filesystem::create_directories(tmp / "s1");
  save_stack(tmp / "s0", small_stack(true));
  save_stack(tmp / "s1", small_stack(false));
  save_dataset_index(tmp.path(), {"s0", "s1"}, cam);

  const DatasetReader reader(tmp.path());
  REQUIRE(reader.size() == 2u);
  CHECK(reader.get(0).dual_pixel);
  CHECK_FALSE(reader.get(1).dual_pixel);
  CHECK(reader.camera().focus_distances_m == cam.focus_distances_m);
}

TEST_CASE("a bare stack directory acts as a one-element dataset") {
  testfix::TempDir tmp("bare");
  save_stack(tmp.path(), small_stack(true));
  const DatasetReader reader(tmp.path());
  REQUIRE(reader.size() == 1u);
  CHECK(reader.get(0).slice_count() == 3);
}

TEST_CASE("dataset reader rejects broken layouts") {
  try {
    DatasetReader reader("/nonexistent/afbench/dataset");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }

  testfix::TempDir empty("dsempty");
  write_text(empty / "dataset.json", R"({"stacks": []})");
  try {
    DatasetReader reader(empty.path());
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }

  testfix::TempDir mismatch("dscount");
  write_text(mismatch / "dataset.json", R"({"count": 3, "stacks": ["a"]})");
  try {
    DatasetReader reader(mismatch.path());
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }
}
