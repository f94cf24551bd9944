#include <cmath>

#include "afbench/dp_single.hpp"
#include "afbench/sim.hpp"
#include "afbench/types.hpp"
#include "doctest.h"
#include "support/checks.hpp"
#include "support/fixtures.hpp"

using namespace afbench;

namespace {

// Left/right crops of one wide texture, offset so that right(x) = left(x - d).
DualPixelPatch shifted_pair(int w, int h, int d, uint64_t seed) {
  const int margin = 10;
  const Patch wide = testfix::smooth_patch(w + 2 * margin, h, seed);
  DualPixelPatch pair;
  pair.left = Patch(w, h);
  pair.right = Patch(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      pair.left.at(x, y) = wide.at(x + margin, y);
      pair.right.at(x, y) = wide.at(x + margin - d, y);
    }
  }
  return pair;
}

}  // namespace

TEST_CASE("zncc_disparity recovers integer shifts with the right sign") {
  for (int d : {-3, 0, 2, 5}) {
    CAPTURE(d);
    const DisparityEstimate est = zncc_disparity(shifted_pair(64, 32, d, 5), 8);
    CHECK(std::fabs(est.d - d) < 0.3);
    REQUIRE(est.peak_scores.size() == 17u);
    // The exact-match shift scores a correlation of 1.
    CHECK(est.peak_scores[static_cast<size_t>(d + 8)] ==
          doctest::Approx(1.0).epsilon(1e-9));
    for (double s : est.peak_scores) {
      CHECK(s <= 1.0 + 1e-9);
      CHECK(s >= -2.0);
    }
  }
}

TEST_CASE("zncc_disparity resolves subpixel shifts") {
  // right(x) = left(x - 2.4) via linear interpolation of the wide texture.
  const int w = 64, h = 32, margin = 10;
  const Patch wide = testfix::smooth_patch(w + 2 * margin, h, 9, 3.0);
  DualPixelPatch pair;
  pair.left = Patch(w, h);
  pair.right = Patch(w, h);
  const double d = 2.4;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      pair.left.at(x, y) = wide.at(x + margin, y);
      const double sx = x + margin - d;
      const int x0 = static_cast<int>(std::floor(sx));
      const double fx = sx - x0;
      pair.right.at(x, y) = (1.0 - fx) * wide.at(x0, y) + fx * wide.at(x0 + 1, y);
    }
  }
  const DisparityEstimate est = zncc_disparity(pair, 8);
  CHECK(std::fabs(est.d - d) < 0.25);
  CHECK(est.subpixel_offset > -0.5);
  CHECK(est.subpixel_offset < 0.5);
}

TEST_CASE("zncc_disparity rejects unusable inputs") {
  const DualPixelPatch flat{Patch(32, 16, 0.5), Patch(32, 16, 0.5)};
  try {
    zncc_disparity(flat, 8);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Data);
  }

  const DualPixelPatch narrow{testfix::smooth_patch(16, 16, 1),
                              testfix::smooth_patch(16, 16, 2)};
  try {
    zncc_disparity(narrow, 8);  // width must exceed 2 * max_shift
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("lookup_C interpolates the calibration grid bilinearly") {
  CalibrationGrid grid;
  grid.grid_w = 2;
  grid.grid_h = 2;
  grid.values = {1.0, 2.0, 3.0, 4.0};
  CHECK(lookup_C(grid, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(lookup_C(grid, 1.0, 0.0) == doctest::Approx(2.0));
  CHECK(lookup_C(grid, 0.0, 1.0) == doctest::Approx(3.0));
  CHECK(lookup_C(grid, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(lookup_C(grid, 0.5, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("analytic_C matches the closed form") {
  const CameraConfig cam = CameraConfig::defaults();
  const double g = 1.0;
  const double expected = cam.alpha * cam.aperture_radius_l * cam.focal_length_f /
                          ((1.0 - cam.focal_length_f / g) * cam.pixel_pitch_m);
  CHECK(analytic_C(cam, g) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("single-slice disparity lands near the true focus index") {
  const CameraConfig cam = CameraConfig::defaults();
  const Scene scene = testfix::flat_scene(64, 64, 42, 24, cam);
  const FocalStack stack = render_stack(scene, cam, SimOptions{});
  for (int start : {10, 24, 40}) {
    CAPTURE(start);
    const int pred = solve_single_slice_dp(stack.slices[static_cast<size_t>(start)],
                                           start, cam);
    CHECK(std::abs(pred - 24) <= 2);
  }
}

TEST_CASE("a calibration grid overrides the analytic conversion factor") {
  CameraConfig cam = CameraConfig::defaults();
  const Scene scene = testfix::flat_scene(64, 64, 42, 24, cam);
  const FocalStack stack = render_stack(scene, cam, SimOptions{});

  // A wildly wrong grid maps every disparity to almost zero inverse-depth
  // change, so the prediction stays at the starting slice.
  cam.calibration_grid.grid_w = 2;
  cam.calibration_grid.grid_h = 2;
  cam.calibration_grid.values = {1e9, 1e9, 1e9, 1e9};
  const int pred = solve_single_slice_dp(stack.slices[10], 10, cam);
  CHECK(std::abs(pred - 10) <= 1);
}

TEST_CASE("blur matching brackets the focus index from one green slice") {
  const CameraConfig cam = CameraConfig::defaults();
  const Scene scene = testfix::flat_scene(64, 64, 7, 24, cam);
  SimOptions opts;
  opts.dual_pixel = false;
  const FocalStack stack = render_stack(scene, cam, opts);

  const BlurMatchCandidates at_focus =
      blur_match_candidates(stack.green(24), 24, scene.texture, cam);
  CHECK(at_focus.blur_radius_px < 0.3);
  CHECK(std::abs(at_focus.index_near - 24) <= 1);
  CHECK(std::abs(at_focus.index_far - 24) <= 1);

  // Starting near the camera, only the far-side root stays on the ladder.
  const BlurMatchCandidates from_near =
      blur_match_candidates(stack.green(4), 4, scene.texture, cam);
  CHECK_FALSE(from_near.near_in_range);
  CHECK(from_near.far_in_range);
  CHECK(std::abs(from_near.index_far - 24) <= 2);
  CHECK(std::abs(blur_match_predict(stack.green(4), 4, scene.texture, cam) - 24) <= 2);

  // Starting beyond the subject, only the near-side root stays on the ladder.
  const BlurMatchCandidates from_far =
      blur_match_candidates(stack.green(44), 44, scene.texture, cam);
  CHECK(from_far.near_in_range);
  CHECK_FALSE(from_far.far_in_range);
  CHECK(std::abs(from_far.index_near - 24) <= 2);
  CHECK(std::abs(blur_match_predict(stack.green(44), 44, scene.texture, cam) - 24) <= 2);
}
