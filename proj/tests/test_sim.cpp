#include <cmath>

#include "afbench/sim.hpp"
#include "afbench/types.hpp"
#include "doctest.h"
#include "support/checks.hpp"
#include "support/fixtures.hpp"

using namespace afbench;

namespace {

double mean_of(const Patch& p) {
  double s = 0.0;
  for (double v : p.data) s += v;
  return s / static_cast<double>(p.size());
}

const CameraConfig& cam() {
  static const CameraConfig c = CameraConfig::defaults();
  return c;
}

const Scene& shared_scene() {
  static const Scene s = testfix::flat_scene(64, 64, 1234, 24, cam());
  return s;
}

const FocalStack& shared_stack() {
  static const FocalStack stack = render_stack(shared_scene(), cam(), SimOptions{});
  return stack;
}

}  // namespace

TEST_CASE("the default focus ladder spans the stated range") {
  const std::vector<double>& ladder = cam().focus_distances_m;
  REQUIRE(ladder.size() == 49u);
  CHECK(ladder.front() == doctest::Approx(0.102).epsilon(1e-12));
  CHECK(ladder.back() == doctest::Approx(3.91).epsilon(1e-12));
  // Uniform in inverse depth.
  const double step = 1.0 / ladder[0] - 1.0 / ladder[1];
  for (size_t i = 1; i < ladder.size(); ++i) {
    CHECK(1.0 / ladder[i - 1] - 1.0 / ladder[i] == doctest::Approx(step).epsilon(1e-9));
  }
}

TEST_CASE("blur radius is zero at focus and symmetric in inverse depth") {
  const double g = 1.0;
  CHECK(blur_radius(cam(), g, g) == doctest::Approx(0.0));
  const double delta = 0.5;
  const double near_z = 1.0 / (1.0 / g + delta);
  const double far_z = 1.0 / (1.0 / g - delta);
  CHECK(blur_radius(cam(), g, near_z) ==
        doctest::Approx(blur_radius(cam(), g, far_z)).epsilon(1e-12));
  CHECK(blur_radius(cam(), g, near_z) > 0.0);
  CHECK_THROWS_AS(blur_radius(cam(), cam().focal_length_f * 0.5, 1.0), Error);
  CHECK_THROWS_AS(blur_radius(cam(), 1.0, -2.0), Error);
}

TEST_CASE("disparity is signed by which side of focus the point sits on") {
  const double g = 1.0;
  CHECK(dp_disparity_true(cam(), g, 2.0) > 0.0);
  CHECK(dp_disparity_true(cam(), g, 0.5) < 0.0);
  CHECK(dp_disparity_true(cam(), g, g) == doctest::Approx(0.0));
  // Disparity magnitude never exceeds the correlation search range.
  const auto& ladder = cam().focus_distances_m;
  double worst = 0.0;
  for (double g_k : ladder) {
    for (double z : {ladder.front(), ladder.back()}) {
      worst = std::max(worst, std::fabs(dp_disparity_true(cam(), g_k, z)));
    }
  }
  CHECK(worst < 8.0);
}

TEST_CASE("breathing scale is unity at the reference focus and grows nearer") {
  const auto& ladder = cam().focus_distances_m;
  const double g_ref = ladder.back();
  CHECK(breathing_scale(cam(), g_ref, g_ref) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(breathing_scale(cam(), ladder.front(), g_ref) > 1.0);
  double prev = breathing_scale(cam(), ladder.front(), g_ref);
  for (size_t i = 1; i < ladder.size(); ++i) {
    const double cur = breathing_scale(cam(), ladder[i], g_ref);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("rendering preserves the texture mean on every slice") {
  const FocalStack& stack = shared_stack();
  const double reference = mean_of(shared_scene().texture);
  for (int k = 0; k < stack.slice_count(); k += 8) {
    CAPTURE(k);
    CHECK(std::fabs(mean_of(stack.green(k)) - reference) < 1e-9);
  }
}

TEST_CASE("the in-focus slice reproduces the texture exactly") {
  const FocalStack& stack = shared_stack();
  REQUIRE(stack.ground_truth_index.has_value());
  const int gt = *stack.ground_truth_index;
  CHECK(gt == 24);
  CHECK(testfix::max_abs_diff(stack.green(gt), shared_scene().texture) < 1e-12);
  CHECK(testfix::max_abs_diff(stack.slices[static_cast<size_t>(gt)].left,
                              stack.slices[static_cast<size_t>(gt)].right) < 1e-12);
}

TEST_CASE("sub-threshold blur collapses to the identity plateau") {
  const FocalStack& stack = shared_stack();
  const int gt = *stack.ground_truth_index;
  CHECK(testfix::max_abs_diff(stack.green(gt - 1), stack.green(gt)) < 1e-12);
  CHECK(testfix::max_abs_diff(stack.green(gt + 1), stack.green(gt)) < 1e-12);
  CHECK(testfix::max_abs_diff(stack.green(gt - 2), stack.green(gt)) > 1e-9);
}

TEST_CASE("rendering is deterministic, including its noise streams") {
  SimOptions opts;
  opts.noise_sigma = 0.05;
  Scene scene = testfix::flat_scene(32, 32, 77, 20, cam());
  const FocalStack a = render_stack(scene, cam(), opts);
  const FocalStack b = render_stack(scene, cam(), opts);
  CHECK(testfix::max_abs_diff(a.slices[0].left, b.slices[0].left) == 0.0);
  CHECK(testfix::max_abs_diff(a.slices[5].right, b.slices[5].right) == 0.0);

  scene.seed += 1;
  const FocalStack c = render_stack(scene, cam(), opts);
  CHECK(testfix::max_abs_diff(a.slices[0].left, c.slices[0].left) > 1e-6);
}

TEST_CASE("noise streams differ per slice and per sub-image") {
  SimOptions clean;
  SimOptions noisy;
  noisy.noise_sigma = 0.05;
  const Scene scene = testfix::flat_scene(32, 32, 5, 20, cam());
  const FocalStack base = render_stack(scene, cam(), clean);
  const FocalStack with_noise = render_stack(scene, cam(), noisy);

  Patch noise_l(32, 32), noise_r(32, 32), noise_l1(32, 32);
  for (size_t i = 0; i < noise_l.data.size(); ++i) {
    noise_l.data[i] = with_noise.slices[0].left.data[i] - base.slices[0].left.data[i];
    noise_r.data[i] = with_noise.slices[0].right.data[i] - base.slices[0].right.data[i];
    noise_l1.data[i] = with_noise.slices[1].left.data[i] - base.slices[1].left.data[i];
  }
  CHECK(testfix::max_abs_diff(noise_l, noise_r) > 1e-6);
  CHECK(testfix::max_abs_diff(noise_l, noise_l1) > 1e-6);
  double acc = 0.0;
  for (double v : noise_l.data) acc += v * v;
  const double rms = std::sqrt(acc / static_cast<double>(noise_l.data.size()));
  CHECK(rms == doctest::Approx(0.05).epsilon(0.15));
}

TEST_CASE("saturation clips rendered values into the unit interval") {
  const CameraConfig& c = cam();
  const std::string spec = R"({
    "width": 48, "height": 48,
    "texture": {"kind": "impulse_grid", "amplitude": 40.0, "spacing": 16},
    "depth": {"kind": "uniform_index", "index": 24},
    "seed": 3
  })";
  const Scene scene = scene_from_json(spec, c);
  SimOptions opts;
  opts.dual_pixel = false;
  opts.saturate = true;
  opts.psf_shape = PsfShape::Disc;
  const FocalStack stack = render_stack(scene, c, opts);
  bool clipped_somewhere = false;
  for (int k = 0; k < stack.slice_count(); k += 6) {
    for (double v : stack.green(k).data) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (v == 1.0) clipped_somewhere = true;
    }
  }
  CHECK(clipped_somewhere);
}

TEST_CASE("ground truth is the ladder index nearest the median depth") {
  const CameraConfig& c = cam();
  const std::string spec = R"({
    "width": 32, "height": 32,
    "texture": {"kind": "bandlimited_noise"},
    "depth": {"kind": "two_plane", "near_index": 20, "far_index": 30, "split": 0.55},
    "seed": 11
  })";
  const Scene scene = scene_from_json(spec, c);
  const FocalStack stack = render_stack(scene, c, SimOptions{});
  REQUIRE(stack.ground_truth_index.has_value());
  CHECK(*stack.ground_truth_index == 20);
}

TEST_CASE("focal breathing rescales every slice except the reference") {
  SimOptions plain;
  SimOptions breathing;
  breathing.focal_breathing = true;
  const Scene scene = testfix::flat_scene(48, 48, 31, 24, cam());
  const FocalStack fixed = render_stack(scene, cam(), plain);
  const FocalStack zoomed = render_stack(scene, cam(), breathing);
  CHECK(testfix::max_abs_diff(fixed.green(0), zoomed.green(0)) > 1e-6);
  const int last = fixed.slice_count() - 1;
  CHECK(testfix::max_abs_diff(fixed.green(last), zoomed.green(last)) < 1e-12);
}

TEST_CASE("scene_from_json applies defaults and rejects bad specs") {
  const CameraConfig& c = cam();
  const Scene scene = scene_from_json(R"({"seed": 9})", c);
  CHECK(scene.texture.width == 128);
  CHECK(scene.texture.height == 128);
  CHECK(scene.depth_map.width == 128);
  CHECK(scene.seed == 9u);

  const Scene a = scene_from_json(R"({"seed": 1, "width": 16, "height": 16})", c);
  const Scene b = scene_from_json(R"({"seed": 1, "width": 16, "height": 16})", c, 2);
  CHECK(b.seed == 2u);
  CHECK(testfix::max_abs_diff(a.texture, b.texture) > 1e-9);

  CHECK_THROWS_AS(scene_from_json(R"({"width": 2})", c), Error);
  CHECK_THROWS_AS(scene_from_json(R"({"texture": {"kind": "perlin"}})", c), Error);
  CHECK_THROWS_AS(scene_from_json(R"({"depth": {"kind": "uniform"}})", c), Error);
  CHECK_THROWS_AS(scene_from_json("not json", c), Error);
}

TEST_CASE("scene validation bounds depth and radiance") {
  Scene scene = testfix::flat_scene(8, 8, 2, 24, cam());
  CHECK_NOTHROW(scene.validate());
  scene.depth_map.at(0, 0) = 0.001;
  CHECK_THROWS_AS(scene.validate(), Error);
  scene.depth_map.at(0, 0) = 1.0;
  scene.texture.at(0, 0) = -0.5;
  CHECK_THROWS_AS(scene.validate(), Error);
}
