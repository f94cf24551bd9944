#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "afbench/kernels.hpp"
#include "afbench/rng.hpp"

namespace testfix {

using namespace afbench;

Patch random_patch(int w, int h, uint64_t seed) {
  Rng rng(seed);
  Patch p(w, h);
  for (double& v : p.data) {
    v = rng.uniform();
  }
  return p;
}

Patch smooth_patch(int w, int h, uint64_t seed, double feature_px) {
  Patch noise = random_patch(w, h, seed);
  for (double& v : noise.data) {
    v = 2.0 * v - 1.0;
  }
  Patch smooth = gaussian_blur(noise, feature_px);
  double mean = 0.0;
  for (double v : smooth.data) {
    mean += v;
  }
  mean /= static_cast<double>(smooth.data.size());
  double var = 0.0;
  for (double v : smooth.data) {
    var += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(var / static_cast<double>(smooth.data.size()));
  Patch out(w, h);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = std::clamp(0.5 + 0.15 * (smooth.data[i] - mean) / sd, 0.0, 1.0);
  }
  return out;
}

DualPixelPatch random_pair(int w, int h, uint64_t seed) {
  DualPixelPatch pair;
  pair.left = random_patch(w, h, seed);
  pair.right = random_patch(w, h, mix64(seed, 1));
  return pair;
}

Scene flat_scene(int w, int h, uint64_t seed, int gt_index, const CameraConfig& cam) {
  Scene scene;
  scene.texture = smooth_patch(w, h, seed);
  scene.depth_map =
      Patch(w, h, cam.focus_distances_m.at(static_cast<size_t>(gt_index)));
  scene.seed = seed;
  return scene;
}

}  // namespace testfix
