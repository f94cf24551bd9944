#pragma once

#include <cstdint>

#include "afbench/sim.hpp"
#include "afbench/types.hpp"

// Seeded inputs shared across the test binaries.
namespace testfix {

// Uniform values in [0, 1).
afbench::Patch random_patch(int w, int h, uint64_t seed);

// Band-limited texture in roughly [0.2, 0.8]; has spatial structure at a few
// pixel scale so blur and disparity visibly change it.
afbench::Patch smooth_patch(int w, int h, uint64_t seed, double feature_px = 2.0);

// Independent uniform left/right sub-images.
afbench::DualPixelPatch random_pair(int w, int h, uint64_t seed);

// A uniform-depth scene focused at ladder index gt_index.
afbench::Scene flat_scene(int w, int h, uint64_t seed, int gt_index,
                          const afbench::CameraConfig& cam);

}  // namespace testfix
