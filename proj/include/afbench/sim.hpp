#pragma once

#include <cstdint>

#include "afbench/types.hpp"

namespace afbench {

/// Parametric scene: in-focus radiance (may exceed 1 before saturation
/// clipping) plus a per-pixel depth map in meters.
struct Scene {
  Patch texture;
  Patch depth_map;
  uint64_t seed = 0;

  void validate() const;
};

enum class PsfShape { Gaussian, Disc, Hexagon };

struct SimOptions {
  PsfShape psf_shape = PsfShape::Gaussian;
  double noise_sigma = 0.0;      // additive Gaussian read noise, intensity units
  bool focal_breathing = false;  // zoom slice content per focus distance
  bool saturate = false;         // clip to [0,1] after blur and noise
  bool dual_pixel = true;        // false renders green-channel-only stacks
};

/// Defocus blur radius in pixels for a point at depth Z with focus at g:
/// (L*f / (1 - f/g)) * |1/g - 1/Z| / pixel_pitch.
double blur_radius(const CameraConfig& cam, double g, double Z);

/// Signed dual-pixel disparity in pixels:
/// alpha * (L*f / (1 - f/g)) * (1/g - 1/Z) / pixel_pitch.
/// Positive when the point is behind the focus plane.
double dp_disparity_true(const CameraConfig& cam, double g, double Z);

/// Field-of-view magnification of focusing at g relative to g_ref:
/// g_o(g) / g_o(g_ref) with the lens-to-sensor distance g_o = f*g/(g-f).
double breathing_scale(const CameraConfig& cam, double g, double g_ref);

/**
 * Render one focal stack over the camera's focus ladder. Each slice applies
 * the per-pixel defocus PSF to the texture (left/right use the two vertical
 * halves of the PSF, displaced by +-disparity/2), optionally scaled for
 * focal breathing, plus seeded read noise; saturation clips last.
 * ground_truth_index = ladder entry nearest in inverse depth to the median
 * scene depth.
 */
FocalStack render_stack(const Scene& scene, const CameraConfig& cam,
                        const SimOptions& opts);

/**
 * Build a procedural scene from a JSON spec:
 *   {"width": W, "height": H,
 *    "texture": {"kind": "bandlimited_noise"|"step_edges"|"impulse_grid"|"mixed", ...},
 *    "depth": {"kind": "uniform"|"uniform_index"|"uniform_random"|"two_plane", ...},
 *    "seed": S}
 * `seed` (overridable by the caller) drives texture noise, random depth
 * draws, and the renderer's noise streams.
 */
Scene scene_from_json(const std::string& json_text, const CameraConfig& cam,
                      std::optional<uint64_t> seed_override = std::nullopt);

/// scene_from_json on the contents of a file.
Scene scene_from_file(const std::string& path, const CameraConfig& cam,
                      std::optional<uint64_t> seed_override = std::nullopt);

}  // namespace afbench
