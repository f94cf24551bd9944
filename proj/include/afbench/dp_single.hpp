#pragma once

#include "afbench/types.hpp"

namespace afbench {

/// Result of integer-shift correlation search plus quadratic refinement.
struct DisparityEstimate {
  double d = 0.0;                   // signed disparity in pixels
  std::vector<double> peak_scores;  // correlation at each integer shift,
                                    // index i holds shift i - max_shift
  double subpixel_offset = 0.0;     // in (-0.5, 0.5); 0 at boundary peaks
};

/**
 * Disparity between the left and right sub-images: correlation of the
 * per-shift overlap regions (each re-standardized) for integer shifts in
 * [-max_shift, max_shift], then quadratic vertex refinement when the best
 * shift is interior. Throws Error(Data, "textureless patch") when either
 * input is constant.
 */
DisparityEstimate zncc_disparity(const DualPixelPatch& pair, int max_shift);

/// Bilinear interpolation of the calibration grid at normalized (x, y).
double lookup_C(const CalibrationGrid& grid, double x, double y);

/// Analytic disparity-to-inverse-depth gain for focus distance g:
/// alpha * L * f / ((1 - f/g) * pixel_pitch), the self-consistent value
/// for synthetic data when no measured grid is available.
double analytic_C(const CameraConfig& cam, double g);

/**
 * One-shot depth-from-disparity prediction: estimate d on the current
 * slice k, convert via 1/z* = 1/z - d/C, and return the ladder index
 * closest to 1/z*. C comes from the camera's calibration grid when
 * present (queried at patch_center), else from analytic_C.
 */
int solve_single_slice_dp(const DualPixelPatch& pair, int k,
                          const CameraConfig& cam, int max_shift = 8,
                          double patch_center_x = 0.5,
                          double patch_center_y = 0.5);

/// Two depth hypotheses from a green-channel blur estimate; the sign of the
/// defocus cannot be recovered without dual-pixel data, so both roots of the
/// blur equation are reported.
struct BlurMatchCandidates {
  int index_near = 0;        // root on the near (larger 1/Z) side
  int index_far = 0;         // root on the far side
  bool near_in_range = false;  // root's inverse depth lies within the ladder
  bool far_in_range = false;
  double blur_radius_px = 0.0;  // the matched blur radius estimate
};

/**
 * Estimate the blur radius of `patch` by matching against Gaussian-blurred
 * copies of the sharp reference texture, then invert the thin-lens blur
 * equation around the current focus distance. Both candidate inverse depths
 * are symmetric about 1/g; out-of-ladder roots are clamped and flagged.
 */
BlurMatchCandidates blur_match_candidates(const Patch& patch, int k,
                                          const Patch& reference,
                                          const CameraConfig& cam);

/// Single-prediction wrapper over blur_match_candidates: prefers the near
/// root, falling back to the far root when only that one is in range.
int blur_match_predict(const Patch& patch, int k, const Patch& reference,
                       const CameraConfig& cam);

}  // namespace afbench
