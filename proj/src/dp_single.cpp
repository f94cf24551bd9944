#include "afbench/dp_single.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "afbench/kernels.hpp"

namespace afbench {

namespace {

constexpr double kStdFloor = 1e-12;

struct CropStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

CropStats column_range_stats(const Patch& p, int x0, int x1) {
  CropStats st;
  const int cols = x1 - x0 + 1;
  const size_t n = static_cast<size_t>(cols) * static_cast<size_t>(p.height);
  double sum = 0.0;
  for (int y = 0; y < p.height; ++y) {
    for (int x = x0; x <= x1; ++x) {
      sum += p.at(x, y);
    }
  }
  st.mean = sum / static_cast<double>(n);
  double var = 0.0;
  for (int y = 0; y < p.height; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double d = p.at(x, y) - st.mean;
      var += d * d;
    }
  }
  st.std_dev = std::sqrt(var / static_cast<double>(n));
  return st;
}

double patch_std(const Patch& p) {
  return column_range_stats(p, 0, p.width - 1).std_dev;
}

double quadratic_vertex_offset(double before, double peak, double after) {
  const double denom = before - 2.0 * peak + after;
  if (denom == 0.0) {
    return 0.0;
  }
  double off = 0.5 * (before - after) / denom;
  return std::clamp(off, -0.5 + 1e-9, 0.5 - 1e-9);
}

}  // namespace

DisparityEstimate zncc_disparity(const DualPixelPatch& pair, int max_shift) {
  pair.left.validate("left");
  pair.right.validate("right");
  if (pair.left.width != pair.right.width || pair.left.height != pair.right.height) {
    throw Error(ErrorKind::InvalidArgument, "sub-image dimensions differ");
  }
  if (max_shift < 1) {
    throw Error(ErrorKind::InvalidArgument, "max shift must be at least 1");
  }
  const int w = pair.left.width;
  const int h = pair.left.height;
  if (w <= 2 * max_shift) {
    throw Error(ErrorKind::InvalidArgument,
                "patch too narrow for the requested shift range");
  }
  if (patch_std(pair.left) < kStdFloor || patch_std(pair.right) < kStdFloor) {
    throw Error(ErrorKind::Data, "textureless patch");
  }

  DisparityEstimate est;
  est.peak_scores.resize(static_cast<size_t>(2 * max_shift + 1));
  for (int delta = -max_shift; delta <= max_shift; ++delta) {
    const int x0 = std::max(0, -delta);
    const int x1 = std::min(w - 1, w - 1 - delta);
    const CropStats ls = column_range_stats(pair.left, x0, x1);
    const CropStats rs = column_range_stats(pair.right, x0 + delta, x1 + delta);
    double score = -2.0;
    if (ls.std_dev >= kStdFloor && rs.std_dev >= kStdFloor) {
      const size_t n = static_cast<size_t>(x1 - x0 + 1) * static_cast<size_t>(h);
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = x0; x <= x1; ++x) {
          acc += (pair.left.at(x, y) - ls.mean) * (pair.right.at(x + delta, y) - rs.mean);
        }
      }
      score = acc / (static_cast<double>(n) * ls.std_dev * rs.std_dev);
    }
    est.peak_scores[static_cast<size_t>(delta + max_shift)] = score;
  }

  int best = 0;
  for (int i = 1; i < 2 * max_shift + 1; ++i) {
    if (est.peak_scores[static_cast<size_t>(i)] >
        est.peak_scores[static_cast<size_t>(best)]) {
      best = i;
    }
  }
  if (best > 0 && best < 2 * max_shift) {
    est.subpixel_offset = quadratic_vertex_offset(
        est.peak_scores[static_cast<size_t>(best - 1)],
        est.peak_scores[static_cast<size_t>(best)],
        est.peak_scores[static_cast<size_t>(best + 1)]);
  }
  est.d = static_cast<double>(best - max_shift) + est.subpixel_offset;
  return est;
}

double lookup_C(const CalibrationGrid& grid, double x, double y) {
  if (grid.empty()) {
    throw Error(ErrorKind::InvalidArgument, "calibration grid is empty");
  }
  if (grid.grid_w < 2 || grid.grid_h < 2 ||
      grid.values.size() !=
          static_cast<size_t>(grid.grid_w) * static_cast<size_t>(grid.grid_h)) {
    throw Error(ErrorKind::InvalidArgument, "malformed calibration grid");
  }
  if (!(x >= 0.0) || !(x <= 1.0) || !(y >= 0.0) || !(y <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "calibration query outside [0, 1]");
  }
  const double fx = x * (grid.grid_w - 1);
  const double fy = y * (grid.grid_h - 1);
  const int ix = std::min(static_cast<int>(fx), grid.grid_w - 2);
  const int iy = std::min(static_cast<int>(fy), grid.grid_h - 2);
  const double tx = fx - ix;
  const double ty = fy - iy;
  auto at = [&](int i, int j) {
    return grid.values[static_cast<size_t>(j) * grid.grid_w + i];
  };
  return (1.0 - tx) * (1.0 - ty) * at(ix, iy) + tx * (1.0 - ty) * at(ix + 1, iy) +
         (1.0 - tx) * ty * at(ix, iy + 1) + tx * ty * at(ix + 1, iy + 1);
}

double analytic_C(const CameraConfig& cam, double g) {
  if (!(g > cam.focal_length_f)) {
    throw Error(ErrorKind::InvalidArgument, "focus distance inside focal length");
  }
  return cam.alpha * cam.aperture_radius_l * cam.focal_length_f /
         ((1.0 - cam.focal_length_f / g) * cam.pixel_pitch_m);
}

int solve_single_slice_dp(const DualPixelPatch& pair, int k, const CameraConfig& cam,
                          int max_shift, double patch_center_x, double patch_center_y) {
  cam.validate();
  if (k < 0 || k >= static_cast<int>(cam.focus_distances_m.size())) {
    throw Error(ErrorKind::InvalidArgument, "slice index out of range");
  }
  const double g = cam.focus_distances_m[static_cast<size_t>(k)];
  const double c = cam.calibration_grid.empty()
                       ? analytic_C(cam, g)
                       : lookup_C(cam.calibration_grid, patch_center_x, patch_center_y);
  const DisparityEstimate est = zncc_disparity(pair, max_shift);
  const double inv_zstar = 1.0 / g - est.d / c;
  return nearest_inverse_depth_index(cam.focus_distances_m, inv_zstar);
}

BlurMatchCandidates blur_match_candidates(const Patch& patch, int k,
                                          const Patch& reference,
                                          const CameraConfig& cam) {
  patch.validate("patch");
  reference.validate("reference");
  cam.validate();
  if (patch.width != reference.width || patch.height != reference.height) {
    throw Error(ErrorKind::InvalidArgument, "patch and reference dimensions differ");
  }
  if (k < 0 || k >= static_cast<int>(cam.focus_distances_m.size())) {
    throw Error(ErrorKind::InvalidArgument, "slice index out of range");
  }
  if (patch_std(reference) < kStdFloor) {
    throw Error(ErrorKind::Data, "textureless reference");
  }
  if (patch_std(patch) < kStdFloor) {
    throw Error(ErrorKind::Data, "textureless patch");
  }

  constexpr double kStep = 0.25;
  constexpr int kSteps = 64;
  std::vector<double> cost(kSteps + 1);
  for (int i = 0; i <= kSteps; ++i) {
    const double r = kStep * i;
    const Patch blurred = (i == 0) ? reference : gaussian_blur(reference, 0.5 * r);
    double sse = 0.0;
    for (size_t j = 0; j < patch.data.size(); ++j) {
      const double d = patch.data[j] - blurred.data[j];
      sse += d * d;
    }
    cost[static_cast<size_t>(i)] = sse;
  }
  int best = 0;
  for (int i = 1; i <= kSteps; ++i) {
    if (cost[static_cast<size_t>(i)] < cost[static_cast<size_t>(best)]) {
      best = i;
    }
  }
  double radius = kStep * best;
  if (best > 0 && best < kSteps) {
    radius += kStep * quadratic_vertex_offset(-cost[static_cast<size_t>(best - 1)],
                                              -cost[static_cast<size_t>(best)],
                                              -cost[static_cast<size_t>(best + 1)]);
  }

  const double g = cam.focus_distances_m[static_cast<size_t>(k)];
  const double offset = radius * cam.pixel_pitch_m * (1.0 - cam.focal_length_f / g) /
                        (cam.aperture_radius_l * cam.focal_length_f);
  const double inv_near = 1.0 / g + offset;
  const double inv_far = 1.0 / g - offset;
  const double inv_hi = 1.0 / cam.focus_distances_m.front();
  const double inv_lo = 1.0 / cam.focus_distances_m.back();
  const double tol = 1e-9 * inv_hi;

  BlurMatchCandidates out;
  out.blur_radius_px = radius;
  out.index_near = nearest_inverse_depth_index(cam.focus_distances_m, inv_near);
  out.index_far = nearest_inverse_depth_index(cam.focus_distances_m, inv_far);
  out.near_in_range = inv_near >= inv_lo - tol && inv_near <= inv_hi + tol;
  out.far_in_range = inv_far >= inv_lo - tol && inv_far <= inv_hi + tol;
  return out;
}

int blur_match_predict(const Patch& patch, int k, const Patch& reference,
                       const CameraConfig& cam) {
  const BlurMatchCandidates c = blur_match_candidates(patch, k, reference, cam);
  if (!c.near_in_range && c.far_in_range) {
    return c.index_far;
  }
  return c.index_near;
}

}  // namespace afbench
