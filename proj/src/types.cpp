#include "afbench/types.hpp"

#include <cmath>

namespace afbench {

Patch::Patch(int w, int h, double fill)
    : width(w), height(h), data(static_cast<size_t>(w) * static_cast<size_t>(h), fill) {
  if (w < 0 || h < 0) {
    throw Error(ErrorKind::InvalidArgument, "patch dimensions must be non-negative");
  }
}

void Patch::validate(const std::string& what) const {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::InvalidArgument, what + ": empty patch");
  }
  if (data.size() != static_cast<size_t>(width) * static_cast<size_t>(height)) {
    throw Error(ErrorKind::InvalidArgument, what + ": data size does not match dimensions");
  }
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, what + ": non-finite value");
    }
  }
}

Patch FocalStack::green(int k) const {
  if (k < 0 || k >= slice_count()) {
    throw Error(ErrorKind::InvalidArgument, "slice index out of range");
  }
  const DualPixelPatch& s = slices[k];
  if (!dual_pixel) {
    return s.left;
  }
  Patch g(s.left.width, s.left.height);
  for (size_t i = 0; i < g.data.size(); ++i) {
    g.data[i] = s.left.data[i] + s.right.data[i];
  }
  return g;
}

void FocalStack::validate() const {
  if (slices.empty()) {
    throw Error(ErrorKind::InvalidArgument, "focal stack has no slices");
  }
  if (focus_distances_m.size() != slices.size()) {
    throw Error(ErrorKind::InvalidArgument,
                "focus distance count does not match slice count");
  }
  if (ground_truth_index &&
      (*ground_truth_index < 0 || *ground_truth_index >= slice_count())) {
    throw Error(ErrorKind::InvalidArgument, "ground truth index out of range");
  }
  const int w = slices[0].left.width;
  const int h = slices[0].left.height;
  for (size_t k = 0; k < slices.size(); ++k) {
    if (!std::isfinite(focus_distances_m[k]) || focus_distances_m[k] <= 0.0) {
      throw Error(ErrorKind::InvalidArgument, "focus distances must be positive");
    }
    if (k > 0 && focus_distances_m[k] <= focus_distances_m[k - 1]) {
      throw Error(ErrorKind::InvalidArgument,
                  "focus distances must be strictly increasing");
    }
    slices[k].left.validate("slice " + std::to_string(k));
    if (slices[k].left.width != w || slices[k].left.height != h) {
      throw Error(ErrorKind::InvalidArgument, "slice dimensions are inconsistent");
    }
    if (dual_pixel) {
      slices[k].right.validate("slice " + std::to_string(k) + " (right)");
      if (slices[k].right.width != w || slices[k].right.height != h) {
        throw Error(ErrorKind::InvalidArgument, "slice dimensions are inconsistent");
      }
    } else if (!slices[k].right.empty()) {
      throw Error(ErrorKind::InvalidArgument,
                  "green-only stack carries a right sub-image");
    }
  }
}

CameraConfig CameraConfig::defaults() {
  CameraConfig cam;
  cam.focus_distances_m =
      inverse_depth_ladder(kDefaultLadderSize, kDefaultLadderNearM, kDefaultLadderFarM);
  return cam;
}

void CameraConfig::validate() const {
  if (!(focal_length_f > 0.0) || !std::isfinite(focal_length_f)) {
    throw Error(ErrorKind::InvalidArgument, "focal length must be positive");
  }
  if (!(aperture_radius_l > 0.0) || !std::isfinite(aperture_radius_l)) {
    throw Error(ErrorKind::InvalidArgument, "aperture radius must be positive");
  }
  if (!(pixel_pitch_m > 0.0) || !std::isfinite(pixel_pitch_m)) {
    throw Error(ErrorKind::InvalidArgument, "pixel pitch must be positive");
  }
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  }
  if (focus_distances_m.empty()) {
    throw Error(ErrorKind::InvalidArgument, "focus ladder is empty");
  }
  for (double g : focus_distances_m) {
    if (!std::isfinite(g) || g <= focal_length_f) {
      throw Error(ErrorKind::InvalidArgument,
                  "focus distances must exceed the focal length");
    }
  }
  for (size_t i = 1; i < focus_distances_m.size(); ++i) {
    if (focus_distances_m[i] <= focus_distances_m[i - 1]) {
      throw Error(ErrorKind::InvalidArgument,
                  "focus ladder must be strictly increasing");
    }
  }
  if (!calibration_grid.empty()) {
    if (calibration_grid.grid_w < 2 || calibration_grid.grid_h < 2) {
      throw Error(ErrorKind::InvalidArgument, "calibration grid must be at least 2x2");
    }
    if (calibration_grid.values.size() !=
        static_cast<size_t>(calibration_grid.grid_w) * calibration_grid.grid_h) {
      throw Error(ErrorKind::InvalidArgument, "calibration grid size mismatch");
    }
  }
}

std::vector<double> inverse_depth_ladder(int n, double near_m, double far_m) {
  if (n < 1 || !(near_m > 0.0) || !(far_m > near_m)) {
    throw Error(ErrorKind::InvalidArgument, "invalid focus ladder request");
  }
  std::vector<double> ladder(n);
  if (n == 1) {
    ladder[0] = near_m;
    return ladder;
  }
  const double inv_near = 1.0 / near_m;
  const double inv_far = 1.0 / far_m;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    ladder[i] = 1.0 / (inv_near + t * (inv_far - inv_near));
  }
  ladder.front() = near_m;
  ladder.back() = far_m;
  return ladder;
}

int nearest_inverse_depth_index(const std::vector<double>& ladder, double inverse_depth) {
  if (ladder.empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty focus ladder");
  }
  if (!std::isfinite(inverse_depth)) {
    throw Error(ErrorKind::InvalidArgument, "inverse depth must be finite");
  }
  int best = 0;
  double best_err = std::abs(1.0 / ladder[0] - inverse_depth);
  for (size_t i = 1; i < ladder.size(); ++i) {
    const double err = std::abs(1.0 / ladder[i] - inverse_depth);
    if (err < best_err) {
      best_err = err;
      best = static_cast<int>(i);
    }
  }
  return best;
}

int nearest_focus_index(const std::vector<double>& ladder, double depth_m) {
  if (!(depth_m > 0.0) || !std::isfinite(depth_m)) {
    throw Error(ErrorKind::InvalidArgument, "depth must be positive");
  }
  return nearest_inverse_depth_index(ladder, 1.0 / depth_m);
}

void MetricParams::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
  }
  if (wavelet_level < 1) {
    throw Error(ErrorKind::InvalidArgument, "wavelet level must be at least 1");
  }
  if (!(gradient_threshold >= 0.0) || !std::isfinite(gradient_threshold)) {
    throw Error(ErrorKind::InvalidArgument, "gradient threshold must be non-negative");
  }
  if (!(percentile >= 0.0) || !(percentile <= 50.0)) {
    throw Error(ErrorKind::InvalidArgument, "percentile must be in [0, 50]");
  }
  if (!(ternary_epsilon >= 0.0) || !std::isfinite(ternary_epsilon)) {
    throw Error(ErrorKind::InvalidArgument, "ternary epsilon must be non-negative");
  }
}

}  // namespace afbench
