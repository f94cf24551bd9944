#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace afbench {

// ============================================================================
// Errors
// ============================================================================

enum class ErrorKind {
  InvalidArgument,  // bad parameters, malformed requests, contract violations
  Io,               // filesystem and parsing failures
  Data,             // inputs that are well-formed but unusable (e.g. textureless)
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

// ============================================================================
// Image planes
// ============================================================================

/**
 * Row-major 2-D plane of doubles. Image content is nominally in [0, 1];
 * the same container also carries kernels and transform coefficients,
 * which are unconstrained.
 */
struct Patch {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Patch() = default;
  Patch(int w, int h, double fill = 0.0);

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  bool empty() const { return data.empty(); }
  size_t size() const { return data.size(); }

  /// Throws Error(InvalidArgument) on dimension mismatches or non-finite values.
  void validate(const std::string& what) const;
};

/// Left/right photodiode sub-images of one dual-pixel capture.
struct DualPixelPatch {
  Patch left;
  Patch right;
};

/**
 * A focal stack: one (dual-pixel or green-only) patch per focus position.
 * Green-only stacks keep their single plane in `left` and leave `right` empty.
 */
struct FocalStack {
  std::vector<DualPixelPatch> slices;
  std::vector<double> focus_distances_m;
  std::optional<int> ground_truth_index;
  bool dual_pixel = true;

  int slice_count() const { return static_cast<int>(slices.size()); }

  /// Combined green channel of slice k: left + right for dual-pixel stacks,
  /// the stored plane itself otherwise.
  Patch green(int k) const;

  void validate() const;
};

// ============================================================================
// Camera model
// ============================================================================

/// Spatial grid of disparity-to-inverse-depth conversion factors, bilinearly
/// interpolated over the patch area. Empty grid means "use the analytic model".
struct CalibrationGrid {
  int grid_w = 0;
  int grid_h = 0;
  std::vector<double> values;  // row-major, grid_w * grid_h

  bool empty() const { return values.empty(); }
};

/**
 * Thin-lens camera description shared by the simulator and the solvers.
 * Distances are in meters; `alpha` is the dimensionless gain between
 * defocus blur size and dual-pixel disparity.
 */
struct CameraConfig {
  double focal_length_f = 4.5e-3;
  double aperture_radius_l = 5.0e-4;
  double pixel_pitch_m = 2.4e-6;
  double alpha = 0.85;
  std::vector<double> focus_distances_m;  // focus ladder, nearest first
  CalibrationGrid calibration_grid;

  /// Default camera: the ladder below plus the member defaults above.
  static CameraConfig defaults();

  void validate() const;
};

/// n focus distances uniform in inverse depth between near_m and far_m,
/// ordered nearest first.
std::vector<double> inverse_depth_ladder(int n, double near_m, double far_m);

/// Index of the ladder entry whose inverse depth is closest to 1/depth_m
/// (ties resolve to the lower index).
int nearest_focus_index(const std::vector<double>& ladder, double depth_m);

/// Same nearest-entry search in inverse-depth space; accepts any finite value,
/// including non-physical negatives produced by disparity extrapolation.
int nearest_inverse_depth_index(const std::vector<double>& ladder, double inverse_depth);

constexpr int kDefaultLadderSize = 49;
constexpr double kDefaultLadderNearM = 0.102;
constexpr double kDefaultLadderFarM = 3.91;

// ============================================================================
// Metric parameters
// ============================================================================

/// Knobs shared by the contrast and dual-pixel metrics.
struct MetricParams {
  double sigma = 2.0;              // Gaussian blur scale for local-contrast metrics
  int wavelet_level = 2;           // decomposition depth for wavelet metrics
  double gradient_threshold = 0.04;  // |gradient| cut-off for gradient_count
  double percentile = 1.0;         // percentile_range uses [p, 100-p]
  double ternary_epsilon = 0.1;    // dead zone for ternary census digits

  void validate() const;
};

}  // namespace afbench
