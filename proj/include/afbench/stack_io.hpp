#pragma once

#include <filesystem>
#include <memory>

#include "afbench/types.hpp"

namespace afbench {

/// 16-bit binary (P5, maxval 65535, big-endian) PGM. Values are clipped to
/// [0,1] and quantized on write, divided by 65535 on read.
void write_pgm16(const std::filesystem::path& path, const Patch& patch);
Patch read_pgm16(const std::filesystem::path& path);

/**
 * Focal-stack directory format: `manifest.json` with
 * {n, width, height, focus_distances_m[n], dual_pixel, ground_truth_index?}
 * plus per-slice PGMs `slice_<k>_L.pgm` / `slice_<k>_R.pgm`
 * (`slice_<k>.pgm` for green-only stacks).
 */
void save_stack(const std::filesystem::path& dir, const FocalStack& stack);
FocalStack load_stack(const std::filesystem::path& dir);

/// Camera JSON: {focal_length_f, aperture_L, pixel_pitch, alpha,
/// focus_distances_m, calibration_grid?: {grid_w, grid_h, values}}.
void save_camera_json(const std::filesystem::path& path, const CameraConfig& cam);
CameraConfig load_camera_json(const std::filesystem::path& path);

/// Standalone calibration table: {grid_w, grid_h, values: row-major}.
CalibrationGrid load_calibration_json(const std::filesystem::path& path);

/// Read-only random access to an ordered collection of focal stacks.
class StackProvider {
public:
  virtual ~StackProvider() = default;
  virtual size_t size() const = 0;
  virtual FocalStack get(size_t index) const = 0;
};

/// Provider over stacks already in memory.
class MemoryStackProvider : public StackProvider {
public:
  explicit MemoryStackProvider(std::vector<FocalStack> stacks)
      : stacks_(std::move(stacks)) {}
  size_t size() const override { return stacks_.size(); }
  FocalStack get(size_t index) const override { return stacks_.at(index); }

private:
  std::vector<FocalStack> stacks_;
};

/**
 * A dataset directory: `dataset.json` listing stack subdirectories
 * ({count, stacks: [names], camera?: filename}), or a bare single-stack
 * directory containing `manifest.json`. Stacks load lazily per get().
 */
class DatasetReader : public StackProvider {
public:
  explicit DatasetReader(const std::filesystem::path& dir);
  size_t size() const override { return stack_dirs_.size(); }
  FocalStack get(size_t index) const override;

  /// Camera stored alongside the dataset, or the library defaults.
  const CameraConfig& camera() const { return camera_; }

private:
  std::vector<std::filesystem::path> stack_dirs_;
  CameraConfig camera_;
};

/// Write `dataset.json` (+ camera.json) indexing the given stack
/// subdirectory names, relative to `dir`.
void save_dataset_index(const std::filesystem::path& dir,
                        const std::vector<std::string>& stack_names,
                        const CameraConfig& cam);

}  // namespace afbench
