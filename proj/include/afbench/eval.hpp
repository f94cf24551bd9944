#pragma once

#include <filesystem>
#include <functional>
#include <memory>

#include "afbench/learn.hpp"
#include "afbench/stack_io.hpp"
#include "afbench/types.hpp"

namespace afbench {

enum class ProtocolKind { FocalStack, SingleSlice, MultiStep };
enum class InputMode { Green, DualPixel };

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::FocalStack;
  int steps_m = 2;  // multi_step only; m = 1 degenerates to single_slice

  void validate() const;
};

std::string protocol_name(const ProtocolSpec& spec);
std::string input_mode_name(InputMode mode);

/// Aggregated index-error metrics for one (algorithm, protocol) run.
struct EvalReport {
  std::string algorithm;
  std::string protocol;
  std::string input_mode;
  double within_0 = 0.0;
  double within_1 = 0.0;
  double within_2 = 0.0;
  double within_4 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  size_t count = 0;
  size_t failures = 0;
};

/// within_k fractions, MAE and RMSE of |pred - gt| over paired lists.
EvalReport score_predictions(const std::vector<int>& preds,
                             const std::vector<int>& gts);

/**
 * A runnable focus-selection algorithm. Full-stack algorithms implement
 * solve_stack; single-slice algorithms implement solve_observed, which
 * receives every slice index observed so far (most recent last) and
 * returns the next prediction.
 */
struct Algorithm {
  std::string id;
  InputMode input_mode = InputMode::Green;
  bool full_stack = true;
  std::function<int(const FocalStack&)> solve_stack;
  std::function<int(const FocalStack&, const std::vector<int>&)> solve_observed;
};

/**
 * Resolve an algorithm id: any contrast metric id, any dual-pixel metric id,
 * "zncc_calibrated" (single-slice disparity solver), or "scorer" (requires
 * a loaded ShallowScorer). Unknown ids throw Error(InvalidArgument) listing
 * the valid names.
 */
Algorithm make_algorithm(const std::string& id, const CameraConfig& cam,
                         const MetricParams& params, int max_shift,
                         std::shared_ptr<const ShallowScorer> scorer = nullptr);

/// All ids make_algorithm accepts, for CLI validation and error messages.
std::vector<std::string> algorithm_ids();

/**
 * Run one algorithm under one protocol over a dataset. focal_stack scores
 * one prediction per stack; single_slice and multi_step score one prediction
 * per (stack, start index) cell. Algorithm errors on a cell predict the
 * start index and increment `failures`. Stacks may be processed by `jobs`
 * workers; results reduce in stack order, so output is worker-count
 * independent.
 */
EvalReport run_protocol(const Algorithm& algorithm, const ProtocolSpec& spec,
                        const StackProvider& dataset, int jobs = 1);

enum class RegistrationMode { Calibrated, GridSearch };

/**
 * Undo focal breathing before full-stack evaluation. Calibrated mode rescales
 * slice k about its center by breathing_scale(cam, g_k, g_last); grid_search
 * scans scales in [1.0, 1.06] (step 0.002) minimizing L2 distance to the
 * last-index slice. Bilinear resampling, clamped at borders.
 */
FocalStack register_stack(const FocalStack& stack, RegistrationMode mode,
                          const CameraConfig& cam);

// ============================================================================
// Reports
// ============================================================================

/// CSV schema: algorithm, protocol, input_mode, within_0, within_1, within_2,
/// within_4, mae, rmse, count, failures. Floats use fixed 6-decimal format,
/// so identical reports serialize byte-identically.
void write_report_csv(const std::filesystem::path& path,
                      const std::vector<EvalReport>& reports);
std::vector<EvalReport> read_report_csv(const std::filesystem::path& path);

enum class ReportFormat { Markdown, Csv };

/// Render rows as a ranked table: grouped by input mode, ascending RMSE
/// within each group.
std::string render_report(const std::vector<EvalReport>& reports,
                          ReportFormat format);

}  // namespace afbench
