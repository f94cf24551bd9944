#pragma once

#include <cstdint>
#include <filesystem>

#include "afbench/stack_io.hpp"
#include "afbench/types.hpp"

namespace afbench {

enum class CostKind { L1, L2 };

/// Target distribution for ordinal regression: a delta at the true index
/// softened by exp(-coeff * cost(i, true_index)) and renormalized.
struct SoftTarget {
  std::vector<double> probs;
  int true_index = 0;
};

SoftTarget soft_target(int true_index, int n, CostKind cost = CostKind::L2,
                       double coeff = 1.0);

/// Cross-entropy between the target and softmax(logits), log-sum-exp
/// stabilized, with its gradient softmax(logits) - target.probs.
struct OrdinalLossResult {
  double loss = 0.0;
  std::vector<double> grad;
};

OrdinalLossResult ordinal_loss(const std::vector<double>& logits,
                               const SoftTarget& target);

/// Bias-corrected Adam.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(size_t param_count, double lr_ = 1e-3, double beta1_ = 0.5,
                     double beta2_ = 0.999, double epsilon_ = 1e-8)
      : m(param_count, 0.0), v(param_count, 0.0), lr(lr_), beta1(beta1_),
        beta2(beta2_), epsilon(epsilon_) {}
};

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads);

// ============================================================================
// Shallow scorer
// ============================================================================

enum class ScorerMode { FullStack, SingleSlice };

/// Per-slice feature ids used by the scorer: every contrast metric plus the
/// ncc and normalized_sad mismatches (zero on green-only stacks).
const std::vector<std::string>& scorer_feature_ids();

/// The feature vector of slice k (length scorer_feature_ids().size()).
std::vector<double> slice_features(const FocalStack& stack, int k,
                                   const MetricParams& params);

/**
 * Linear scorer over z-scored per-slice features producing n logits.
 * Input layout: one feature block per slice. In full-stack mode every block
 * is populated; in single-slice mode only observed blocks are populated
 * (the rest stay zero) and an n-length observed-index indicator block is
 * appended, so feature_dim distinguishes the two modes.
 */
struct ShallowScorer {
  std::vector<std::string> feature_ids;
  int n = 0;
  std::vector<double> mean;     // per input dimension
  std::vector<double> std_dev;  // per input dimension
  std::vector<double> weights;  // feature_dim x n, row-major over dimensions
  std::vector<double> bias;     // n

  int feature_dim() const { return static_cast<int>(mean.size()); }
  ScorerMode mode() const;
  void validate() const;

  /// Logits for a fully observed stack (full-stack mode only).
  std::vector<double> score_stack(const FocalStack& stack,
                                  const MetricParams& params) const;
  /// Logits given the observed slice indices (single-slice mode only).
  std::vector<double> score_observed(const FocalStack& stack,
                                     const std::vector<int>& observed,
                                     const MetricParams& params) const;

  int predict_stack(const FocalStack& stack, const MetricParams& params) const;
  int predict_observed(const FocalStack& stack, const std::vector<int>& observed,
                       const MetricParams& params) const;
};

struct TrainConfig {
  int steps = 2000;
  int batch = 32;
  double lr = 1e-3;
  double beta1 = 0.5;
  double beta2 = 0.999;
  CostKind cost = CostKind::L2;
  double coeff = 1.0;
  uint64_t seed = 0;
  ScorerMode mode = ScorerMode::FullStack;
};

/**
 * Train a ShallowScorer with Adam on minibatches of ordinal_loss. Features
 * are extracted once per stack (in dataset order), z-scoring statistics come
 * from the training set, and gradients accumulate in fixed batch order, so
 * a fixed config reproduces identical parameters bit-for-bit.
 */
ShallowScorer train_scorer(const StackProvider& dataset, const TrainConfig& config,
                           const MetricParams& params = MetricParams{},
                           int jobs = 1);

/// Scorer JSON: {feature_ids, mean, std, weights, bias, n}.
void save_scorer_json(const std::filesystem::path& path, const ShallowScorer& scorer);
ShallowScorer load_scorer_json(const std::filesystem::path& path);

/// Training config JSON: {steps, batch, lr, beta1, beta2, cost, coeff, seed};
/// missing fields keep their defaults. "mode" additionally selects
/// full_stack / single_slice.
TrainConfig load_train_config_json(const std::filesystem::path& path);

}  // namespace afbench
