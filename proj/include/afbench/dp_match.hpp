#pragma once

#include "afbench/types.hpp"

namespace afbench {

/// Canonical list of the 7 dual-pixel mismatch metric ids, in registry order.
const std::vector<std::string>& dp_metric_ids();

bool is_dp_metric(const std::string& id);

/**
 * Subtract the mean and divide by the population standard deviation.
 * A constant patch (std below 1e-12) returns all zeros.
 */
Patch zero_normalize(const Patch& patch);

/**
 * Mismatch between the two sub-images of a dual-pixel pair; lower = better
 * focused. All ids operate on zero-normalized inputs (census, rank and
 * ternary are invariant to that, the rest require it). ncc is the negated
 * inner product so that minimization maximizes correlation.
 */
double dp_mismatch(const std::string& id, const DualPixelPatch& pair,
                   const MetricParams& params);

/// Argmin of dp_mismatch over the stack; ties break to the lower index.
int solve_focal_stack_dp(const std::string& id, const FocalStack& stack,
                         const MetricParams& params);

}  // namespace afbench
