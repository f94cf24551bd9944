#pragma once

#include "afbench/types.hpp"

namespace afbench {

/// Canonical list of the 24 contrast metric ids, in registry order.
/// These strings are stable: the CLI and CSV reports use them verbatim.
const std::vector<std::string>& contrast_metric_ids();

bool is_contrast_metric(const std::string& id);

/**
 * Score one green-channel patch with the named sharpness measure.
 * Higher score = sharper. Derivative and stencil metrics sum over the
 * fully-supported interior; "mean" metrics divide by the number of
 * terms actually summed.
 */
double contrast_score(const std::string& id, const Patch& patch,
                      const MetricParams& params);

/// Argmax of contrast_score over the stack's green channels; ties break to
/// the lower index.
int solve_focal_stack_contrast(const std::string& id, const FocalStack& stack,
                               const MetricParams& params);

}  // namespace afbench
