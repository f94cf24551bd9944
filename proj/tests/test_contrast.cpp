#include <string>
#include <vector>

#include "afbench/contrast.hpp"
#include "afbench/kernels.hpp"
#include "afbench/types.hpp"
#include "doctest.h"
#include "support/checks.hpp"
#include "support/fixtures.hpp"
#include "support/oracle_metrics.hpp"

using namespace afbench;

TEST_CASE("contrast registry exposes 24 stable ids") {
  const auto& ids = contrast_metric_ids();
  CHECK(ids.size() == 24u);
  CHECK(is_contrast_metric("tv_l2"));
  CHECK(is_contrast_metric("sum_modified_laplacian"));
  CHECK_FALSE(is_contrast_metric("ncc"));
  CHECK_FALSE(is_contrast_metric(""));
}

TEST_CASE("every contrast metric agrees with its brute-force transcription") {
  const MetricParams params;
  for (const std::string& id : contrast_metric_ids()) {
    CAPTURE(id);
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      const Patch p = testfix::random_patch(16, 16, seed * 31);
      CHECK(testfix::rel_err(contrast_score(id, p, params),
                             oracle::contrast_score(id, p, params)) < 1e-9);
    }
    const Patch smooth = testfix::smooth_patch(16, 16, 77);
    CHECK(testfix::rel_err(contrast_score(id, smooth, params),
                           oracle::contrast_score(id, smooth, params)) < 1e-9);
  }
}

TEST_CASE("contrast metrics agree on odd patch extents") {
  const MetricParams params;
  for (const std::string& id : contrast_metric_ids()) {
    CAPTURE(id);
    for (auto [w, h] : std::vector<std::pair<int, int>>{{17, 13}, {21, 9}}) {
      const Patch p = testfix::random_patch(w, h, static_cast<uint64_t>(w + h));
      CHECK(testfix::rel_err(contrast_score(id, p, params),
                             oracle::contrast_score(id, p, params)) < 1e-9);
    }
  }
}

TEST_CASE("contrast metrics agree under non-default parameters") {
  MetricParams params;
  params.sigma = 1.5;
  params.wavelet_level = 3;
  params.gradient_threshold = 0.1;
  params.percentile = 5.0;
  for (const std::string& id : contrast_metric_ids()) {
    CAPTURE(id);
    const Patch p = testfix::random_patch(24, 24, 4242);
    CHECK(testfix::rel_err(contrast_score(id, p, params),
                           oracle::contrast_score(id, p, params)) < 1e-9);
  }
}

TEST_CASE("derivative metrics vanish on a constant patch") {
  const MetricParams params;
  const Patch flat(16, 16, 0.6);
  for (const char* id :
       {"intensity_variance", "intensity_coeff_variation", "tv_l1", "tv_l2",
        "laplacian_energy", "laplacian_variance", "sum_modified_laplacian",
        "diagonal_laplacian", "mean_gradient_magnitude", "gradient_count",
        "percentile_range", "histogram_entropy", "dct_energy_ratio",
        "dct_reduced_energy_ratio", "wavelet_sum", "eigenvalue_trace"}) {
    CAPTURE(id);
    CHECK(contrast_score(id, flat, params) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("increasing blur lowers sharpness scores") {
  const MetricParams params;
  const Patch sharp = testfix::smooth_patch(32, 32, 15);
  for (const char* id : {"tv_l2", "laplacian_energy", "wavelet_sum",
                                "sum_modified_laplacian", "eigenvalue_trace"}) {
    CAPTURE(id);
    double prev = contrast_score(id, sharp, params);
    for (double sigma : {0.8, 1.6, 3.2}) {
      const double cur = contrast_score(id, gaussian_blur(sharp, sigma), params);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("unknown contrast ids are rejected") {
  const Patch p(8, 8, 0.5);
  try {
    contrast_score("variance", p, MetricParams{});
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("variance") != std::string::npos);
  }
}

TEST_CASE("the stack solver breaks score ties toward the lower index") {
  FocalStack stack;
  stack.dual_pixel = false;
  const Patch slice = testfix::smooth_patch(16, 16, 8);
  for (int k = 0; k < 3; ++k) {
    stack.slices.push_back({slice, Patch{}});
    stack.focus_distances_m.push_back(0.5 + 0.1 * k);
  }
  CHECK(solve_focal_stack_contrast("tv_l2", stack, MetricParams{}) == 0);
}

TEST_CASE("the stack solver finds the sharpest slice") {
  FocalStack stack;
  stack.dual_pixel = false;
  const Patch sharp = testfix::smooth_patch(24, 24, 21);
  for (int k = 0; k < 5; ++k) {
    const Patch slice = (k == 3) ? sharp : gaussian_blur(sharp, 0.7 + 0.5 * k);
    stack.slices.push_back({slice, Patch{}});
    stack.focus_distances_m.push_back(0.4 + 0.1 * k);
  }
  for (const char* id : {"tv_l2", "sum_modified_laplacian", "wavelet_sum"}) {
    CAPTURE(id);
    CHECK(solve_focal_stack_contrast(id, stack, MetricParams{}) == 3);
  }
}
