#pragma once

#include <string>

#include "afbench/types.hpp"

// Independent brute-force evaluations of every contrast and dual-pixel
// metric, transcribed directly from the printed formulas with no code shared
// with the library implementations. Deliberately naive: direct quadruple-loop
// DCT, full 2-D Gaussian kernels, tap-by-tap wavelet filter banks. Used only
// to cross-check the optimized kernels.
namespace oracle {

double contrast_score(const std::string& id, const afbench::Patch& patch,
                      const afbench::MetricParams& params);

double dp_mismatch(const std::string& id, const afbench::DualPixelPatch& pair,
                   const afbench::MetricParams& params);

afbench::Patch zero_normalize(const afbench::Patch& patch);

// Exposed pieces reused by unit tests to validate the shared kernels on
// their own (not just through the metrics).
afbench::Patch dct2(const afbench::Patch& patch);

struct WaveletBands {
  afbench::Patch ll, lh, hl, hh;
};

// Level-l subbands via the published 9/7 analysis taps and whole-sample
// symmetric extension.
WaveletBands cdf97_bands(const afbench::Patch& patch, int level);

}  // namespace oracle
