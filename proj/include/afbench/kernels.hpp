#pragma once

#include "afbench/types.hpp"

namespace afbench {

/**
 * True 2-D convolution (kernel rotated 180 degrees) with an odd-sized kernel.
 * The output has the same size as the input; positions whose kernel footprint
 * would leave the patch are set to zero, so sums over the result range over
 * fully-supported interior pixels only.
 */
Patch convolve2d(const Patch& input, const Patch& kernel);

/// Number of interior (fully-supported) positions convolve2d fills for the
/// given input/kernel sizes; zero when the kernel does not fit.
size_t convolve2d_interior_count(const Patch& input, const Patch& kernel);

/// Separable Gaussian blur, kernel truncated at 3*sigma, edges replicated.
Patch gaussian_blur(const Patch& input, double sigma);

/// Orthonormal type-II 2-D DCT coefficients of the patch.
Patch dct2(const Patch& input);

/// One level of 2-D CDF 9/7 detail bands.
struct WaveletLevel {
  Patch lh;  // low-pass in x, high-pass in y
  Patch hl;  // high-pass in x, low-pass in y
  Patch hh;  // high-pass in both
};

/**
 * Multi-level CDF 9/7 decomposition. levels[0] holds the finest detail
 * bands and levels.back() the coarsest; ll is the approximation left after
 * the last level. Band sizes follow ceil/floor halving of odd extents.
 */
struct WaveletPyramid {
  std::vector<WaveletLevel> levels;
  Patch ll;
};

/// Decompose `input` into `level` wavelet levels. Requires both extents
/// to be at least 2^level.
WaveletPyramid cdf97_decompose(const Patch& input, int level);

/// Exact inverse of cdf97_decompose.
Patch cdf97_reconstruct(const WaveletPyramid& pyramid);

}  // namespace afbench
