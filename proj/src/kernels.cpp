#include "afbench/kernels.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace afbench {

namespace {

// ----------------------------------------------------------------------------
// CDF 9/7 lifting constants. The scale factor K is the DC gain accumulated by
// the first two lifting steps; dividing the low-pass branch by it gives the
// unit-DC-gain analysis filters.
// ----------------------------------------------------------------------------
constexpr double kLiftAlpha = -1.586134342059924;
constexpr double kLiftBeta = -0.052980118572961;
constexpr double kLiftGamma = 0.882911075530934;
constexpr double kLiftDelta = 0.443506852043971;
constexpr double kScaleK = 1.230174104914001;

// Whole-sample symmetric reflection of t into [0, n-1].
int reflect_index(int t, int n) {
  if (n == 1) {
    return 0;
  }
  const int period = 2 * (n - 1);
  t = std::abs(t) % period;
  return t < n ? t : period - t;
}

// Reflection rules for the split even/odd arrays of a length-n signal,
// derived from whole-sample symmetry in the signal domain (which preserves
// sample parity, so the maps below are always well defined).
int even_ref(int j, int n) { return reflect_index(2 * j, n) / 2; }
int odd_ref(int i, int n) { return (reflect_index(2 * i + 1, n) - 1) / 2; }

// In-place forward lifting of a length-n signal split into even samples s
// (size ceil(n/2)) and odd samples d (size floor(n/2)).
void lift_forward(std::vector<double>& s, std::vector<double>& d, int n) {
  const int ns = (n + 1) / 2;
  const int nd = n / 2;
  for (int i = 0; i < nd; ++i) {
    d[i] += kLiftAlpha * (s[even_ref(i, n)] + s[even_ref(i + 1, n)]);
  }
  for (int j = 0; j < ns; ++j) {
    s[j] += kLiftBeta * (d[odd_ref(j - 1, n)] + d[odd_ref(j, n)]);
  }
  for (int i = 0; i < nd; ++i) {
    d[i] += kLiftGamma * (s[even_ref(i, n)] + s[even_ref(i + 1, n)]);
  }
  for (int j = 0; j < ns; ++j) {
    s[j] += kLiftDelta * (d[odd_ref(j - 1, n)] + d[odd_ref(j, n)]);
  }
  for (int j = 0; j < ns; ++j) {
    s[j] /= kScaleK;
  }
  for (int i = 0; i < nd; ++i) {
    d[i] *= kScaleK;
  }
}

void lift_inverse(std::vector<double>& s, std::vector<double>& d, int n) {
  const int ns = (n + 1) / 2;
  const int nd = n / 2;
  for (int j = 0; j < ns; ++j) {
    s[j] *= kScaleK;
  }
  for (int i = 0; i < nd; ++i) {
    d[i] /= kScaleK;
  }
  for (int j = 0; j < ns; ++j) {
    s[j] -= kLiftDelta * (d[odd_ref(j - 1, n)] + d[odd_ref(j, n)]);
  }
  for (int i = 0; i < nd; ++i) {
    d[i] -= kLiftGamma * (s[even_ref(i, n)] + s[even_ref(i + 1, n)]);
  }
  for (int j = 0; j < ns; ++j) {
    s[j] -= kLiftBeta * (d[odd_ref(j - 1, n)] + d[odd_ref(j, n)]);
  }
  for (int i = 0; i < nd; ++i) {
    d[i] -= kLiftAlpha * (s[even_ref(i, n)] + s[even_ref(i + 1, n)]);
  }
}

// One 2-D analysis level: rows first, then columns of each half.
void wavelet_level_forward(const Patch& in, Patch& ll, WaveletLevel& lvl) {
  const int w = in.width;
  const int h = in.height;
  const int lw = (w + 1) / 2, hw = w / 2;
  const int lh_ = (h + 1) / 2, hh_ = h / 2;

  Patch low_x(lw, h), high_x(hw, h);
  std::vector<double> s(lw), d(hw);
  for (int y = 0; y < h; ++y) {
    for (int j = 0; j < lw; ++j) s[j] = in.at(2 * j, y);
    for (int i = 0; i < hw; ++i) d[i] = in.at(2 * i + 1, y);
    lift_forward(s, d, w);
    for (int j = 0; j < lw; ++j) low_x.at(j, y) = s[j];
    for (int i = 0; i < hw; ++i) high_x.at(i, y) = d[i];
  }

  ll = Patch(lw, lh_);
  lvl.lh = Patch(lw, hh_);
  lvl.hl = Patch(hw, lh_);
  lvl.hh = Patch(hw, hh_);
  s.resize(lh_);
  d.resize(hh_);
  for (int x = 0; x < lw; ++x) {
    for (int j = 0; j < lh_; ++j) s[j] = low_x.at(x, 2 * j);
    for (int i = 0; i < hh_; ++i) d[i] = low_x.at(x, 2 * i + 1);
    lift_forward(s, d, h);
    for (int j = 0; j < lh_; ++j) ll.at(x, j) = s[j];
    for (int i = 0; i < hh_; ++i) lvl.lh.at(x, i) = d[i];
  }
  for (int x = 0; x < hw; ++x) {
    for (int j = 0; j < lh_; ++j) s[j] = high_x.at(x, 2 * j);
    for (int i = 0; i < hh_; ++i) d[i] = high_x.at(x, 2 * i + 1);
    lift_forward(s, d, h);
    for (int j = 0; j < lh_; ++j) lvl.hl.at(x, j) = s[j];
    for (int i = 0; i < hh_; ++i) lvl.hh.at(x, i) = d[i];
  }
}

// One 2-D synthesis level; inverse of wavelet_level_forward.
Patch wavelet_level_inverse(const Patch& ll, const WaveletLevel& lvl) {
  const int lw = ll.width, hw = lvl.hl.width;
  const int lh_ = ll.height, hh_ = lvl.lh.height;
  const int w = lw + hw;
  const int h = lh_ + hh_;

  Patch low_x(lw, h), high_x(hw, h);
  std::vector<double> s(lh_), d(hh_);
  for (int x = 0; x < lw; ++x) {
    for (int j = 0; j < lh_; ++j) s[j] = ll.at(x, j);
    for (int i = 0; i < hh_; ++i) d[i] = lvl.lh.at(x, i);
    lift_inverse(s, d, h);
    for (int j = 0; j < lh_; ++j) low_x.at(x, 2 * j) = s[j];
    for (int i = 0; i < hh_; ++i) low_x.at(x, 2 * i + 1) = d[i];
  }
  for (int x = 0; x < hw; ++x) {
    for (int j = 0; j < lh_; ++j) s[j] = lvl.hl.at(x, j);
    for (int i = 0; i < hh_; ++i) d[i] = lvl.hh.at(x, i);
    lift_inverse(s, d, h);
    for (int j = 0; j < lh_; ++j) high_x.at(x, 2 * j) = s[j];
    for (int i = 0; i < hh_; ++i) high_x.at(x, 2 * i + 1) = d[i];
  }

  Patch out(w, h);
  s.resize(lw);
  d.resize(hw);
  for (int y = 0; y < h; ++y) {
    for (int j = 0; j < lw; ++j) s[j] = low_x.at(j, y);
    for (int i = 0; i < hw; ++i) d[i] = high_x.at(i, y);
    lift_inverse(s, d, w);
    for (int j = 0; j < lw; ++j) out.at(2 * j, y) = s[j];
    for (int i = 0; i < hw; ++i) out.at(2 * i + 1, y) = d[i];
  }
  return out;
}

// Cached orthonormal DCT-II basis for length n: table[u * n + x] holds
// a(u) * cos(pi * (2x + 1) * u / (2n)).
const std::vector<double>& dct_table(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& entry = cache[n];
  if (!entry) {
    entry = std::make_unique<std::vector<double>>(static_cast<size_t>(n) * n);
    const double pi = std::acos(-1.0);
    for (int u = 0; u < n; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
      for (int x = 0; x < n; ++x) {
        (*entry)[static_cast<size_t>(u) * n + x] =
            a * std::cos(pi * (2.0 * x + 1.0) * u / (2.0 * n));
      }
    }
  }
  return *entry;
}

}  // namespace

Patch convolve2d(const Patch& input, const Patch& kernel) {
  input.validate("convolve2d input");
  if (kernel.width <= 0 || kernel.height <= 0 ||
      kernel.data.size() != static_cast<size_t>(kernel.width) * kernel.height) {
    throw Error(ErrorKind::InvalidArgument, "convolve2d: malformed kernel");
  }
  if (kernel.width % 2 == 0 || kernel.height % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "convolve2d: kernel extents must be odd");
  }
  if (kernel.width > input.width || kernel.height > input.height) {
    throw Error(ErrorKind::InvalidArgument, "convolve2d: kernel larger than patch");
  }
  const int cx = kernel.width / 2;
  const int cy = kernel.height / 2;
  Patch out(input.width, input.height, 0.0);
  for (int y = cy; y < input.height - cy; ++y) {
    for (int x = cx; x < input.width - cx; ++x) {
      double acc = 0.0;
      for (int j = 0; j < kernel.height; ++j) {
        for (int i = 0; i < kernel.width; ++i) {
          acc += kernel.at(i, j) * input.at(x - (i - cx), y - (j - cy));
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

size_t convolve2d_interior_count(const Patch& input, const Patch& kernel) {
  const int nx = input.width - kernel.width + 1;
  const int ny = input.height - kernel.height + 1;
  if (nx <= 0 || ny <= 0) {
    return 0;
  }
  return static_cast<size_t>(nx) * static_cast<size_t>(ny);
}

Patch gaussian_blur(const Patch& input, double sigma) {
  input.validate("gaussian_blur input");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorKind::InvalidArgument, "gaussian_blur: sigma must be positive");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> weights(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    weights[k + radius] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    sum += weights[k + radius];
  }
  for (double& w : weights) {
    w /= sum;
  }

  const int w = input.width;
  const int h = input.height;
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

  Patch tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += weights[k + radius] * input.at(clampi(x + k, w - 1), y);
      }
      tmp.at(x, y) = acc;
    }
  }
  Patch out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += weights[k + radius] * tmp.at(x, clampi(y + k, h - 1));
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

Patch dct2(const Patch& input) {
  input.validate("dct2 input");
  const int w = input.width;
  const int h = input.height;
  const std::vector<double>& tw = dct_table(w);
  const std::vector<double>& th = dct_table(h);

  Patch rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int x = 0; x < w; ++x) {
        acc += tw[static_cast<size_t>(u) * w + x] * input.at(x, y);
      }
      rows.at(u, y) = acc;
    }
  }
  Patch out(w, h);
  for (int u = 0; u < w; ++u) {
    for (int v = 0; v < h; ++v) {
      double acc = 0.0;
      for (int y = 0; y < h; ++y) {
        acc += th[static_cast<size_t>(v) * h + y] * rows.at(u, y);
      }
      out.at(u, v) = acc;
    }
  }
  return out;
}

WaveletPyramid cdf97_decompose(const Patch& input, int level) {
  input.validate("cdf97 input");
  if (level < 1) {
    throw Error(ErrorKind::InvalidArgument, "cdf97: level must be at least 1");
  }
  const int min_extent = 1 << level;
  if (input.width < min_extent || input.height < min_extent) {
    throw Error(ErrorKind::InvalidArgument,
                "cdf97: patch too small for requested level");
  }
  WaveletPyramid pyr;
  Patch current = input;
  for (int l = 0; l < level; ++l) {
    WaveletLevel lvl;
    Patch ll;
    wavelet_level_forward(current, ll, lvl);
    pyr.levels.push_back(std::move(lvl));
    current = std::move(ll);
  }
  pyr.ll = std::move(current);
  return pyr;
}

Patch cdf97_reconstruct(const WaveletPyramid& pyramid) {
  if (pyramid.levels.empty()) {
    throw Error(ErrorKind::InvalidArgument, "cdf97: empty pyramid");
  }
  Patch current = pyramid.ll;
  for (auto it = pyramid.levels.rbegin(); it != pyramid.levels.rend(); ++it) {
    current = wavelet_level_inverse(current, *it);
  }
  return current;
}

}  // namespace afbench
