#include "afbench/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "afbench/kernels.hpp"

namespace afbench {

namespace {

Patch make_kernel(int w, int h, std::initializer_list<double> values) {
  Patch k(w, h);
  std::copy(values.begin(), values.end(), k.data.begin());
  return k;
}

const Patch& laplace_kernel() {
  static const Patch k = make_kernel(3, 3, {0, 1, 0, 1, -4, 1, 0, 1, 0});
  return k;
}

const Patch& sobel_x_kernel() {
  static const Patch k = make_kernel(3, 3, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
  return k;
}

const Patch& sobel_y_kernel() {
  static const Patch k = make_kernel(3, 3, {-1, -2, -1, 0, 0, 0, 1, 2, 1});
  return k;
}

// Interior (fully-supported) responses of convolve2d output for a kernel of
// extents kw x khodd.
std::vector<double> interior_of(const Patch& conv, int kw, int kh) {
  const int cx = kw / 2, cy = kh / 2;
  std::vector<double> out;
  out.reserve(static_cast<size_t>(std::max(conv.width - kw + 1, 0)) *
              static_cast<size_t>(std::max(conv.height - kh + 1, 0)));
  for (int y = cy; y < conv.height - cy; ++y) {
    for (int x = cx; x < conv.width - cx; ++x) {
      out.push_back(conv.at(x, y));
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double population_variance(const std::vector<double>& v) {
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size());
}

// Absolute responses of the two 1-D modified-Laplacian stencils, each summed
// over its own fully-supported range.
double modified_laplacian_sum(const Patch& p) {
  static const Patch row = make_kernel(3, 1, {-1, 2, -1});
  static const Patch col = make_kernel(1, 3, {-1, 2, -1});
  const Patch rx = convolve2d(p, row);
  const Patch ry = convolve2d(p, col);
  double acc = 0.0;
  for (int y = 0; y < p.height; ++y) {
    for (int x = 1; x < p.width - 1; ++x) {
      acc += std::abs(rx.at(x, y));
    }
  }
  for (int y = 1; y < p.height - 1; ++y) {
    for (int x = 0; x < p.width; ++x) {
      acc += std::abs(ry.at(x, y));
    }
  }
  return acc;
}

double percentile_linear(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double rank = p / 100.0 * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct GradientMaps {
  std::vector<double> gx;
  std::vector<double> gy;
};

GradientMaps sobel_interior(const Patch& p) {
  GradientMaps g;
  g.gx = interior_of(convolve2d(p, sobel_x_kernel()), 3, 3);
  g.gy = interior_of(convolve2d(p, sobel_y_kernel()), 3, 3);
  return g;
}

double metric_intensity_variance(const Patch& p, const MetricParams&) {
  return population_variance(p.data);
}

double metric_intensity_coeff_variation(const Patch& p, const MetricParams&) {
  const double mu = mean_of(p.data);
  if (mu == 0.0) {
    return 0.0;
  }
  return std::sqrt(population_variance(p.data)) / mu;
}

double total_variation(const Patch& p, bool squared) {
  double acc = 0.0;
  for (int y = 0; y < p.height; ++y) {
    const double* row = &p.data[static_cast<size_t>(y) * p.width];
    for (int x = 0; x + 1 < p.width; ++x) {
      const double d = row[x] - row[x + 1];
      acc += squared ? d * d : std::abs(d);
    }
  }
  for (int y = 0; y + 1 < p.height; ++y) {
    const double* row = &p.data[static_cast<size_t>(y) * p.width];
    const double* next = row + p.width;
    for (int x = 0; x < p.width; ++x) {
      const double d = row[x] - next[x];
      acc += squared ? d * d : std::abs(d);
    }
  }
  return acc;
}

double metric_tv_l1(const Patch& p, const MetricParams&) {
  return total_variation(p, false);
}

double metric_tv_l2(const Patch& p, const MetricParams&) {
  return total_variation(p, true);
}

double metric_laplacian_energy(const Patch& p, const MetricParams&) {
  double acc = 0.0;
  for (double r : interior_of(convolve2d(p, laplace_kernel()), 3, 3)) {
    acc += r * r;
  }
  return acc;
}

double metric_laplacian_variance(const Patch& p, const MetricParams&) {
  return population_variance(interior_of(convolve2d(p, laplace_kernel()), 3, 3));
}

double metric_sum_modified_laplacian(const Patch& p, const MetricParams&) {
  return modified_laplacian_sum(p);
}

double metric_diagonal_laplacian(const Patch& p, const MetricParams&) {
  const double c = 1.0 / std::sqrt(2.0);
  static const Patch anti = make_kernel(3, 3, {0, 0, c, 0, -2 * c, 0, c, 0, 0});
  static const Patch main = make_kernel(3, 3, {c, 0, 0, 0, -2 * c, 0, 0, 0, c});
  double acc = modified_laplacian_sum(p);
  for (double r : interior_of(convolve2d(p, anti), 3, 3)) acc += std::abs(r);
  for (double r : interior_of(convolve2d(p, main), 3, 3)) acc += std::abs(r);
  return acc;
}

double metric_mean_gradient_magnitude(const Patch& p, const MetricParams&) {
  const GradientMaps g = sobel_interior(p);
  double acc = 0.0;
  for (size_t i = 0; i < g.gx.size(); ++i) {
    acc += std::hypot(g.gx[i], g.gy[i]);
  }
  return acc / static_cast<double>(g.gx.size());
}

double metric_gradient_count(const Patch& p, const MetricParams& params) {
  const GradientMaps g = sobel_interior(p);
  double acc = 0.0;
  for (size_t i = 0; i < g.gx.size(); ++i) {
    acc += (std::abs(g.gx[i]) > params.gradient_threshold ? 1.0 : 0.0) +
           (std::abs(g.gy[i]) > params.gradient_threshold ? 1.0 : 0.0);
  }
  return acc / static_cast<double>(g.gx.size());
}

double metric_gradient_magnitude_variance(const Patch& p, const MetricParams&) {
  const GradientMaps g = sobel_interior(p);
  std::vector<double> mag(g.gx.size());
  for (size_t i = 0; i < g.gx.size(); ++i) {
    mag[i] = std::hypot(g.gx[i], g.gy[i]);
  }
  return population_variance(mag);
}

double metric_percentile_range(const Patch& p, const MetricParams& params) {
  return percentile_linear(p.data, 100.0 - params.percentile) -
         percentile_linear(p.data, params.percentile);
}

double metric_histogram_entropy(const Patch& p, const MetricParams&) {
  std::vector<size_t> hist(256, 0);
  for (double v : p.data) {
    int bin = static_cast<int>(std::floor(v * 256.0));
    bin = std::clamp(bin, 0, 255);
    hist[bin] += 1;
  }
  const double n = static_cast<double>(p.data.size());
  double acc = 0.0;
  for (size_t c : hist) {
    if (c > 0) {
      const double prob = static_cast<double>(c) / n;
      acc -= prob * std::log(prob);
    }
  }
  return acc;
}

double metric_dct_energy_ratio(const Patch& p, const MetricParams&) {
  const Patch d = dct2(p);
  const double dc2 = d.at(0, 0) * d.at(0, 0);
  if (dc2 == 0.0) {
    return 0.0;
  }
  double total = 0.0;
  for (double v : d.data) total += v * v;
  return (total - dc2) / dc2;
}

double metric_dct_reduced_energy_ratio(const Patch& p, const MetricParams&) {
  if (p.width < 3 || p.height < 3) {
    throw Error(ErrorKind::InvalidArgument,
                "dct_reduced_energy_ratio needs a patch of at least 3x3");
  }
  const Patch d = dct2(p);
  const double dc2 = d.at(0, 0) * d.at(0, 0);
  if (dc2 == 0.0) {
    return 0.0;
  }
  return (d.at(0, 1) * d.at(0, 1) + d.at(1, 0) * d.at(1, 0) +
          d.at(0, 2) * d.at(0, 2) + d.at(1, 1) * d.at(1, 1) +
          d.at(2, 0) * d.at(2, 0)) /
         dc2;
}

// 4x4 checkerboard response summed over all fully-supported positions.
// The kernel is even-sized (and centrally symmetric), so it gets its own
// valid-range loop instead of convolve2d.
double metric_modified_dct(const Patch& p, const MetricParams&) {
  if (p.width < 4 || p.height < 4) {
    throw Error(ErrorKind::InvalidArgument, "modified_dct needs at least 4x4");
  }
  static const double board[4][4] = {{1, 1, -1, -1},
                                     {1, 1, -1, -1},
                                     {-1, -1, 1, 1},
                                     {-1, -1, 1, 1}};
  double acc = 0.0;
  for (int y = 0; y + 4 <= p.height; ++y) {
    for (int x = 0; x + 4 <= p.width; ++x) {
      double r = 0.0;
      for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
          r += board[j][i] * p.at(x + i, y + j);
        }
      }
      acc += r;
    }
  }
  return acc;
}

WaveletLevel deepest_level(const Patch& p, int level, Patch* ll) {
  WaveletPyramid pyr = cdf97_decompose(p, level);
  if (ll) {
    *ll = std::move(pyr.ll);
  }
  return std::move(pyr.levels.back());
}

double metric_wavelet_sum(const Patch& p, const MetricParams& params) {
  const WaveletLevel lvl = deepest_level(p, params.wavelet_level, nullptr);
  double acc = 0.0;
  for (double v : lvl.lh.data) acc += std::abs(v);
  for (double v : lvl.hl.data) acc += std::abs(v);
  for (double v : lvl.hh.data) acc += std::abs(v);
  return acc;
}

double metric_wavelet_variance(const Patch& p, const MetricParams& params) {
  const WaveletLevel lvl = deepest_level(p, params.wavelet_level, nullptr);
  return population_variance(lvl.lh.data) + population_variance(lvl.hl.data) +
         population_variance(lvl.hh.data);
}

double metric_wavelet_ratio(const Patch& p, const MetricParams& params) {
  Patch ll;
  const WaveletLevel lvl = deepest_level(p, params.wavelet_level, &ll);
  double den = 0.0;
  for (double v : ll.data) den += v * v;
  if (den == 0.0) {
    return 0.0;
  }
  double num = 0.0;
  for (double v : lvl.lh.data) num += v * v;
  for (double v : lvl.hl.data) num += v * v;
  for (double v : lvl.hh.data) num += v * v;
  return num / den;
}

double metric_mean_wavelet_log_ratio(const Patch& p, const MetricParams& params) {
  Patch ll;
  const WaveletLevel lvl = deepest_level(p, params.wavelet_level, &ll);
  const int bw = std::min({ll.width, lvl.lh.width, lvl.hl.width, lvl.hh.width});
  const int bh =
      std::min({ll.height, lvl.lh.height, lvl.hl.height, lvl.hh.height});
  double acc = 0.0;
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      const double hi = lvl.lh.at(x, y) * lvl.lh.at(x, y) +
                        lvl.hl.at(x, y) * lvl.hl.at(x, y) +
                        lvl.hh.at(x, y) * lvl.hh.at(x, y);
      acc += std::log(hi / (ll.at(x, y) * ll.at(x, y) + 1.0));
    }
  }
  return acc / (static_cast<double>(bw) * bh);
}

double metric_eigenvalue_trace(const Patch& p, const MetricParams&) {
  const int tx = p.width / 4;
  const int ty = p.height / 4;
  const int m = tx * ty;
  if (m <= 1) {
    return 0.0;
  }
  // trace(cov) = sum over the 16 tile dimensions of their variance across
  // tiles, with the (m-1) sample-covariance denominator.
  double mu[16] = {0};
  for (int by = 0; by < ty; ++by) {
    for (int bx = 0; bx < tx; ++bx) {
      for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
          mu[j * 4 + i] += p.at(bx * 4 + i, by * 4 + j);
        }
      }
    }
  }
  for (double& v : mu) v /= m;
  double trace = 0.0;
  for (int by = 0; by < ty; ++by) {
    for (int bx = 0; bx < tx; ++bx) {
      for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
          const double d = p.at(bx * 4 + i, by * 4 + j) - mu[j * 4 + i];
          trace += d * d;
        }
      }
    }
  }
  return trace / (m - 1);
}

enum class LocalKind { Ratio, LogRatio, NormDistSq };

double local_contrast(const Patch& p, const MetricParams& params, LocalKind kind) {
  const Patch b = gaussian_blur(p, params.sigma);
  double acc = 0.0;
  for (size_t i = 0; i < p.data.size(); ++i) {
    const double iv = p.data[i];
    const double bv = b.data[i];
    switch (kind) {
      case LocalKind::Ratio:
        acc += std::max((bv + 1.0) / (iv + 1.0), (iv + 1.0) / (bv + 1.0));
        break;
      case LocalKind::LogRatio:
        acc += std::abs(std::log((iv + 1.0) / (bv + 1.0)));
        break;
      case LocalKind::NormDistSq:
        acc += (iv - bv) * (iv - bv) / (bv * bv + 1.0);
        break;
    }
  }
  acc /= static_cast<double>(p.data.size());
  return kind == LocalKind::LogRatio ? std::exp(acc) : acc;
}

double metric_mean_local_ratio(const Patch& p, const MetricParams& params) {
  return local_contrast(p, params, LocalKind::Ratio);
}

double metric_mean_local_log_ratio(const Patch& p, const MetricParams& params) {
  return local_contrast(p, params, LocalKind::LogRatio);
}

double metric_mean_local_norm_dist_sq(const Patch& p, const MetricParams& params) {
  return local_contrast(p, params, LocalKind::NormDistSq);
}

using MetricFn = double (*)(const Patch&, const MetricParams&);

const std::vector<std::pair<std::string, MetricFn>>& registry() {
  static const std::vector<std::pair<std::string, MetricFn>> table = {
      {"intensity_variance", metric_intensity_variance},
      {"intensity_coeff_variation", metric_intensity_coeff_variation},
      {"tv_l1", metric_tv_l1},
      {"tv_l2", metric_tv_l2},
      {"laplacian_energy", metric_laplacian_energy},
      {"laplacian_variance", metric_laplacian_variance},
      {"sum_modified_laplacian", metric_sum_modified_laplacian},
      {"diagonal_laplacian", metric_diagonal_laplacian},
      {"mean_gradient_magnitude", metric_mean_gradient_magnitude},
      {"gradient_count", metric_gradient_count},
      {"gradient_magnitude_variance", metric_gradient_magnitude_variance},
      {"percentile_range", metric_percentile_range},
      {"histogram_entropy", metric_histogram_entropy},
      {"dct_energy_ratio", metric_dct_energy_ratio},
      {"dct_reduced_energy_ratio", metric_dct_reduced_energy_ratio},
      {"modified_dct", metric_modified_dct},
      {"wavelet_sum", metric_wavelet_sum},
      {"wavelet_variance", metric_wavelet_variance},
      {"wavelet_ratio", metric_wavelet_ratio},
      {"mean_wavelet_log_ratio", metric_mean_wavelet_log_ratio},
      {"eigenvalue_trace", metric_eigenvalue_trace},
      {"mean_local_ratio", metric_mean_local_ratio},
      {"mean_local_log_ratio", metric_mean_local_log_ratio},
      {"mean_local_norm_dist_sq", metric_mean_local_norm_dist_sq},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& contrast_metric_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, fn] : registry()) {
      v.push_back(id);
    }
    return v;
  }();
  return ids;
}

bool is_contrast_metric(const std::string& id) {
  for (const auto& [name, fn] : registry()) {
    if (name == id) {
      return true;
    }
  }
  return false;
}

double contrast_score(const std::string& id, const Patch& patch,
                      const MetricParams& params) {
  patch.validate("contrast_score input");
  params.validate();
  for (const auto& [name, fn] : registry()) {
    if (name == id) {
      return fn(patch, params);
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown contrast metric: " + id);
}

int solve_focal_stack_contrast(const std::string& id, const FocalStack& stack,
                               const MetricParams& params) {
  if (stack.slices.empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty focal stack");
  }
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < stack.slice_count(); ++k) {
    const double s = contrast_score(id, stack.green(k), params);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

}  // namespace afbench
