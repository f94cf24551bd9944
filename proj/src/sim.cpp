#include "afbench/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "afbench/kernels.hpp"
#include "afbench/rng.hpp"
#include "json.hpp"

namespace afbench {

namespace {

using nlohmann::json;

constexpr double kIdentityBlurThreshold = 0.25;
constexpr double kKernelQuantum = 1.0 / 64.0;

// Scatter weights indexed by destination offset relative to the source pixel.
struct ScatterKernel {
  int x0 = 0;
  int y0 = 0;
  int w = 0;
  int h = 0;
  std::vector<double> wts;

  double at(int i, int j) const { return wts[static_cast<size_t>(j) * w + i]; }
};

struct KernelPair {
  ScatterKernel left;
  ScatterKernel right;  // unused for green-only rendering
};

double psf_weight(PsfShape shape, double r, double x, double y) {
  switch (shape) {
    case PsfShape::Gaussian: {
      const double sigma = 0.5 * r;
      const double rr = x * x + y * y;
      if (rr > 9.0 * sigma * sigma) {
        return 0.0;
      }
      return std::exp(-rr / (2.0 * sigma * sigma));
    }
    case PsfShape::Disc:
      return (x * x + y * y <= r * r) ? 1.0 : 0.0;
    case PsfShape::Hexagon: {
      const double apothem = r * 0.8660254037844386;
      for (int k = 0; k < 3; ++k) {
        const double ang = (30.0 + 60.0 * k) * 3.14159265358979323846 / 180.0;
        if (std::abs(std::cos(ang) * x + std::sin(ang) * y) > apothem) {
          return 0.0;
        }
      }
      return 1.0;
    }
  }
  return 0.0;
}

struct KernelGrid {
  int extent = 0;
  std::vector<double> wts;

  explicit KernelGrid(int e)
      : extent(e), wts(static_cast<size_t>(2 * e + 1) * (2 * e + 1), 0.0) {}
  int side() const { return 2 * extent + 1; }
  double& at(int dx, int dy) {
    return wts[static_cast<size_t>(dy + extent) * side() + (dx + extent)];
  }
  double mass() const {
    double m = 0.0;
    for (double v : wts) {
      m += v;
    }
    return m;
  }
  double centroid_x() const {
    double m = 0.0;
    double mx = 0.0;
    const int s = side();
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < s; ++i) {
        const double v = wts[static_cast<size_t>(j) * s + i];
        m += v;
        mx += v * (i - extent);
      }
    }
    return m > 0.0 ? mx / m : 0.0;
  }

  // Translates along x by delta using two-tap redistribution, which keeps the
  // total mass and moves the centroid by exactly delta.
  void shift_x(double delta) {
    if (delta == 0.0) {
      return;
    }
    const int base = static_cast<int>(std::floor(delta));
    const double frac = delta - base;
    KernelGrid out(extent);
    const int s = side();
    auto put = [&](int dx, int dy, double v) {
      dx = std::clamp(dx, -extent, extent);
      out.at(dx, dy) += v;
    };
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < s; ++i) {
        const double v = wts[static_cast<size_t>(j) * s + i];
        if (v == 0.0) {
          continue;
        }
        const int dx = i - extent;
        const int dy = j - extent;
        put(dx + base, dy, v * (1.0 - frac));
        put(dx + base + 1, dy, v * frac);
      }
    }
    wts = std::move(out.wts);
  }

  ScatterKernel compact() const {
    const int s = side();
    int min_x = s, max_x = -1, min_y = s, max_y = -1;
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < s; ++i) {
        if (wts[static_cast<size_t>(j) * s + i] > 0.0) {
          min_x = std::min(min_x, i);
          max_x = std::max(max_x, i);
          min_y = std::min(min_y, j);
          max_y = std::max(max_y, j);
        }
      }
    }
    ScatterKernel k;
    if (max_x < min_x) {
      return k;
    }
    k.x0 = min_x - extent;
    k.y0 = min_y - extent;
    k.w = max_x - min_x + 1;
    k.h = max_y - min_y + 1;
    k.wts.resize(static_cast<size_t>(k.w) * k.h);
    for (int j = 0; j < k.h; ++j) {
      for (int i = 0; i < k.w; ++i) {
        k.wts[static_cast<size_t>(j) * k.w + i] =
            wts[static_cast<size_t>(min_y + j) * s + (min_x + i)];
      }
    }
    return k;
  }
};

constexpr double kSubsampleOffsets[4] = {-0.375, -0.125, 0.125, 0.375};

KernelPair build_kernel(PsfShape shape, double r, double d, bool dual) {
  const double support = (shape == PsfShape::Gaussian) ? 1.5 * r : r;
  const int extent = static_cast<int>(std::ceil(support + 0.5 * std::abs(d) + 2.0));
  KernelGrid neg(extent);
  KernelGrid pos(extent);
  for (int py = -extent; py <= extent; ++py) {
    for (int px = -extent; px <= extent; ++px) {
      for (double oy : kSubsampleOffsets) {
        for (double ox : kSubsampleOffsets) {
          const double x = px + ox;
          const double y = py + oy;
          const double w = psf_weight(shape, r, x, y);
          if (w <= 0.0) {
            continue;
          }
          (x < 0.0 ? neg : pos).at(px, py) += w;
        }
      }
    }
  }
  const double total = neg.mass() + pos.mass();
  KernelPair pair;
  if (total <= 0.0) {
    pair.left.w = pair.left.h = 1;
    pair.left.wts = {dual ? 0.5 : 1.0};
    if (dual) {
      pair.right = pair.left;
    }
    return pair;
  }
  for (double& v : neg.wts) {
    v /= total;
  }
  for (double& v : pos.wts) {
    v /= total;
  }
  if (!dual) {
    for (size_t i = 0; i < neg.wts.size(); ++i) {
      neg.wts[i] += pos.wts[i];
    }
    pair.left = neg.compact();
    return pair;
  }
  KernelGrid& left = (d >= 0.0) ? neg : pos;
  KernelGrid& right = (d >= 0.0) ? pos : neg;
  left.shift_x(-0.5 * d - left.centroid_x());
  right.shift_x(0.5 * d - right.centroid_x());
  pair.left = left.compact();
  pair.right = right.compact();
  return pair;
}

uint64_t kernel_key(PsfShape shape, int rq, int dq, bool dual) {
  uint64_t key = static_cast<uint64_t>(shape) & 0x3;
  key = (key << 1) | (dual ? 1 : 0);
  key = (key << 24) | static_cast<uint64_t>(rq & 0xFFFFFF);
  key = (key << 24) | static_cast<uint64_t>((dq + (1 << 22)) & 0xFFFFFF);
  return key;
}

int wrap_index(int v, int n) {
  v %= n;
  return v < 0 ? v + n : v;
}

// Periodic wrap keeps the slice mean exactly equal to the texture mean and
// avoids border pile-up that would fake contrast at heavily blurred slices.
void scatter(Patch& dst, int sx, int sy, double v, const ScatterKernel& k) {
  for (int j = 0; j < k.h; ++j) {
    const int py = wrap_index(sy + k.y0 + j, dst.height);
    for (int i = 0; i < k.w; ++i) {
      const int px = wrap_index(sx + k.x0 + i, dst.width);
      dst.at(px, py) += v * k.at(i, j);
    }
  }
}

Patch zoom_bilinear(const Patch& src, double scale) {
  Patch out(src.width, src.height);
  const double cx = 0.5 * (src.width - 1);
  const double cy = 0.5 * (src.height - 1);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const double fx = cx + (x - cx) / scale;
      const double fy = cy + (y - cy) / scale;
      const int ix = std::clamp(static_cast<int>(std::floor(fx)), 0, src.width - 1);
      const int iy = std::clamp(static_cast<int>(std::floor(fy)), 0, src.height - 1);
      const int ix1 = std::min(ix + 1, src.width - 1);
      const int iy1 = std::min(iy + 1, src.height - 1);
      const double tx = std::clamp(fx - ix, 0.0, 1.0);
      const double ty = std::clamp(fy - iy, 0.0, 1.0);
      out.at(x, y) = (1.0 - tx) * (1.0 - ty) * src.at(ix, iy) +
                     tx * (1.0 - ty) * src.at(ix1, iy) +
                     (1.0 - tx) * ty * src.at(ix, iy1) + tx * ty * src.at(ix1, iy1);
    }
  }
  return out;
}

Patch zoom_nearest(const Patch& src, double scale) {
  Patch out(src.width, src.height);
  const double cx = 0.5 * (src.width - 1);
  const double cy = 0.5 * (src.height - 1);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const int ix = std::clamp(
          static_cast<int>(std::lround(cx + (x - cx) / scale)), 0, src.width - 1);
      const int iy = std::clamp(
          static_cast<int>(std::lround(cy + (y - cy) / scale)), 0, src.height - 1);
      out.at(x, y) = src.at(ix, iy);
    }
  }
  return out;
}

double median_of(const std::vector<double>& values) {
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  if (n % 2 == 1) {
    return sorted[n / 2];
  }
  return 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

void add_noise(Patch& p, double sigma, uint64_t stream_seed) {
  Rng rng(stream_seed);
  for (double& v : p.data) {
    v += sigma * rng.normal();
  }
}

void clip01(Patch& p) {
  for (double& v : p.data) {
    v = std::clamp(v, 0.0, 1.0);
  }
}

double require_positive(const json& j, const char* key, double fallback) {
  const double v = j.value(key, fallback);
  if (!std::isfinite(v) || v <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, std::string("scene field must be positive: ") + key);
  }
  return v;
}

Patch texture_from_json(const json& spec, int w, int h, uint64_t seed) {
  const std::string kind = spec.value("kind", "bandlimited_noise");
  if (kind == "bandlimited_noise" || kind == "mixed") {
    const double amplitude = require_positive(spec, "amplitude", 0.2);
    const double feature = require_positive(spec, "feature_px", 2.0);
    const double base = spec.value("base", 0.5);
    Rng rng(mix64(seed, 0xA11CEULL));
    Patch noise(w, h);
    for (double& v : noise.data) {
      v = 2.0 * rng.uniform() - 1.0;
    }
    Patch smooth = gaussian_blur(noise, feature);
    double mean = 0.0;
    for (double v : smooth.data) {
      mean += v;
    }
    mean /= static_cast<double>(smooth.data.size());
    double var = 0.0;
    for (double v : smooth.data) {
      var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / static_cast<double>(smooth.data.size()));
    const double scale = sd > 1e-12 ? amplitude / sd : 0.0;
    Patch tex(w, h);
    for (size_t i = 0; i < tex.data.size(); ++i) {
      tex.data[i] = base + scale * (smooth.data[i] - mean);
    }
    if (kind == "mixed") {
      Rng erng(mix64(seed, 0x57E95ULL));
      const int edges = spec.value("edges", 3);
      const double amp = spec.value("edge_amplitude", 0.15);
      for (int e = 0; e < edges; ++e) {
        const double px = erng.uniform() * w;
        const double py = erng.uniform() * h;
        const double ang = erng.uniform() * 2.0 * 3.14159265358979323846;
        const double nx = std::cos(ang);
        const double ny = std::sin(ang);
        const double delta = (erng.uniform() < 0.5 ? -amp : amp);
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            if ((x - px) * nx + (y - py) * ny > 0.0) {
              tex.at(x, y) += delta;
            }
          }
        }
      }
    }
    for (double& v : tex.data) {
      v = std::max(v, 0.0);
    }
    return tex;
  }
  if (kind == "step_edges") {
    const double base = spec.value("base", 0.4);
    const double amp = require_positive(spec, "amplitude", 0.2);
    const int edges = spec.value("edges", 6);
    Rng rng(mix64(seed, 0x57E95ULL));
    Patch tex(w, h, base);
    for (int e = 0; e < edges; ++e) {
      const double px = rng.uniform() * w;
      const double py = rng.uniform() * h;
      const double ang = rng.uniform() * 2.0 * 3.14159265358979323846;
      const double nx = std::cos(ang);
      const double ny = std::sin(ang);
      const double delta = (rng.uniform() < 0.5 ? -amp : amp);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if ((x - px) * nx + (y - py) * ny > 0.0) {
            tex.at(x, y) += delta;
          }
        }
      }
    }
    for (double& v : tex.data) {
      v = std::max(v, 0.0);
    }
    return tex;
  }
  if (kind == "impulse_grid") {
    const double base = spec.value("base", 0.02);
    const double amp = require_positive(spec, "amplitude", 40.0);
    const int spacing = spec.value("spacing", 16);
    if (spacing < 2) {
      throw Error(ErrorKind::InvalidArgument, "impulse spacing must be at least 2");
    }
    Patch tex(w, h, base);
    for (int cy = spacing / 2; cy < h; cy += spacing) {
      for (int cx = spacing / 2; cx < w; cx += spacing) {
        tex.at(cx, cy) = amp;
      }
    }
    return tex;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown texture kind: " + kind);
}

Patch depth_from_json(const json& spec, int w, int h, uint64_t seed,
                      const std::vector<double>& ladder) {
  const std::string kind = spec.value("kind", "uniform_random");
  const int n = static_cast<int>(ladder.size());
  auto ladder_at = [&](int idx) {
    if (idx < 0 || idx >= n) {
      throw Error(ErrorKind::InvalidArgument, "depth index outside the focus ladder");
    }
    return ladder[static_cast<size_t>(idx)];
  };
  if (kind == "uniform") {
    if (!spec.contains("depth_m")) {
      throw Error(ErrorKind::InvalidArgument, "uniform depth needs depth_m");
    }
    const double z = spec.at("depth_m").get<double>();
    if (!std::isfinite(z) || z <= 0.0) {
      throw Error(ErrorKind::InvalidArgument, "depth_m must be positive");
    }
    return Patch(w, h, z);
  }
  if (kind == "uniform_index") {
    if (!spec.contains("index")) {
      throw Error(ErrorKind::InvalidArgument, "uniform_index depth needs index");
    }
    return Patch(w, h, ladder_at(spec.at("index").get<int>()));
  }
  if (kind == "uniform_random") {
    const int margin = spec.value("margin", 2);
    if (margin < 0 || 2 * margin >= n) {
      throw Error(ErrorKind::InvalidArgument, "margin leaves no ladder entries");
    }
    Rng rng(mix64(seed, 0xD3E9ULL));
    return Patch(w, h, ladder_at(rng.uniform_int(margin, n - 1 - margin)));
  }
  if (kind == "two_plane") {
    if (!spec.contains("near_index") || !spec.contains("far_index")) {
      throw Error(ErrorKind::InvalidArgument, "two_plane depth needs near_index and far_index");
    }
    const double near_z = ladder_at(spec.at("near_index").get<int>());
    const double far_z = ladder_at(spec.at("far_index").get<int>());
    const double split = spec.value("split", 0.55);
    if (!(split > 0.0) || !(split < 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "split must lie in (0, 1)");
    }
    const int split_col = static_cast<int>(std::floor(w * split));
    Patch depth(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        depth.at(x, y) = (x < split_col) ? near_z : far_z;
      }
    }
    return depth;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown depth kind: " + kind);
}

}  // namespace

void Scene::validate() const {
  texture.validate("scene texture");
  depth_map.validate("scene depth map");
  if (texture.width != depth_map.width || texture.height != depth_map.height) {
    throw Error(ErrorKind::InvalidArgument, "texture and depth map dimensions differ");
  }
  for (double z : depth_map.data) {
    if (z < 0.05 || z > 100.0) {
      throw Error(ErrorKind::InvalidArgument, "scene depth outside supported range");
    }
  }
  for (double v : texture.data) {
    if (v < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "scene radiance must be non-negative");
    }
  }
}

double blur_radius(const CameraConfig& cam, double g, double Z) {
  if (!(g > cam.focal_length_f)) {
    throw Error(ErrorKind::InvalidArgument, "focus distance inside focal length");
  }
  if (!(Z > 0.0) || !std::isfinite(Z)) {
    throw Error(ErrorKind::InvalidArgument, "depth must be positive");
  }
  const double b = cam.aperture_radius_l * cam.focal_length_f /
                   (1.0 - cam.focal_length_f / g);
  return b * std::abs(1.0 / g - 1.0 / Z) / cam.pixel_pitch_m;
}

double dp_disparity_true(const CameraConfig& cam, double g, double Z) {
  if (!(g > cam.focal_length_f)) {
    throw Error(ErrorKind::InvalidArgument, "focus distance inside focal length");
  }
  if (!(Z > 0.0) || !std::isfinite(Z)) {
    throw Error(ErrorKind::InvalidArgument, "depth must be positive");
  }
  const double b = cam.aperture_radius_l * cam.focal_length_f /
                   (1.0 - cam.focal_length_f / g);
  return cam.alpha * b * (1.0 / g - 1.0 / Z) / cam.pixel_pitch_m;
}

double breathing_scale(const CameraConfig& cam, double g, double g_ref) {
  const double f = cam.focal_length_f;
  if (!(g > f) || !(g_ref > f)) {
    throw Error(ErrorKind::InvalidArgument, "focus distance inside focal length");
  }
  const double go = f * g / (g - f);
  const double go_ref = f * g_ref / (g_ref - f);
  return go / go_ref;
}

FocalStack render_stack(const Scene& scene, const CameraConfig& cam,
                        const SimOptions& opts) {
  scene.validate();
  cam.validate();
  if (!(opts.noise_sigma >= 0.0) || !std::isfinite(opts.noise_sigma)) {
    throw Error(ErrorKind::InvalidArgument, "noise sigma must be non-negative");
  }
  const int w = scene.texture.width;
  const int h = scene.texture.height;
  const std::vector<double>& ladder = cam.focus_distances_m;
  const double g_ref = ladder.back();

  FocalStack out;
  out.dual_pixel = opts.dual_pixel;
  out.focus_distances_m = ladder;
  out.ground_truth_index = nearest_focus_index(ladder, median_of(scene.depth_map.data));

  std::unordered_map<uint64_t, KernelPair> cache;
  for (size_t k = 0; k < ladder.size(); ++k) {
    const double g = ladder[k];
    const double scale = opts.focal_breathing ? breathing_scale(cam, g, g_ref) : 1.0;
    const Patch tex = (scale == 1.0) ? scene.texture : zoom_bilinear(scene.texture, scale);
    const Patch dep = (scale == 1.0) ? scene.depth_map : zoom_nearest(scene.depth_map, scale);

    DualPixelPatch slice;
    slice.left = Patch(w, h, 0.0);
    if (opts.dual_pixel) {
      slice.right = Patch(w, h, 0.0);
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = tex.at(x, y);
        const double z = dep.at(x, y);
        const double r = blur_radius(cam, g, z);
        if (r < kIdentityBlurThreshold) {
          if (opts.dual_pixel) {
            slice.left.at(x, y) += 0.5 * v;
            slice.right.at(x, y) += 0.5 * v;
          } else {
            slice.left.at(x, y) += v;
          }
          continue;
        }
        const double d = opts.dual_pixel ? dp_disparity_true(cam, g, z) : 0.0;
        const int rq = static_cast<int>(std::lround(r / kKernelQuantum));
        const int dq = static_cast<int>(std::lround(d / kKernelQuantum));
        const uint64_t key = kernel_key(opts.psf_shape, rq, dq, opts.dual_pixel);
        auto it = cache.find(key);
        if (it == cache.end()) {
          it = cache
                   .emplace(key, build_kernel(opts.psf_shape, rq * kKernelQuantum,
                                              dq * kKernelQuantum, opts.dual_pixel))
                   .first;
        }
        scatter(slice.left, x, y, v, it->second.left);
        if (opts.dual_pixel) {
          scatter(slice.right, x, y, v, it->second.right);
        }
      }
    }
    if (opts.noise_sigma > 0.0) {
      add_noise(slice.left, opts.noise_sigma, mix64(mix64(scene.seed, k), 0));
      if (opts.dual_pixel) {
        add_noise(slice.right, opts.noise_sigma, mix64(mix64(scene.seed, k), 1));
      }
    }
    if (opts.saturate) {
      clip01(slice.left);
      if (opts.dual_pixel) {
        clip01(slice.right);
      }
    }
    out.slices.push_back(std::move(slice));
  }
  return out;
}

Scene scene_from_json(const std::string& json_text, const CameraConfig& cam,
                      std::optional<uint64_t> seed_override) {
  cam.validate();
  json spec;
  try {
    spec = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, std::string("malformed scene JSON: ") + e.what());
  }
  try {
    const int w = spec.value("width", 128);
    const int h = spec.value("height", 128);
    if (w < 4 || h < 4 || w > 4096 || h > 4096) {
      throw Error(ErrorKind::InvalidArgument, "scene dimensions out of range");
    }
    Scene scene;
    scene.seed = seed_override.value_or(spec.value("seed", 0ULL));
    const json tex_spec = spec.value("texture", json{{"kind", "bandlimited_noise"}});
    const json depth_spec = spec.value("depth", json{{"kind", "uniform_random"}});
    scene.texture = texture_from_json(tex_spec, w, h, scene.seed);
    scene.depth_map =
        depth_from_json(depth_spec, w, h, scene.seed, cam.focus_distances_m);
    scene.validate();
    return scene;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, std::string("bad scene fields: ") + e.what());
  }
}

Scene scene_from_file(const std::string& path, const CameraConfig& cam,
                      std::optional<uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return scene_from_json(buf.str(), cam, seed_override);
}

}  // namespace afbench
