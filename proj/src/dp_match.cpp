#include "afbench/dp_match.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>

namespace afbench {

namespace {

constexpr double kStdFloor = 1e-12;

void require_pair(const DualPixelPatch& pair) {
  pair.left.validate("dp left");
  pair.right.validate("dp right");
  if (pair.left.width != pair.right.width ||
      pair.left.height != pair.right.height) {
    throw Error(ErrorKind::InvalidArgument, "left/right size mismatch");
  }
}

// 8-bit census signature at (x, y); mask marks which neighbor positions are
// in bounds so border pixels compare only over their valid entries.
struct CensusCode {
  uint8_t bits = 0;
  uint8_t mask = 0;
};

CensusCode census_at(const Patch& p, int x, int y) {
  static const int offsets[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                    {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
  CensusCode code;
  const double center = p.at(x, y);
  for (int i = 0; i < 8; ++i) {
    const int nx = x + offsets[i][0];
    const int ny = y + offsets[i][1];
    if (nx < 0 || nx >= p.width || ny < 0 || ny >= p.height) {
      continue;
    }
    code.mask |= static_cast<uint8_t>(1u << i);
    if (p.at(nx, ny) > center) {
      code.bits |= static_cast<uint8_t>(1u << i);
    }
  }
  return code;
}

int ternary_digit(double neighbor, double center, double epsilon) {
  const double d = neighbor - center;
  if (std::abs(d) > epsilon) {
    return d > 0.0 ? 1 : -1;
  }
  return 0;
}

double census_family(const std::string& id, const Patch& L, const Patch& R,
                     const MetricParams& params) {
  static const int offsets[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                    {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
  double total = 0.0;
  for (int y = 0; y < L.height; ++y) {
    for (int x = 0; x < L.width; ++x) {
      if (id == "census_hamming") {
        const CensusCode a = census_at(L, x, y);
        const CensusCode b = census_at(R, x, y);
        total += std::popcount(
            static_cast<unsigned>((a.bits ^ b.bits) & a.mask & b.mask));
      } else if (id == "rank_l1") {
        const CensusCode a = census_at(L, x, y);
        const CensusCode b = census_at(R, x, y);
        total += std::abs(std::popcount(static_cast<unsigned>(a.bits)) -
                          std::popcount(static_cast<unsigned>(b.bits)));
      } else {
        for (const auto& off : offsets) {
          const int nx = x + off[0];
          const int ny = y + off[1];
          if (nx < 0 || nx >= L.width || ny < 0 || ny >= L.height) {
            continue;
          }
          const int dl =
              ternary_digit(L.at(nx, ny), L.at(x, y), params.ternary_epsilon);
          const int dr =
              ternary_digit(R.at(nx, ny), R.at(x, y), params.ternary_epsilon);
          total += std::abs(dl - dr);
        }
      }
    }
  }
  return total;
}

// 2x2 stride-1 pooling helpers for the envelope measures; each shrinks both
// extents by one.
Patch box2(const Patch& p) {
  Patch out(p.width - 1, p.height - 1);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = 0.25 * (p.at(x, y) + p.at(x + 1, y) + p.at(x, y + 1) +
                             p.at(x + 1, y + 1));
    }
  }
  return out;
}

Patch pool2(const Patch& p, bool take_max) {
  Patch out(p.width - 1, p.height - 1);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const double a = std::max(std::max(p.at(x, y), p.at(x + 1, y)),
                                std::max(p.at(x, y + 1), p.at(x + 1, y + 1)));
      const double b = std::min(std::min(p.at(x, y), p.at(x + 1, y)),
                                std::min(p.at(x, y + 1), p.at(x + 1, y + 1)));
      out.at(x, y) = take_max ? a : b;
    }
  }
  return out;
}

double envelope_mismatch(const Patch& L, const Patch& R, bool squared) {
  if (L.width < 3 || L.height < 3) {
    throw Error(ErrorKind::InvalidArgument,
                "envelope metrics need at least 3x3 inputs");
  }
  const Patch lb = box2(L);
  const Patch rb = box2(R);
  const Patch l_lo = pool2(lb, false);
  const Patch l_hi = pool2(lb, true);
  const Patch r_lo = pool2(rb, false);
  const Patch r_hi = pool2(rb, true);
  double acc = 0.0;
  for (size_t i = 0; i < l_lo.data.size(); ++i) {
    const double a = std::max(0.0, l_lo.data[i] - r_hi.data[i]);
    const double b = std::max(0.0, r_lo.data[i] - l_hi.data[i]);
    acc += squared ? a * a + b * b : a + b;
  }
  return acc;
}

}  // namespace

const std::vector<std::string>& dp_metric_ids() {
  static const std::vector<std::string> ids = {
      "census_hamming", "rank_l1",        "ternary_census",
      "ncc",            "normalized_sad", "normalized_envelope_l1",
      "normalized_envelope_l2"};
  return ids;
}

bool is_dp_metric(const std::string& id) {
  const auto& ids = dp_metric_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

Patch zero_normalize(const Patch& patch) {
  patch.validate("zero_normalize input");
  double mu = 0.0;
  for (double v : patch.data) mu += v;
  mu /= static_cast<double>(patch.data.size());
  double var = 0.0;
  for (double v : patch.data) var += (v - mu) * (v - mu);
  var /= static_cast<double>(patch.data.size());
  const double sd = std::sqrt(var);
  Patch out(patch.width, patch.height);
  if (sd < kStdFloor) {
    return out;
  }
  const double inv = 1.0 / sd;
  for (size_t i = 0; i < patch.data.size(); ++i) {
    out.data[i] = (patch.data[i] - mu) * inv;
  }
  return out;
}

double dp_mismatch(const std::string& id, const DualPixelPatch& pair,
                   const MetricParams& params) {
  require_pair(pair);
  params.validate();
  if (!is_dp_metric(id)) {
    throw Error(ErrorKind::InvalidArgument, "unknown dual-pixel metric: " + id);
  }
  const Patch L = zero_normalize(pair.left);
  const Patch R = zero_normalize(pair.right);

  if (id == "census_hamming" || id == "rank_l1" || id == "ternary_census") {
    return census_family(id, L, R, params);
  }
  if (id == "ncc") {
    double acc = 0.0;
    for (size_t i = 0; i < L.data.size(); ++i) {
      acc += L.data[i] * R.data[i];
    }
    return -acc;
  }
  if (id == "normalized_sad") {
    double acc = 0.0;
    for (size_t i = 0; i < L.data.size(); ++i) {
      acc += std::abs(L.data[i] - R.data[i]);
    }
    return acc;
  }
  return envelope_mismatch(L, R, id == "normalized_envelope_l2");
}

int solve_focal_stack_dp(const std::string& id, const FocalStack& stack,
                         const MetricParams& params) {
  if (stack.slices.empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty focal stack");
  }
  if (!stack.dual_pixel) {
    throw Error(ErrorKind::InvalidArgument,
                "dual-pixel solver requires a dual-pixel stack");
  }
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (int k = 0; k < stack.slice_count(); ++k) {
    const double s = dp_mismatch(id, stack.slices[k], params);
    if (s < best_score) {
      best_score = s;
      best = k;
    }
  }
  return best;
}

}  // namespace afbench
