#include "afbench/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "afbench/contrast.hpp"
#include "afbench/dp_match.hpp"
#include "afbench/dp_single.hpp"
#include "afbench/parallel.hpp"
#include "afbench/sim.hpp"

namespace afbench {

namespace {

void require_dual(const FocalStack& stack) {
  if (!stack.dual_pixel) {
    throw Error(ErrorKind::Data, "algorithm requires dual-pixel data");
  }
}

Patch sample_scaled(const Patch& src, double scale) {
  Patch out(src.width, src.height);
  const double cx = 0.5 * (src.width - 1);
  const double cy = 0.5 * (src.height - 1);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      const double fx = cx + (x - cx) * scale;
      const double fy = cy + (y - cy) * scale;
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

double sse(const Patch& a, const Patch& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc;
}

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

constexpr const char* kCsvHeader =
    "algorithm,protocol,input_mode,within_0,within_1,within_2,within_4,mae,rmse,"
    "count,failures";

std::string report_row(const EvalReport& r) {
  std::string row = r.algorithm + "," + r.protocol + "," + r.input_mode;
  row += "," + format_fixed(r.within_0);
  row += "," + format_fixed(r.within_1);
  row += "," + format_fixed(r.within_2);
  row += "," + format_fixed(r.within_4);
  row += "," + format_fixed(r.mae);
  row += "," + format_fixed(r.rmse);
  row += "," + std::to_string(r.count);
  row += "," + std::to_string(r.failures);
  return row;
}

std::vector<EvalReport> sorted_for_display(std::vector<EvalReport> rows) {
  std::sort(rows.begin(), rows.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.input_mode != b.input_mode) {
      return a.input_mode < b.input_mode;
    }
    if (a.rmse != b.rmse) {
      return a.rmse < b.rmse;
    }
    if (a.algorithm != b.algorithm) {
      return a.algorithm < b.algorithm;
    }
    return a.protocol < b.protocol;
  });
  return rows;
}

}  // namespace

void ProtocolSpec::validate() const {
  if (kind == ProtocolKind::MultiStep && steps_m < 1) {
    throw Error(ErrorKind::InvalidArgument, "multi_step needs at least 1 step");
  }
}

std::string protocol_name(const ProtocolSpec& spec) {
  switch (spec.kind) {
    case ProtocolKind::FocalStack:
      return "focal_stack";
    case ProtocolKind::SingleSlice:
      return "single_slice";
    case ProtocolKind::MultiStep:
      return "multi_step_" + std::to_string(spec.steps_m);
  }
  return "unknown";
}

std::string input_mode_name(InputMode mode) {
  return mode == InputMode::Green ? "green" : "dual_pixel";
}

EvalReport score_predictions(const std::vector<int>& preds,
                             const std::vector<int>& gts) {
  if (preds.size() != gts.size()) {
    throw Error(ErrorKind::InvalidArgument, "prediction and truth counts differ");
  }
  EvalReport r;
  r.count = preds.size();
  if (preds.empty()) {
    return r;
  }
  size_t w0 = 0, w1 = 0, w2 = 0, w4 = 0;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    const int err = std::abs(preds[i] - gts[i]);
    w0 += err == 0;
    w1 += err <= 1;
    w2 += err <= 2;
    w4 += err <= 4;
    abs_sum += err;
    sq_sum += static_cast<double>(err) * err;
  }
  const double n = static_cast<double>(preds.size());
  r.within_0 = static_cast<double>(w0) / n;
  r.within_1 = static_cast<double>(w1) / n;
  r.within_2 = static_cast<double>(w2) / n;
  r.within_4 = static_cast<double>(w4) / n;
  r.mae = abs_sum / n;
  r.rmse = std::sqrt(sq_sum / n);
  return r;
}

Algorithm make_algorithm(const std::string& id, const CameraConfig& cam,
                         const MetricParams& params, int max_shift,
                         std::shared_ptr<const ShallowScorer> scorer) {
  cam.validate();
  params.validate();
  if (max_shift < 1) {
    throw Error(ErrorKind::InvalidArgument, "max shift must be at least 1");
  }
  Algorithm alg;
  alg.id = id;
  if (is_contrast_metric(id)) {
    alg.input_mode = InputMode::Green;
    alg.full_stack = true;
    alg.solve_stack = [id, params](const FocalStack& stack) {
      return solve_focal_stack_contrast(id, stack, params);
    };
    return alg;
  }
  if (is_dp_metric(id)) {
    alg.input_mode = InputMode::DualPixel;
    alg.full_stack = true;
    alg.solve_stack = [id, params](const FocalStack& stack) {
      require_dual(stack);
      return solve_focal_stack_dp(id, stack, params);
    };
    return alg;
  }
  if (id == "zncc_calibrated") {
    alg.input_mode = InputMode::DualPixel;
    alg.full_stack = false;
    alg.solve_observed = [cam, max_shift](const FocalStack& stack,
                                          const std::vector<int>& observed) {
      require_dual(stack);
      if (observed.empty()) {
        throw Error(ErrorKind::InvalidArgument, "no observed slices");
      }
      const int k = observed.back();
      if (k < 0 || k >= stack.slice_count()) {
        throw Error(ErrorKind::InvalidArgument, "observed index out of range");
      }
      return solve_single_slice_dp(stack.slices[static_cast<size_t>(k)], k, cam,
                                   max_shift);
    };
    return alg;
  }
  if (id == "scorer") {
    if (!scorer) {
      throw Error(ErrorKind::InvalidArgument, "scorer algorithm needs a scorer file");
    }
    scorer->validate();
    alg.input_mode = InputMode::DualPixel;
    if (scorer->mode() == ScorerMode::FullStack) {
      alg.full_stack = true;
      alg.solve_stack = [scorer, params](const FocalStack& stack) {
        return scorer->predict_stack(stack, params);
      };
    } else {
      alg.full_stack = false;
      alg.solve_observed = [scorer, params](const FocalStack& stack,
                                            const std::vector<int>& observed) {
        return scorer->predict_observed(stack, observed, params);
      };
    }
    return alg;
  }
  std::string valid;
  for (const std::string& name : algorithm_ids()) {
    valid += valid.empty() ? name : ", " + name;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm id: " + id +
                                              " (valid: " + valid + ")");
}

std::vector<std::string> algorithm_ids() {
  std::vector<std::string> ids = contrast_metric_ids();
  const std::vector<std::string> dp = dp_metric_ids();
  ids.insert(ids.end(), dp.begin(), dp.end());
  ids.push_back("zncc_calibrated");
  ids.push_back("scorer");
  return ids;
}

EvalReport run_protocol(const Algorithm& algorithm, const ProtocolSpec& spec,
                        const StackProvider& dataset, int jobs) {
  spec.validate();
  if (spec.kind == ProtocolKind::FocalStack) {
    if (!algorithm.full_stack || !algorithm.solve_stack) {
      throw Error(ErrorKind::InvalidArgument,
                  "focal_stack protocol needs a full-stack algorithm");
    }
  } else if (algorithm.full_stack || !algorithm.solve_observed) {
    throw Error(ErrorKind::InvalidArgument,
                protocol_name(spec) + " protocol needs a single-slice algorithm");
  }

  const size_t count = dataset.size();
  std::vector<std::vector<int>> preds(count);
  std::vector<std::vector<int>> gts(count);
  std::vector<size_t> fails(count, 0);

  parallel_for(count, jobs, [&](size_t i) {
    const FocalStack stack = dataset.get(i);
    if (!stack.ground_truth_index) {
      throw Error(ErrorKind::Data, "stack lacks a ground truth index");
    }
    const int gt = *stack.ground_truth_index;
    const int n = stack.slice_count();
    if (spec.kind == ProtocolKind::FocalStack) {
      int pred = 0;
      try {
        pred = algorithm.solve_stack(stack);
      } catch (const Error&) {
        fails[i] += 1;
      }
      preds[i].push_back(pred);
      gts[i].push_back(gt);
      return;
    }
    const int iterations = (spec.kind == ProtocolKind::SingleSlice) ? 1 : spec.steps_m;
    for (int start = 0; start < n; ++start) {
      std::vector<int> observed{start};
      for (int it = 0; it < iterations; ++it) {
        int next = observed.back();
        try {
          next = algorithm.solve_observed(stack, observed);
        } catch (const Error&) {
          fails[i] += 1;
          observed.push_back(next);
          break;
        }
        observed.push_back(next);
      }
      preds[i].push_back(observed.back());
      gts[i].push_back(gt);
    }
  });

  std::vector<int> all_preds;
  std::vector<int> all_gts;
  size_t failures = 0;
  for (size_t i = 0; i < count; ++i) {
    all_preds.insert(all_preds.end(), preds[i].begin(), preds[i].end());
    all_gts.insert(all_gts.end(), gts[i].begin(), gts[i].end());
    failures += fails[i];
  }
  EvalReport report = score_predictions(all_preds, all_gts);
  report.algorithm = algorithm.id;
  report.protocol = protocol_name(spec);
  report.input_mode = input_mode_name(algorithm.input_mode);
  report.failures = failures;
  return report;
}

FocalStack register_stack(const FocalStack& stack, RegistrationMode mode,
                          const CameraConfig& cam) {
  stack.validate();
  cam.validate();
  const int n = stack.slice_count();
  const double g_ref = stack.focus_distances_m.back();
  const Patch ref_green = stack.green(n - 1);

  FocalStack out = stack;
  for (int k = 0; k < n; ++k) {
    double scale = 1.0;
    if (mode == RegistrationMode::Calibrated) {
      scale = breathing_scale(cam, stack.focus_distances_m[static_cast<size_t>(k)], g_ref);
    } else {
      const Patch green = stack.green(k);
      double best_sse = sse(green, ref_green);
      for (int s = 1; s <= 30; ++s) {
        const double cand = 1.0 + 0.002 * s;
        const double err = sse(sample_scaled(green, cand), ref_green);
        if (err < best_sse) {
          best_sse = err;
          scale = cand;
        }
      }
    }
    if (scale == 1.0) {
      continue;
    }
    DualPixelPatch& slice = out.slices[static_cast<size_t>(k)];
    slice.left = sample_scaled(slice.left, scale);
    if (stack.dual_pixel) {
      slice.right = sample_scaled(slice.right, scale);
    }
  }
  return out;
}

// ============================================================================
// Reports
// ============================================================================

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<EvalReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  }
  out << kCsvHeader << "\n";
  for (const EvalReport& r : reports) {
    out << report_row(r) << "\n";
  }
  if (!out) {
    throw Error(ErrorKind::Io, "failed writing " + path.string());
  }
}

std::vector<EvalReport> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorKind::Data, "unrecognized report header in " + path.string());
  }
  std::vector<EvalReport> reports;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != 11) {
      throw Error(ErrorKind::Data, "bad report row in " + path.string());
    }
    try {
      EvalReport r;
      r.algorithm = fields[0];
      r.protocol = fields[1];
      r.input_mode = fields[2];
      r.within_0 = std::stod(fields[3]);
      r.within_1 = std::stod(fields[4]);
      r.within_2 = std::stod(fields[5]);
      r.within_4 = std::stod(fields[6]);
      r.mae = std::stod(fields[7]);
      r.rmse = std::stod(fields[8]);
      r.count = std::stoull(fields[9]);
      r.failures = std::stoull(fields[10]);
      reports.push_back(std::move(r));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Data, "bad report row in " + path.string());
    }
  }
  return reports;
}

std::string render_report(const std::vector<EvalReport>& reports,
                          ReportFormat format) {
  const std::vector<EvalReport> rows = sorted_for_display(reports);
  std::string out;
  if (format == ReportFormat::Csv) {
    out = std::string(kCsvHeader) + "\n";
    for (const EvalReport& r : rows) {
      out += report_row(r) + "\n";
    }
    return out;
  }
  out += "| algorithm | protocol | input_mode | within_0 | within_1 | within_2 "
         "| within_4 | mae | rmse | count | failures |\n";
  out += "|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const EvalReport& r : rows) {
    out += "| " + r.algorithm + " | " + r.protocol + " | " + r.input_mode + " | " +
           format_fixed(r.within_0) + " | " + format_fixed(r.within_1) + " | " +
           format_fixed(r.within_2) + " | " + format_fixed(r.within_4) + " | " +
           format_fixed(r.mae) + " | " + format_fixed(r.rmse) + " | " +
           std::to_string(r.count) + " | " + std::to_string(r.failures) + " |\n";
  }
  return out;
}

}  // namespace afbench
