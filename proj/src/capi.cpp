#include "afbench/afbench.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "afbench/contrast.hpp"
#include "afbench/dp_match.hpp"
#include "afbench/dp_single.hpp"
#include "afbench/eval.hpp"
#include "afbench/learn.hpp"
#include "afbench/parallel.hpp"
#include "afbench/sim.hpp"
#include "afbench/stack_io.hpp"

using namespace afbench;

namespace {

thread_local std::string g_last_error;

template <typename Fn>
afb_status guarded(Fn&& fn) {
  try {
    fn();
    return AFB_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    switch (e.kind()) {
      case ErrorKind::InvalidArgument:
        return AFB_INVALID_ARGUMENT;
      case ErrorKind::Io:
        return AFB_IO;
      case ErrorKind::Data:
        return AFB_DATA;
    }
    return AFB_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AFB_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return AFB_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) {
    throw Error(ErrorKind::InvalidArgument, what);
  }
}

PsfShape parse_psf(const char* psf) {
  const std::string s = psf ? psf : "gaussian";
  if (s == "gaussian") {
    return PsfShape::Gaussian;
  }
  if (s == "disc") {
    return PsfShape::Disc;
  }
  if (s == "hexagon") {
    return PsfShape::Hexagon;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown psf shape: " + s);
}

ProtocolSpec parse_protocol(const char* protocol, int steps) {
  const std::string s = protocol ? protocol : "focal_stack";
  ProtocolSpec spec;
  if (s == "focal_stack") {
    spec.kind = ProtocolKind::FocalStack;
  } else if (s == "single_slice") {
    spec.kind = ProtocolKind::SingleSlice;
  } else if (s == "multi_step") {
    spec.kind = ProtocolKind::MultiStep;
    spec.steps_m = steps;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown protocol: " + s);
  }
  spec.validate();
  return spec;
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) {
        out.push_back(cur);
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    out.push_back(cur);
  }
  return out;
}

char* duplicate_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) {
    throw std::bad_alloc();
  }
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Applies breathing registration in front of another provider.
class RegisteringProvider : public StackProvider {
public:
  RegisteringProvider(const StackProvider& inner, RegistrationMode mode,
                      CameraConfig cam)
      : inner_(inner), mode_(mode), cam_(std::move(cam)) {}
  size_t size() const override { return inner_.size(); }
  FocalStack get(size_t index) const override {
    return register_stack(inner_.get(index), mode_, cam_);
  }

private:
  const StackProvider& inner_;
  RegistrationMode mode_;
  CameraConfig cam_;
};

}  // namespace

struct afb_camera {
  CameraConfig cam;
};

struct afb_stack {
  FocalStack stack;
};

extern "C" {

const char* afb_last_error(void) { return g_last_error.c_str(); }

afb_status afb_camera_default(afb_camera** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new afb_camera{CameraConfig::defaults()};
  });
}

afb_status afb_camera_load(const char* json_path, afb_camera** out) {
  return guarded([&] {
    require(json_path != nullptr && out != nullptr, "null argument");
    *out = new afb_camera{load_camera_json(json_path)};
  });
}

void afb_camera_free(afb_camera* cam) { delete cam; }

afb_status afb_camera_ladder_size(const afb_camera* cam, int* out) {
  return guarded([&] {
    require(cam != nullptr && out != nullptr, "null argument");
    *out = static_cast<int>(cam->cam.focus_distances_m.size());
  });
}

afb_status afb_stack_load(const char* dir, afb_stack** out) {
  return guarded([&] {
    require(dir != nullptr && out != nullptr, "null argument");
    *out = new afb_stack{load_stack(dir)};
  });
}

void afb_stack_free(afb_stack* stack) { delete stack; }

afb_status afb_stack_slice_count(const afb_stack* stack, int* out) {
  return guarded([&] {
    require(stack != nullptr && out != nullptr, "null argument");
    *out = stack->stack.slice_count();
  });
}

afb_status afb_stack_ground_truth(const afb_stack* stack, int* out) {
  return guarded([&] {
    require(stack != nullptr && out != nullptr, "null argument");
    *out = stack->stack.ground_truth_index.value_or(-1);
  });
}

afb_status afb_stack_solve_contrast(const afb_stack* stack, const char* metric_id,
                                    int* out) {
  return guarded([&] {
    require(stack != nullptr && metric_id != nullptr && out != nullptr,
            "null argument");
    *out = solve_focal_stack_contrast(metric_id, stack->stack, MetricParams{});
  });
}

afb_status afb_stack_solve_dp(const afb_stack* stack, const char* metric_id,
                              int* out) {
  return guarded([&] {
    require(stack != nullptr && metric_id != nullptr && out != nullptr,
            "null argument");
    *out = solve_focal_stack_dp(metric_id, stack->stack, MetricParams{});
  });
}

afb_status afb_stack_solve_single_slice(const afb_stack* stack,
                                        const afb_camera* cam, int k,
                                        int max_shift, int* out) {
  return guarded([&] {
    require(stack != nullptr && cam != nullptr && out != nullptr, "null argument");
    require(k >= 0 && k < stack->stack.slice_count(), "slice index out of range");
    *out = solve_single_slice_dp(stack->stack.slices[static_cast<size_t>(k)], k,
                                 cam->cam, max_shift);
  });
}

afb_status afb_simulate(const char* scene_json_path, const char* camera_json_path,
                        const char* out_dir, int count, uint64_t seed,
                        const char* psf, double noise_sigma, int focal_breathing,
                        int saturate, int dual_pixel, int jobs) {
  return guarded([&] {
    require(scene_json_path != nullptr && out_dir != nullptr, "null argument");
    require(count >= 1, "stack count must be positive");
    const CameraConfig cam = camera_json_path ? load_camera_json(camera_json_path)
                                              : CameraConfig::defaults();
    SimOptions opts;
    opts.psf_shape = parse_psf(psf);
    opts.noise_sigma = noise_sigma;
    opts.focal_breathing = focal_breathing != 0;
    opts.saturate = saturate != 0;
    opts.dual_pixel = dual_pixel != 0;

    std::filesystem::create_directories(out_dir);
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "stack_%04d", i);
      names.emplace_back(buf);
    }
    parallel_for(static_cast<size_t>(count), jobs, [&](size_t i) {
      const Scene scene =
          scene_from_file(scene_json_path, cam, seed + static_cast<uint64_t>(i));
      const FocalStack stack = render_stack(scene, cam, opts);
      save_stack(std::filesystem::path(out_dir) / names[i], stack);
    });
    save_dataset_index(out_dir, names, cam);
  });
}

afb_status afb_evaluate(const char* dataset_dir, const char* algorithms,
                        const char* protocol, int steps, const char* scorer_path,
                        const char* registration, int max_shift, int jobs,
                        const char* out_csv) {
  return guarded([&] {
    require(dataset_dir != nullptr && algorithms != nullptr && out_csv != nullptr,
            "null argument");
    const DatasetReader reader(dataset_dir);
    const ProtocolSpec spec = parse_protocol(protocol, steps);
    const std::vector<std::string> ids = split_csv_list(algorithms);
    require(!ids.empty(), "no algorithms requested");

    std::shared_ptr<const ShallowScorer> scorer;
    if (scorer_path) {
      scorer = std::make_shared<ShallowScorer>(load_scorer_json(scorer_path));
    }

    const StackProvider* provider = &reader;
    std::unique_ptr<RegisteringProvider> registered;
    if (registration && *registration) {
      const std::string r = registration;
      RegistrationMode mode;
      if (r == "calibrated") {
        mode = RegistrationMode::Calibrated;
      } else if (r == "grid_search") {
        mode = RegistrationMode::GridSearch;
      } else {
        throw Error(ErrorKind::InvalidArgument, "unknown registration mode: " + r);
      }
      registered =
          std::make_unique<RegisteringProvider>(reader, mode, reader.camera());
      provider = registered.get();
    }

    std::vector<EvalReport> reports;
    for (const std::string& id : ids) {
      const Algorithm alg =
          make_algorithm(id, reader.camera(), MetricParams{}, max_shift, scorer);
      reports.push_back(run_protocol(alg, spec, *provider, jobs));
    }
    write_report_csv(out_csv, reports);
  });
}

afb_status afb_train(const char* dataset_dir, const char* config_json_path,
                     const char* mode, int jobs, const char* out_scorer_path) {
  return guarded([&] {
    require(dataset_dir != nullptr && out_scorer_path != nullptr, "null argument");
    const DatasetReader reader(dataset_dir);
    TrainConfig config;
    if (config_json_path) {
      config = load_train_config_json(config_json_path);
    }
    if (mode && *mode) {
      const std::string m = mode;
      if (m == "full_stack") {
        config.mode = ScorerMode::FullStack;
      } else if (m == "single_slice") {
        config.mode = ScorerMode::SingleSlice;
      } else {
        throw Error(ErrorKind::InvalidArgument, "unknown scorer mode: " + m);
      }
    }
    const ShallowScorer scorer = train_scorer(reader, config, MetricParams{}, jobs);
    save_scorer_json(out_scorer_path, scorer);
  });
}

afb_status afb_report(const char* const* csv_paths, size_t n_paths,
                      const char* format, char** out_text) {
  return guarded([&] {
    require(csv_paths != nullptr && out_text != nullptr, "null argument");
    require(n_paths >= 1, "no report files given");
    const std::string fmt = format ? format : "markdown";
    ReportFormat rf;
    if (fmt == "markdown") {
      rf = ReportFormat::Markdown;
    } else if (fmt == "csv") {
      rf = ReportFormat::Csv;
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown report format: " + fmt);
    }
    std::vector<EvalReport> rows;
    for (size_t i = 0; i < n_paths; ++i) {
      require(csv_paths[i] != nullptr, "null report path");
      const std::vector<EvalReport> part = read_report_csv(csv_paths[i]);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    *out_text = duplicate_string(render_report(rows, rf));
  });
}

afb_status afb_algorithm_ids(const char* family, char** out_text) {
  return guarded([&] {
    require(out_text != nullptr, "null output pointer");
    const std::string fam = family ? family : "all";
    std::vector<std::string> ids;
    if (fam == "contrast") {
      ids = contrast_metric_ids();
    } else if (fam == "dp") {
      ids = dp_metric_ids();
    } else if (fam == "all") {
      ids = algorithm_ids();
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown algorithm family: " + fam);
    }
    std::string joined;
    for (const std::string& id : ids) {
      joined += joined.empty() ? id : "," + id;
    }
    *out_text = duplicate_string(joined);
  });
}

void afb_string_free(char* text) { std::free(text); }

}  // extern "C"
