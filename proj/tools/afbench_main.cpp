#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "afbench/afbench.h"

namespace {

int status_to_exit(afb_status st) {
  switch (st) {
    case AFB_OK:
      return 0;
    case AFB_INVALID_ARGUMENT:
    case AFB_IO:
      return 2;
    case AFB_DATA:
    case AFB_INTERNAL:
      return 3;
  }
  return 3;
}

int fail(afb_status st) {
  std::cerr << "error: " << afb_last_error() << "\n";
  return status_to_exit(st);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Expands the all-contrast / all-dp shorthands into concrete metric ids.
bool expand_algorithms(const std::string& spec, std::string& out, afb_status& st) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      if (!cur.empty()) {
        tokens.push_back(cur);
      }
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    tokens.push_back(cur);
  }
  out.clear();
  for (const std::string& tok : tokens) {
    std::string piece = tok;
    if (tok == "all-contrast" || tok == "all-dp") {
      char* ids = nullptr;
      st = afb_algorithm_ids(tok == "all-contrast" ? "contrast" : "dp", &ids);
      if (st != AFB_OK) {
        return false;
      }
      piece = ids;
      afb_string_free(ids);
    }
    if (!out.empty()) {
      out += ",";
    }
    out += piece;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autofocus benchmark toolkit"};
  app.require_subcommand(1);

  std::string sim_scene, sim_camera, sim_out, sim_psf = "gaussian";
  int sim_count = 1, sim_jobs = 0;
  uint64_t sim_seed = 0;
  double sim_noise = 0.0;
  bool sim_breathing = false, sim_saturate = false, sim_green_only = false;
  CLI::App* sim = app.add_subcommand("simulate", "render focal stacks from a scene spec");
  sim->add_option("--scene", sim_scene, "scene spec JSON file")->required();
  sim->add_option("--out", sim_out, "output dataset directory")->required();
  sim->add_option("--count", sim_count, "number of stacks to render");
  sim->add_option("--seed", sim_seed, "base seed; stack i uses seed + i");
  sim->add_option("--camera", sim_camera, "camera config JSON file");
  sim->add_option("--psf", sim_psf, "psf shape: gaussian, disc, or hexagon");
  sim->add_option("--noise-sigma", sim_noise, "additive read-noise sigma");
  sim->add_flag("--breathing", sim_breathing, "apply focal breathing");
  sim->add_flag("--saturate", sim_saturate, "clip intensities to [0,1]");
  sim->add_flag("--green-only", sim_green_only, "render green channel only");
  sim->add_option("--jobs", sim_jobs, "worker threads (default AFBENCH_JOBS, then 1)");

  std::string eval_data, eval_algs, eval_protocol = "focal_stack";
  std::string eval_scorer, eval_register, eval_out;
  int eval_steps = 2, eval_max_shift = 8, eval_jobs = 0;
  CLI::App* eval = app.add_subcommand("eval", "run algorithms over a dataset");
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--alg", eval_algs,
                   "comma-separated algorithm ids (also all-contrast, all-dp)")
      ->required();
  eval->add_option("--protocol", eval_protocol,
                   "focal_stack, single_slice, or multi_step");
  eval->add_option("--steps", eval_steps, "multi_step iteration count");
  eval->add_option("--scorer", eval_scorer, "scorer JSON (for the scorer id)");
  eval->add_option("--register", eval_register,
                   "breathing registration: calibrated or grid_search");
  eval->add_option("--max-shift", eval_max_shift, "disparity search range");
  eval->add_option("--out", eval_out, "output CSV path")->required();
  eval->add_option("--jobs", eval_jobs, "worker threads (default AFBENCH_JOBS, then 1)");

  std::string train_data, train_config, train_mode, train_out;
  int train_jobs = 0;
  CLI::App* train = app.add_subcommand("train", "train the shallow scorer");
  train->add_option("--data", train_data, "training dataset directory")->required();
  train->add_option("--out", train_out, "output scorer JSON path")->required();
  train->add_option("--config", train_config, "training config JSON");
  train->add_option("--mode", train_mode, "full_stack or single_slice");
  train->add_option("--jobs", train_jobs, "worker threads (default AFBENCH_JOBS, then 1)");

  std::vector<std::string> report_inputs;
  std::string report_format = "markdown", report_out;
  CLI::App* report = app.add_subcommand("report", "render a ranked results table");
  report->add_option("--inputs", report_inputs, "report CSV files")->required();
  report->add_option("--format", report_format, "markdown or csv");
  report->add_option("--out", report_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*sim) {
    const afb_status st =
        afb_simulate(sim_scene.c_str(), opt(sim_camera), sim_out.c_str(), sim_count,
                     sim_seed, sim_psf.c_str(), sim_noise, sim_breathing ? 1 : 0,
                     sim_saturate ? 1 : 0, sim_green_only ? 0 : 1, sim_jobs);
    return st == AFB_OK ? 0 : fail(st);
  }
  if (*eval) {
    std::string algs;
    afb_status st = AFB_OK;
    if (!expand_algorithms(eval_algs, algs, st)) {
      return fail(st);
    }
    st = afb_evaluate(eval_data.c_str(), algs.c_str(), eval_protocol.c_str(),
                      eval_steps, opt(eval_scorer), opt(eval_register),
                      eval_max_shift, eval_jobs, eval_out.c_str());
    return st == AFB_OK ? 0 : fail(st);
  }
  if (*train) {
    const afb_status st = afb_train(train_data.c_str(), opt(train_config),
                                    opt(train_mode), train_jobs, train_out.c_str());
    return st == AFB_OK ? 0 : fail(st);
  }
  if (*report) {
    std::vector<const char*> paths;
    paths.reserve(report_inputs.size());
    for (const std::string& p : report_inputs) {
      paths.push_back(p.c_str());
    }
    char* text = nullptr;
    const afb_status st =
        afb_report(paths.data(), paths.size(), report_format.c_str(), &text);
    if (st != AFB_OK) {
      return fail(st);
    }
    if (report_out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(report_out, std::ios::binary);
      if (!out) {
        std::cerr << "error: cannot open " << report_out << " for writing\n";
        afb_string_free(text);
        return 2;
      }
      out << text;
    }
    afb_string_free(text);
    return 0;
  }
  return 2;
}
