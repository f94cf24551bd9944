#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "afbench/eval.hpp"
#include "afbench/sim.hpp"
#include "afbench/types.hpp"
#include "doctest.h"
#include "support/checks.hpp"
#include "support/fixtures.hpp"
#include "support/tmpdir.hpp"

using namespace afbench;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

bool same_report(const EvalReport& a, const EvalReport& b) {
  return a.algorithm == b.algorithm && a.input_mode == b.input_mode &&
         a.within_0 == b.within_0 && a.within_1 == b.within_1 &&
         a.within_2 == b.within_2 && a.within_4 == b.within_4 && a.mae == b.mae &&
         a.rmse == b.rmse && a.count == b.count && a.failures == b.failures;
}

double sse(const Patch& a, const Patch& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc;
}

const CameraConfig& cam() {
  static const CameraConfig c = CameraConfig::defaults();
  return c;
}

const MemoryStackProvider& rendered_pair() {
  static const MemoryStackProvider data = [] {
    std::vector<FocalStack> stacks;
    stacks.push_back(
        render_stack(testfix::flat_scene(32, 32, 61, 20, cam()), cam(), SimOptions{}));
    stacks.push_back(
        render_stack(testfix::flat_scene(32, 32, 62, 30, cam()), cam(), SimOptions{}));
    return MemoryStackProvider(std::move(stacks));
  }();
  return data;
}

FocalStack toy_stack(int gt) {
  FocalStack stack;
  const Patch base = testfix::smooth_patch(16, 16, 5);
  for (int k = 0; k < 3; ++k) {
    stack.slices.push_back({base, base});
    stack.focus_distances_m.push_back(0.4 + 0.1 * k);
  }
  stack.ground_truth_index = gt;
  return stack;
}

}  // namespace

TEST_CASE("prediction scoring aggregates index errors") {
  const EvalReport r = score_predictions({0, 1, 2, 5}, {0, 0, 0, 0});
  CHECK(r.within_0 == doctest::Approx(0.25));
  CHECK(r.within_1 == doctest::Approx(0.50));
  CHECK(r.within_2 == doctest::Approx(0.75));
  CHECK(r.within_4 == doctest::Approx(0.75));
  CHECK(r.mae == doctest::Approx(2.0));
  CHECK(r.rmse == doctest::Approx(std::sqrt(7.5)));
  CHECK(r.count == 4u);

  CHECK(score_predictions({}, {}).count == 0u);
  CHECK_THROWS_AS(score_predictions({1}, {1, 2}), Error);
}

TEST_CASE("protocol names and validation") {
  CHECK(protocol_name({ProtocolKind::FocalStack, 2}) == "focal_stack");
  CHECK(protocol_name({ProtocolKind::SingleSlice, 2}) == "single_slice");
  CHECK(protocol_name({ProtocolKind::MultiStep, 3}) == "multi_step_3");
  ProtocolSpec bad{ProtocolKind::MultiStep, 0};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("algorithm resolution wires ids to modes") {
  const MetricParams params;
  const Algorithm contrast = make_algorithm("tv_l2", cam(), params, 8);
  CHECK(contrast.full_stack);
  CHECK(contrast.input_mode == InputMode::Green);

  const Algorithm dp = make_algorithm("ncc", cam(), params, 8);
  CHECK(dp.full_stack);
  CHECK(dp.input_mode == InputMode::DualPixel);

  const Algorithm single = make_algorithm("zncc_calibrated", cam(), params, 8);
  CHECK_FALSE(single.full_stack);
  CHECK(single.input_mode == InputMode::DualPixel);

  CHECK_THROWS_AS(make_algorithm("scorer", cam(), params, 8), Error);
  try {
    make_algorithm("bogus", cam(), params, 8);
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("zncc_calibrated") != std::string::npos);
  }

  CHECK(algorithm_ids().size() == 24u + 7u + 2u);
}

TEST_CASE("protocols reject mismatched algorithm kinds") {
  const MemoryStackProvider data({toy_stack(1)});
  const Algorithm full = make_algorithm("tv_l2", cam(), MetricParams{}, 8);
  const Algorithm single = make_algorithm("zncc_calibrated", cam(), MetricParams{}, 8);
  CHECK_THROWS_AS(run_protocol(full, {ProtocolKind::SingleSlice, 1}, data), Error);
  CHECK_THROWS_AS(run_protocol(single, {ProtocolKind::FocalStack, 1}, data), Error);
}

TEST_CASE("a one-step multi-step protocol equals the single-slice protocol") {
  const MemoryStackProvider& data = rendered_pair();
  const Algorithm alg = make_algorithm("zncc_calibrated", cam(), MetricParams{}, 8);
  const EvalReport single = run_protocol(alg, {ProtocolKind::SingleSlice, 1}, data);
  const EvalReport multi = run_protocol(alg, {ProtocolKind::MultiStep, 1}, data);
  CHECK(single.protocol == "single_slice");
  CHECK(multi.protocol == "multi_step_1");
  CHECK(same_report(single, multi));
  CHECK(single.count == 2u * 49u);
}

TEST_CASE("a second correction step tightens disparity predictions") {
  const MemoryStackProvider& data = rendered_pair();
  const Algorithm alg = make_algorithm("zncc_calibrated", cam(), MetricParams{}, 8);
  const EvalReport one = run_protocol(alg, {ProtocolKind::MultiStep, 1}, data);
  const EvalReport two = run_protocol(alg, {ProtocolKind::MultiStep, 2}, data);
  CHECK(two.mae <= one.mae);
  CHECK(two.within_1 >= one.within_1);
}

TEST_CASE("failing cells predict the last observed slice and are tallied") {
  Algorithm flaky;
  flaky.id = "flaky";
  flaky.input_mode = InputMode::DualPixel;
  flaky.full_stack = false;
  flaky.solve_observed = [](const FocalStack&, const std::vector<int>& observed) {
    if (observed.back() > 0) {
      throw Error(ErrorKind::Data, "refuses nonzero starts");
    }
    return 1;
  };
  const MemoryStackProvider data({toy_stack(1), toy_stack(1)});
  const EvalReport r = run_protocol(flaky, {ProtocolKind::SingleSlice, 1}, data);
  CHECK(r.count == 6u);
  CHECK(r.failures == 4u);
  // Start 0 solves to 1 (hit); starts 1 and 2 fail in place, and the failed
  // start-1 cell predicts slice 1, which happens to equal the ground truth.
  CHECK(r.within_0 == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("stacks without ground truth are rejected by protocols") {
  FocalStack stack = toy_stack(1);
  stack.ground_truth_index.reset();
  const MemoryStackProvider data({stack});
  const Algorithm alg = make_algorithm("tv_l2", cam(), MetricParams{}, 8);
  CHECK_THROWS_AS(run_protocol(alg, {ProtocolKind::FocalStack, 1}, data), Error);
}

TEST_CASE("worker count does not change protocol results") {
  const MemoryStackProvider& data = rendered_pair();
  const Algorithm alg = make_algorithm("tv_l2", cam(), MetricParams{}, 8);
  const EvalReport serial = run_protocol(alg, {ProtocolKind::FocalStack, 1}, data, 1);
  const EvalReport threaded = run_protocol(alg, {ProtocolKind::FocalStack, 1}, data, 4);
  CHECK(same_report(serial, threaded));
}

TEST_CASE("grid-search registration keeps already-aligned slices intact") {
  // Slices identical to the reference score zero at unit scale, which no
  // candidate can beat, so the whole stack passes through bitwise.
  const Patch frame = testfix::smooth_patch(24, 24, 6);
  FocalStack stack;
  stack.dual_pixel = false;
  for (int k = 0; k < 5; ++k) {
    stack.slices.push_back({frame, Patch{}});
    stack.focus_distances_m.push_back(0.3 + 0.1 * k);
  }
  const FocalStack registered = register_stack(stack, RegistrationMode::GridSearch, cam());
  for (int k = 0; k < stack.slice_count(); ++k) {
    CHECK(testfix::max_abs_diff(stack.green(k), registered.green(k)) == 0.0);
  }

  const FocalStack rendered =
      render_stack(testfix::flat_scene(32, 32, 8, 24, cam()), cam(), SimOptions{});
  const FocalStack rereg = register_stack(rendered, RegistrationMode::GridSearch, cam());
  const int last = rendered.slice_count() - 1;
  CHECK(testfix::max_abs_diff(rendered.green(last), rereg.green(last)) == 0.0);
}

TEST_CASE("registration undoes most of the focal-breathing mismatch") {
  const Scene scene = testfix::flat_scene(48, 48, 19, 24, cam());
  SimOptions plain;
  SimOptions breathing;
  breathing.focal_breathing = true;
  const FocalStack fixed = render_stack(scene, cam(), plain);
  const FocalStack zoomed = render_stack(scene, cam(), breathing);

  for (RegistrationMode mode : {RegistrationMode::Calibrated, RegistrationMode::GridSearch}) {
    const char* label = mode == RegistrationMode::Calibrated ? "calibrated" : "grid_search";
    CAPTURE(label);
    const FocalStack registered = register_stack(zoomed, mode, cam());
    // Breathing zooms the scene before defocus, so unzooming afterwards
    // cannot restore the blur footprint; compare aggregate mismatch over the
    // front half of the stack, where the zoom is strongest.
    double before = 0.0;
    double after = 0.0;
    for (int k = 0; k <= 24; k += 6) {
      before += sse(zoomed.green(k), fixed.green(k));
      after += sse(registered.green(k), fixed.green(k));
    }
    CHECK(after < 0.75 * before);
  }
}

TEST_CASE("report CSV files round trip byte-identically") {
  const MemoryStackProvider& data = rendered_pair();
  std::vector<EvalReport> reports;
  for (const char* id : {"tv_l2", "ncc"}) {
    reports.push_back(run_protocol(make_algorithm(id, cam(), MetricParams{}, 8),
                                   {ProtocolKind::FocalStack, 1}, data));
  }
  testfix::TempDir tmp("csv");
  write_report_csv(tmp / "a.csv", reports);
  const std::vector<EvalReport> loaded = read_report_csv(tmp / "a.csv");
  write_report_csv(tmp / "b.csv", loaded);
  const std::string a = slurp(tmp / "a.csv");
  CHECK(a == slurp(tmp / "b.csv"));
  CHECK(a.rfind("algorithm,protocol,input_mode,", 0) == 0);

  std::ofstream(tmp / "bad.csv") << "alg,proto\n1,2\n";
  CHECK_THROWS_AS(read_report_csv(tmp / "bad.csv"), Error);
}

TEST_CASE("rendered reports rank rows by input mode then error") {
  std::vector<EvalReport> rows(3);
  rows[0] = {"slow_green", "focal_stack", "green", 0, 0, 0, 0, 5.0, 6.0, 10, 0};
  rows[1] = {"fast_green", "focal_stack", "green", 0, 0, 0, 0, 1.0, 2.0, 10, 0};
  rows[2] = {"dual", "focal_stack", "dual_pixel", 0, 0, 0, 0, 3.0, 4.0, 10, 0};
  const std::string md = render_report(rows, ReportFormat::Markdown);
  const size_t at_dual = md.find("dual");
  const size_t at_fast = md.find("fast_green");
  const size_t at_slow = md.find("slow_green");
  REQUIRE(at_dual != std::string::npos);
  REQUIRE(at_fast != std::string::npos);
  REQUIRE(at_slow != std::string::npos);
  CHECK(at_dual < at_fast);
  CHECK(at_fast < at_slow);

  const std::string csv = render_report(rows, ReportFormat::Csv);
  CHECK(csv.rfind("algorithm,protocol,input_mode,", 0) == 0);
}
