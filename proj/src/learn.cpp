#include "afbench/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "afbench/contrast.hpp"
#include "afbench/dp_match.hpp"
#include "afbench/parallel.hpp"
#include "afbench/rng.hpp"
#include "json.hpp"

namespace afbench {

namespace {

using nlohmann::json;

constexpr double kStdFloor = 1e-12;

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<size_t>(best)]) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

SoftTarget soft_target(int true_index, int n, CostKind cost, double coeff) {
  if (n < 1) {
    throw Error(ErrorKind::InvalidArgument, "target length must be positive");
  }
  if (true_index < 0 || true_index >= n) {
    throw Error(ErrorKind::InvalidArgument, "true index out of range");
  }
  if (!(coeff >= 0.0) || !std::isfinite(coeff)) {
    throw Error(ErrorKind::InvalidArgument, "target coefficient must be non-negative");
  }
  SoftTarget t;
  t.true_index = true_index;
  t.probs.resize(static_cast<size_t>(n));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double gap = std::abs(i - true_index);
    const double phi = (cost == CostKind::L1) ? gap : gap * gap;
    t.probs[static_cast<size_t>(i)] = std::exp(-coeff * phi);
    sum += t.probs[static_cast<size_t>(i)];
  }
  for (double& p : t.probs) {
    p /= sum;
  }
  return t;
}

OrdinalLossResult ordinal_loss(const std::vector<double>& logits,
                               const SoftTarget& target) {
  if (logits.empty() || logits.size() != target.probs.size()) {
    throw Error(ErrorKind::InvalidArgument, "logit and target lengths differ");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) {
    sum += std::exp(l - top);
  }
  const double lse = std::log(sum);
  OrdinalLossResult out;
  out.grad.resize(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    const double log_p = logits[i] - top - lse;
    out.loss -= target.probs[i] * log_p;
    out.grad[i] = std::exp(log_p) - target.probs[i];
  }
  return out;
}

void adam_step(AdamState& state, std::vector<double>& params,
               const std::vector<double>& grads) {
  if (params.size() != state.m.size() || grads.size() != state.m.size()) {
    throw Error(ErrorKind::InvalidArgument, "optimizer size mismatch");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

// ============================================================================
// Shallow scorer
// ============================================================================

const std::vector<std::string>& scorer_feature_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> v = contrast_metric_ids();
    v.push_back("ncc");
    v.push_back("normalized_sad");
    return v;
  }();
  return ids;
}

std::vector<double> slice_features(const FocalStack& stack, int k,
                                   const MetricParams& params) {
  const Patch green = stack.green(k);
  std::vector<double> feats;
  feats.reserve(scorer_feature_ids().size());
  for (const std::string& id : contrast_metric_ids()) {
    feats.push_back(contrast_score(id, green, params));
  }
  if (stack.dual_pixel) {
    feats.push_back(dp_mismatch("ncc", stack.slices[static_cast<size_t>(k)], params));
    feats.push_back(
        dp_mismatch("normalized_sad", stack.slices[static_cast<size_t>(k)], params));
  } else {
    feats.push_back(0.0);
    feats.push_back(0.0);
  }
  return feats;
}

ScorerMode ShallowScorer::mode() const {
  const int f = static_cast<int>(feature_ids.size());
  if (feature_dim() == f * n) {
    return ScorerMode::FullStack;
  }
  if (feature_dim() == f * n + n) {
    return ScorerMode::SingleSlice;
  }
  throw Error(ErrorKind::InvalidArgument, "scorer dimensions match no known layout");
}

void ShallowScorer::validate() const {
  if (n < 1 || feature_ids.empty()) {
    throw Error(ErrorKind::InvalidArgument, "scorer is empty");
  }
  if (mean.size() != std_dev.size()) {
    throw Error(ErrorKind::InvalidArgument, "scorer statistics sizes differ");
  }
  mode();
  if (weights.size() != static_cast<size_t>(feature_dim()) * static_cast<size_t>(n)) {
    throw Error(ErrorKind::InvalidArgument, "scorer weight size mismatch");
  }
  if (bias.size() != static_cast<size_t>(n)) {
    throw Error(ErrorKind::InvalidArgument, "scorer bias size mismatch");
  }
  for (double s : std_dev) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::InvalidArgument, "scorer std must be positive");
    }
  }
}

std::vector<double> ShallowScorer::score_stack(const FocalStack& stack,
                                               const MetricParams& params) const {
  validate();
  if (mode() != ScorerMode::FullStack) {
    throw Error(ErrorKind::InvalidArgument, "scorer expects observed-slice input");
  }
  if (stack.slice_count() != n) {
    throw Error(ErrorKind::InvalidArgument, "stack size does not match scorer");
  }
  const int f = static_cast<int>(feature_ids.size());
  std::vector<double> logits = bias;
  for (int k = 0; k < n; ++k) {
    const std::vector<double> raw = slice_features(stack, k, params);
    for (int i = 0; i < f; ++i) {
      const size_t dim = static_cast<size_t>(k) * f + i;
      const double z = (raw[static_cast<size_t>(i)] - mean[dim]) / std_dev[dim];
      const double* row = &weights[dim * static_cast<size_t>(n)];
      for (int j = 0; j < n; ++j) {
        logits[static_cast<size_t>(j)] += z * row[j];
      }
    }
  }
  return logits;
}

std::vector<double> ShallowScorer::score_observed(const FocalStack& stack,
                                                  const std::vector<int>& observed,
                                                  const MetricParams& params) const {
  validate();
  if (mode() != ScorerMode::SingleSlice) {
    throw Error(ErrorKind::InvalidArgument, "scorer expects a fully observed stack");
  }
  if (stack.slice_count() != n) {
    throw Error(ErrorKind::InvalidArgument, "stack size does not match scorer");
  }
  if (observed.empty()) {
    throw Error(ErrorKind::InvalidArgument, "no observed slices");
  }
  const int f = static_cast<int>(feature_ids.size());
  std::vector<bool> seen(static_cast<size_t>(n), false);
  std::vector<double> logits = bias;
  for (int k : observed) {
    if (k < 0 || k >= n) {
      throw Error(ErrorKind::InvalidArgument, "observed index out of range");
    }
    if (seen[static_cast<size_t>(k)]) {
      continue;
    }
    seen[static_cast<size_t>(k)] = true;
    const std::vector<double> raw = slice_features(stack, k, params);
    for (int i = 0; i < f; ++i) {
      const size_t dim = static_cast<size_t>(k) * f + i;
      const double z = (raw[static_cast<size_t>(i)] - mean[dim]) / std_dev[dim];
      const double* row = &weights[dim * static_cast<size_t>(n)];
      for (int j = 0; j < n; ++j) {
        logits[static_cast<size_t>(j)] += z * row[j];
      }
    }
    const size_t ind = static_cast<size_t>(f) * n + static_cast<size_t>(k);
    const double* row = &weights[ind * static_cast<size_t>(n)];
    for (int j = 0; j < n; ++j) {
      logits[static_cast<size_t>(j)] += row[j];
    }
  }
  return logits;
}

int ShallowScorer::predict_stack(const FocalStack& stack,
                                 const MetricParams& params) const {
  return argmax_lowest(score_stack(stack, params));
}

int ShallowScorer::predict_observed(const FocalStack& stack,
                                    const std::vector<int>& observed,
                                    const MetricParams& params) const {
  return argmax_lowest(score_observed(stack, observed, params));
}

ShallowScorer train_scorer(const StackProvider& dataset, const TrainConfig& config,
                           const MetricParams& params, int jobs) {
  if (config.steps < 1 || config.batch < 1) {
    throw Error(ErrorKind::InvalidArgument, "steps and batch must be positive");
  }
  if (!(config.lr > 0.0) || !(config.beta1 >= 0.0) || config.beta1 >= 1.0 ||
      !(config.beta2 >= 0.0) || config.beta2 >= 1.0) {
    throw Error(ErrorKind::InvalidArgument, "bad optimizer configuration");
  }
  const size_t count = dataset.size();
  if (count == 0) {
    throw Error(ErrorKind::InvalidArgument, "training dataset is empty");
  }
  params.validate();

  const int f = static_cast<int>(scorer_feature_ids().size());
  int n = 0;
  std::vector<std::vector<double>> feats(count);  // per stack: n*f, slice-major
  std::vector<int> truth(count, 0);
  {
    const FocalStack first = dataset.get(0);
    n = first.slice_count();
  }
  parallel_for(count, jobs, [&](size_t i) {
    const FocalStack stack = dataset.get(i);
    if (stack.slice_count() != n) {
      throw Error(ErrorKind::Data, "training stacks have differing slice counts");
    }
    if (!stack.ground_truth_index) {
      throw Error(ErrorKind::Data, "training stack lacks a ground truth index");
    }
    truth[i] = *stack.ground_truth_index;
    std::vector<double>& out = feats[i];
    out.resize(static_cast<size_t>(n) * f);
    for (int k = 0; k < n; ++k) {
      const std::vector<double> raw = slice_features(stack, k, params);
      std::copy(raw.begin(), raw.end(), out.begin() + static_cast<size_t>(k) * f);
    }
  });

  std::vector<double> feat_mean(static_cast<size_t>(f), 0.0);
  std::vector<double> feat_std(static_cast<size_t>(f), 0.0);
  const double samples = static_cast<double>(count) * n;
  for (const std::vector<double>& fs : feats) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < f; ++i) {
        feat_mean[static_cast<size_t>(i)] += fs[static_cast<size_t>(k) * f + i];
      }
    }
  }
  for (double& m : feat_mean) {
    m /= samples;
  }
  for (const std::vector<double>& fs : feats) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < f; ++i) {
        const double d = fs[static_cast<size_t>(k) * f + i] - feat_mean[static_cast<size_t>(i)];
        feat_std[static_cast<size_t>(i)] += d * d;
      }
    }
  }
  for (double& s : feat_std) {
    s = std::sqrt(s / samples);
    if (s < kStdFloor) {
      s = 1.0;
    }
  }
  for (std::vector<double>& fs : feats) {
    for (int k = 0; k < n; ++k) {
      for (int i = 0; i < f; ++i) {
        double& v = fs[static_cast<size_t>(k) * f + i];
        v = (v - feat_mean[static_cast<size_t>(i)]) / feat_std[static_cast<size_t>(i)];
      }
    }
  }

  const bool single = config.mode == ScorerMode::SingleSlice;
  const size_t dim = static_cast<size_t>(f) * n + (single ? static_cast<size_t>(n) : 0);
  const size_t param_count = dim * n + static_cast<size_t>(n);
  std::vector<double> theta(param_count, 0.0);
  std::vector<double> grads(param_count, 0.0);
  AdamState adam(param_count, config.lr, config.beta1, config.beta2, 1e-8);
  Rng rng(config.seed);

  std::vector<double> logits(static_cast<size_t>(n));
  std::vector<SoftTarget> targets(static_cast<size_t>(n));
  for (int t = 0; t < n; ++t) {
    targets[static_cast<size_t>(t)] = soft_target(t, n, config.cost, config.coeff);
  }

  for (int step = 0; step < config.steps; ++step) {
    std::fill(grads.begin(), grads.end(), 0.0);
    for (int b = 0; b < config.batch; ++b) {
      const size_t i = static_cast<size_t>(rng.uniform_int(0, static_cast<int>(count) - 1));
      const std::vector<double>& fs = feats[i];
      const double* bias = &theta[dim * static_cast<size_t>(n)];
      for (int j = 0; j < n; ++j) {
        logits[static_cast<size_t>(j)] = bias[j];
      }
      int obs = -1;
      if (single) {
        obs = rng.uniform_int(0, n - 1);
        for (int ii = 0; ii < f; ++ii) {
          const size_t d = static_cast<size_t>(obs) * f + ii;
          const double z = fs[d];
          const double* row = &theta[d * static_cast<size_t>(n)];
          for (int j = 0; j < n; ++j) {
            logits[static_cast<size_t>(j)] += z * row[j];
          }
        }
        const size_t ind = static_cast<size_t>(f) * n + static_cast<size_t>(obs);
        const double* row = &theta[ind * static_cast<size_t>(n)];
        for (int j = 0; j < n; ++j) {
          logits[static_cast<size_t>(j)] += row[j];
        }
      } else {
        for (size_t d = 0; d < fs.size(); ++d) {
          const double z = fs[d];
          if (z == 0.0) {
            continue;
          }
          const double* row = &theta[d * static_cast<size_t>(n)];
          for (int j = 0; j < n; ++j) {
            logits[static_cast<size_t>(j)] += z * row[j];
          }
        }
      }
      const OrdinalLossResult res =
          ordinal_loss(logits, targets[static_cast<size_t>(truth[i])]);
      if (single) {
        for (int ii = 0; ii < f; ++ii) {
          const size_t d = static_cast<size_t>(obs) * f + ii;
          const double z = fs[d];
          double* row = &grads[d * static_cast<size_t>(n)];
          for (int j = 0; j < n; ++j) {
            row[j] += z * res.grad[static_cast<size_t>(j)];
          }
        }
        const size_t ind = static_cast<size_t>(f) * n + static_cast<size_t>(obs);
        double* row = &grads[ind * static_cast<size_t>(n)];
        for (int j = 0; j < n; ++j) {
          row[j] += res.grad[static_cast<size_t>(j)];
        }
      } else {
        for (size_t d = 0; d < fs.size(); ++d) {
          const double z = fs[d];
          if (z == 0.0) {
            continue;
          }
          double* row = &grads[d * static_cast<size_t>(n)];
          for (int j = 0; j < n; ++j) {
            row[j] += z * res.grad[static_cast<size_t>(j)];
          }
        }
      }
      double* bias_grad = &grads[dim * static_cast<size_t>(n)];
      for (int j = 0; j < n; ++j) {
        bias_grad[j] += res.grad[static_cast<size_t>(j)];
      }
    }
    const double inv_batch = 1.0 / config.batch;
    for (double& g : grads) {
      g *= inv_batch;
    }
    adam_step(adam, theta, grads);
  }

  ShallowScorer scorer;
  scorer.feature_ids = scorer_feature_ids();
  scorer.n = n;
  scorer.mean.resize(dim, 0.0);
  scorer.std_dev.resize(dim, 1.0);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < f; ++i) {
      scorer.mean[static_cast<size_t>(k) * f + i] = feat_mean[static_cast<size_t>(i)];
      scorer.std_dev[static_cast<size_t>(k) * f + i] = feat_std[static_cast<size_t>(i)];
    }
  }
  scorer.weights.assign(theta.begin(), theta.begin() + static_cast<long>(dim * n));
  scorer.bias.assign(theta.begin() + static_cast<long>(dim * n), theta.end());
  scorer.validate();
  return scorer;
}

void save_scorer_json(const std::filesystem::path& path, const ShallowScorer& scorer) {
  scorer.validate();
  json j;
  j["feature_ids"] = scorer.feature_ids;
  j["n"] = scorer.n;
  j["mean"] = scorer.mean;
  j["std"] = scorer.std_dev;
  j["weights"] = scorer.weights;
  j["bias"] = scorer.bias;
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  }
  out << j.dump() << "\n";
  if (!out) {
    throw Error(ErrorKind::Io, "failed writing " + path.string());
  }
}

ShallowScorer load_scorer_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "malformed JSON in " + path.string() + ": " + e.what());
  }
  ShallowScorer scorer;
  try {
    scorer.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    scorer.n = j.at("n").get<int>();
    scorer.mean = j.at("mean").get<std::vector<double>>();
    scorer.std_dev = j.at("std").get<std::vector<double>>();
    scorer.weights = j.at("weights").get<std::vector<double>>();
    scorer.bias = j.at("bias").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "bad fields in " + path.string() + ": " + e.what());
  }
  try {
    scorer.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Data, path.string() + ": " + e.what());
  }
  return scorer;
}

TrainConfig load_train_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "malformed JSON in " + path.string() + ": " + e.what());
  }
  TrainConfig cfg;
  try {
    cfg.steps = j.value("steps", cfg.steps);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.beta2 = j.value("beta2", cfg.beta2);
    cfg.coeff = j.value("coeff", cfg.coeff);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("cost")) {
      const std::string c = j.at("cost").get<std::string>();
      if (c == "l1") {
        cfg.cost = CostKind::L1;
      } else if (c == "l2") {
        cfg.cost = CostKind::L2;
      } else {
        throw Error(ErrorKind::Data, "unknown cost in " + path.string() + ": " + c);
      }
    }
    if (j.contains("mode")) {
      const std::string m = j.at("mode").get<std::string>();
      if (m == "full_stack") {
        cfg.mode = ScorerMode::FullStack;
      } else if (m == "single_slice") {
        cfg.mode = ScorerMode::SingleSlice;
      } else {
        throw Error(ErrorKind::Data, "unknown mode in " + path.string() + ": " + m);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Data, "bad fields in " + path.string() + ": " + e.what());
  }
  return cfg;
}

}  // namespace afbench
