#include "autocut/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autocut/error.hpp"
#include "autocut/rng.hpp"
#include "jsonl.hpp"

namespace autocut {

using jsonl::json;

namespace {

constexpr const char* kPolicyFormat = "autocut.policy/1";

// Window slot j covers the shot at offset j - kPastShots from t.
const Shot* slot_shot(std::span<const Shot> shots, std::size_t t, std::size_t slot) {
  const auto pos = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(slot) -
                   static_cast<std::ptrdiff_t>(kPastShots);
  if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(shots.size())) return nullptr;
  return &shots[static_cast<std::size_t>(pos)];
}

}  // namespace

std::vector<double> build_state(std::span<const Shot> shots, std::size_t t, std::span<const ActionLabel> history,
                                const StateLayout& layout) {
  if (t >= shots.size())
    throw Error("state: position " + std::to_string(t) + " out of range for " + std::to_string(shots.size()) +
                " shots");
  std::vector<double> s(layout.size(), 0.0);
  const std::size_t h = std::min(kHistorySpan, history.size());
  for (std::size_t k = 0; k < h; ++k) {
    const ActionLabel a = history[history.size() - 1 - k];
    s[k * kNumActions + label_index(a)] = 1.0;
  }
  for (std::size_t slot = 0; slot < kShotWindow; ++slot) {
    const Shot* shot = slot_shot(shots, t, slot);
    if (shot == nullptr) continue;
    if (shot->semantic.size() != layout.semantic_dim)
      throw Error("state: shot semantic dimension " + std::to_string(shot->semantic.size()) + " but layout expects " +
                  std::to_string(layout.semantic_dim));
    std::copy(shot->semantic.begin(), shot->semantic.end(),
              s.begin() + static_cast<std::ptrdiff_t>(layout.semantic_offset(slot)));
    if (layout.extra_features) {
      const auto base = static_cast<std::ptrdiff_t>(layout.extra_offset(slot));
      std::copy(shot->shot_size_vec.begin(), shot->shot_size_vec.end(), s.begin() + base);
      s[static_cast<std::size_t>(base) + kShotSizeClasses] = shot->aesthetic;
    }
  }
  return s;
}

CostVector hamming_costs(ActionLabel expert) {
  CostVector c;
  c.fill(1.0);
  c[label_index(expert)] = 0.0;
  return c;
}

Policy Policy::zeros(const StateLayout& layout) {
  Policy p;
  p.layout = layout;
  for (auto& w : p.weights) w.assign(layout.size(), 0.0);
  return p;
}

CostVector predict_costs(const Policy& policy, std::span<const double> state) {
  if (state.size() != policy.layout.size())
    throw Error("predict: state has " + std::to_string(state.size()) + " entries, policy expects " +
                std::to_string(policy.layout.size()));
  CostVector c;
  for (std::size_t a = 0; a < kNumActions; ++a)
    c[a] = std::inner_product(state.begin(), state.end(), policy.weights[a].begin(), policy.bias[a]);
  return c;
}

ActionLabel predict(const Policy& policy, std::span<const double> state) {
  const CostVector c = predict_costs(policy, state);
  std::size_t best = 0;
  for (std::size_t a = 1; a < kNumActions; ++a)
    if (c[a] < c[best]) best = a;
  return label_at(best);
}

AggregatedDataset::AggregatedDataset(StateLayout layout) : layout_(layout) {}

void AggregatedDataset::add(std::vector<double> state, const CostVector& cost) {
  if (state.size() != layout_.size())
    throw Error("dataset: state has " + std::to_string(state.size()) + " entries, layout expects " +
                std::to_string(layout_.size()));
  Entry e;
  e.index = static_cast<std::uint32_t>(dense_.size());
  for (std::size_t a = 0; a < kNumActions; ++a) e.cost[a] = static_cast<float>(cost[a]);
  dense_.push_back(std::move(state));
  entries_.push_back(e);
}

void AggregatedDataset::add_visit(std::span<const Shot> shots, std::size_t t, std::span<const ActionLabel> history,
                                  const CostVector& cost) {
  if (t >= shots.size()) throw Error("dataset: visit position out of range");
  Entry e;
  e.shots = shots.data();
  e.n_shots = static_cast<std::uint32_t>(shots.size());
  e.index = static_cast<std::uint32_t>(t);
  const std::size_t h = std::min(kHistorySpan, history.size());
  for (std::size_t k = 0; k < h; ++k)
    e.history[k] = static_cast<std::uint8_t>(label_value(history[history.size() - 1 - k]));
  for (std::size_t a = 0; a < kNumActions; ++a) e.cost[a] = static_cast<float>(cost[a]);
  entries_.push_back(e);
}

CostVector AggregatedDataset::cost(std::size_t i) const {
  CostVector c;
  for (std::size_t a = 0; a < kNumActions; ++a) c[a] = entries_.at(i).cost[a];
  return c;
}

template <typename Fn>
void AggregatedDataset::for_each_block(const Entry& e, Fn&& fn) const {
  if (e.shots == nullptr) {
    const auto& v = dense_[e.index];
    fn(std::size_t{0}, v.data(), v.size());
    return;
  }
  static constexpr double kOne = 1.0;
  for (std::size_t k = 0; k < kHistorySpan; ++k)
    if (e.history[k] != 0) fn(k * kNumActions + e.history[k] - 1, &kOne, std::size_t{1});
  const std::span<const Shot> shots(e.shots, e.n_shots);
  for (std::size_t slot = 0; slot < kShotWindow; ++slot) {
    const Shot* shot = slot_shot(shots, e.index, slot);
    if (shot == nullptr) continue;
    fn(layout_.semantic_offset(slot), shot->semantic.data(), layout_.semantic_dim);
    if (layout_.extra_features) {
      fn(layout_.extra_offset(slot), shot->shot_size_vec.data(), kShotSizeClasses);
      fn(layout_.extra_offset(slot) + kShotSizeClasses, &shot->aesthetic, std::size_t{1});
    }
  }
}

std::vector<double> AggregatedDataset::state(std::size_t i) const {
  std::vector<double> s(layout_.size(), 0.0);
  for_each_block(entries_.at(i), [&](std::size_t off, const double* data, std::size_t n) {
    std::copy(data, data + n, s.begin() + static_cast<std::ptrdiff_t>(off));
  });
  return s;
}

double AggregatedDataset::dot(std::size_t i, std::span<const double> weights) const {
  double acc = 0.0;
  for_each_block(entries_[i], [&](std::size_t off, const double* data, std::size_t n) {
    const double* w = weights.data() + off;
    for (std::size_t k = 0; k < n; ++k) acc += w[k] * data[k];
  });
  return acc;
}

void AggregatedDataset::axpy(std::size_t i, double scale, std::span<double> weights) const {
  for_each_block(entries_[i], [&](std::size_t off, const double* data, std::size_t n) {
    double* w = weights.data() + off;
    for (std::size_t k = 0; k < n; ++k) w[k] += scale * data[k];
  });
}

Policy train_csc(const AggregatedDataset& dataset, const CscOptions& options) {
  if (dataset.empty()) throw Error("train: empty dataset");
  if (!(options.learning_rate >= 0.0) || !std::isfinite(options.learning_rate))
    throw Error("train: learning rate must be finite and non-negative");
  Policy policy = Policy::zeros(dataset.layout());
  policy.trained_iterations = 1;
  policy.training.epochs_per_iteration = options.epochs;
  policy.training.learning_rate = options.learning_rate;
  policy.training.seed = options.seed;
  if (options.learning_rate == 0.0) return policy;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(options.seed);
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    for (std::size_t i : order) {
      ++step;
      const double eta = options.learning_rate / std::sqrt(static_cast<double>(step));
      const CostVector target = dataset.cost(i);
      for (std::size_t a = 0; a < kNumActions; ++a) {
        const double pred = dataset.dot(i, policy.weights[a]) + policy.bias[a];
        const double grad = pred - target[a];
        if (!std::isfinite(grad))
          throw Error("train: non-finite update at step " + std::to_string(step) + " (action " +
                      std::to_string(a + 1) + "); learning rate " + std::to_string(options.learning_rate) +
                      " is too high");
        dataset.axpy(i, -eta * grad, policy.weights[a]);
        policy.bias[a] -= eta * grad;
      }
    }
  }
  for (const auto& w : policy.weights)
    for (double x : w)
      if (!std::isfinite(x)) throw Error("train: non-finite weights after training; lower the learning rate");
  return policy;
}

std::size_t hamming_loss(std::span<const ActionLabel> predicted, std::span<const ActionLabel> expert) {
  if (predicted.size() != expert.size())
    throw Error("hamming_loss: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                std::to_string(expert.size()) + ")");
  std::size_t loss = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) loss += predicted[i] != expert[i] ? 1 : 0;
  return loss;
}

std::vector<ActionLabel> rollout(const Policy& policy, std::span<const Shot> shots) {
  std::vector<ActionLabel> out;
  out.reserve(shots.size());
  for (std::size_t t = 0; t < shots.size(); ++t)
    out.push_back(predict(policy, build_state(shots, t, out, policy.layout)));
  return out;
}

double mean_sequence_loss(const Policy& policy, std::span<const LabeledClip> clips) {
  if (clips.empty()) throw Error("mean_sequence_loss: no clips");
  double total = 0.0;
  for (const LabeledClip& c : clips) total += static_cast<double>(hamming_loss(rollout(policy, c.shots), c.labels));
  return total / static_cast<double>(clips.size());
}

void save_policy(const Policy& policy, const std::filesystem::path& path) {
  for (const auto& w : policy.weights) {
    if (w.size() != policy.layout.size()) throw Error("policy: weight vector does not match the layout");
    jsonl::require_finite(w, "policy weights");
  }
  jsonl::require_finite(policy.bias, "policy bias");
  const TrainingInfo& t = policy.training;
  json j = {{"format", kPolicyFormat},
            {"fitted", policy.fitted()},
            {"semantic_dim", policy.layout.semantic_dim},
            {"extra_features", policy.layout.extra_features},
            {"state_dim", policy.layout.size()},
            {"trained_iterations", policy.trained_iterations},
            {"bias", policy.bias},
            {"weights", policy.weights},
            {"training",
             {{"iterations", t.iterations},
              {"epochs_per_iteration", t.epochs_per_iteration},
              {"learning_rate", t.learning_rate},
              {"holdout_fraction", t.holdout_fraction},
              {"seed", t.seed},
              {"corpus_hash", t.corpus_hash},
              {"heldout_trace", t.heldout_trace}}}};
  jsonl::write_file_atomic(path, [&](std::ostream& out) { out << jsonl::dump(j) << '\n'; });
}

Policy load_policy(const std::filesystem::path& path) {
  const json j = jsonl::parse_json_file(path, "policy");
  const std::string ctx = "policy " + path.string();
  if (j.value("format", std::string()) != kPolicyFormat) throw FormatError(ctx + ": unknown format");
  StateLayout layout;
  const auto dim = jsonl::integer_field(j, "semantic_dim", ctx);
  if (dim <= 0) throw FormatError(ctx + ": semantic_dim must be positive");
  layout.semantic_dim = static_cast<std::size_t>(dim);
  layout.extra_features = jsonl::field(j, "extra_features", ctx).get<bool>();
  if (jsonl::integer_field(j, "state_dim", ctx) != static_cast<std::int64_t>(layout.size()))
    throw FormatError(ctx + ": state_dim does not match the layout");
  Policy p = Policy::zeros(layout);
  const auto iters = jsonl::integer_field(j, "trained_iterations", ctx);
  if (iters < 0) throw FormatError(ctx + ": trained_iterations must be >= 0");
  p.trained_iterations = static_cast<std::size_t>(iters);
  const auto bias = jsonl::vector_field(j, "bias", ctx);
  const json& weights = jsonl::field(j, "weights", ctx);
  if (bias.size() != kNumActions || !weights.is_array() || weights.size() != kNumActions)
    throw FormatError(ctx + ": expected 5 weight vectors and 5 biases");
  std::copy(bias.begin(), bias.end(), p.bias.begin());
  for (std::size_t a = 0; a < kNumActions; ++a) {
    auto w = jsonl::vector_field(json{{"w", weights[a]}}, "w", ctx);
    if (w.size() != layout.size()) throw FormatError(ctx + ": weight vector has the wrong length");
    p.weights[a] = std::move(w);
  }
  if (auto it = j.find("training"); it != j.end() && it->is_object()) {
    const json& t = *it;
    p.training.iterations = t.value("iterations", std::size_t{0});
    p.training.epochs_per_iteration = t.value("epochs_per_iteration", std::size_t{0});
    p.training.learning_rate = t.value("learning_rate", 0.0);
    p.training.holdout_fraction = t.value("holdout_fraction", 0.0);
    p.training.seed = t.value("seed", std::uint64_t{0});
    p.training.corpus_hash = t.value("corpus_hash", std::string());
    p.training.heldout_trace = t.value("heldout_trace", std::vector<double>{});
  }
  return p;
}

}  // namespace autocut
