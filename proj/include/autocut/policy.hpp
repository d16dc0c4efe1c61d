#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "autocut/corpus.hpp"
#include "autocut/labels.hpp"
#include "autocut/segment.hpp"

namespace autocut {

inline constexpr std::size_t kHistorySpan = 6;
inline constexpr std::size_t kPastShots = 6;
inline constexpr std::size_t kFutureShots = 3;
inline constexpr std::size_t kShotWindow = kPastShots + 1 + kFutureShots;
/// shot_size_vec (3) + aesthetic (1) per window slot when extras are on.
inline constexpr std::size_t kExtraPerShot = 4;

/// State vector layout:
///   [onehot(a_{t-1}) ... onehot(a_{t-6}) | sem_{t-6} ... sem_t ... sem_{t+3} | extras]
/// Missing history and out-of-range shots are zero. 670 entries for 64-dim
/// semantics without extras.
struct StateLayout {
  std::size_t semantic_dim = kReducedSemanticDim;
  bool extra_features = false;

  static constexpr std::size_t history_size() { return kHistorySpan * kNumActions; }
  std::size_t semantic_offset(std::size_t slot) const { return history_size() + slot * semantic_dim; }
  std::size_t extra_offset(std::size_t slot) const {
    return history_size() + kShotWindow * semantic_dim + slot * kExtraPerShot;
  }
  std::size_t size() const {
    return history_size() + kShotWindow * semantic_dim + (extra_features ? kShotWindow * kExtraPerShot : 0);
  }
  bool operator==(const StateLayout&) const = default;
};

/// `history` holds the actions taken so far, oldest first; only the most
/// recent kHistorySpan are encoded.
std::vector<double> build_state(std::span<const Shot> shots, std::size_t t, std::span<const ActionLabel> history,
                                const StateLayout& layout = {});

using CostVector = std::array<double, kNumActions>;

/// Hamming costing: 0 for the expert action, 1 for every other.
CostVector hamming_costs(ActionLabel expert);

struct TrainingInfo {
  std::size_t iterations = 0;
  std::size_t epochs_per_iteration = 0;
  double learning_rate = 0.0;
  double holdout_fraction = 0.0;
  std::uint64_t seed = 0;
  std::string corpus_hash;
  std::vector<double> heldout_trace;

  bool operator==(const TrainingInfo&) const = default;
};

/// Linear cost-sensitive controller: one weight vector and bias per action;
/// the predicted action minimizes w_a . s + b_a.
struct Policy {
  StateLayout layout;
  std::array<std::vector<double>, kNumActions> weights;
  std::array<double, kNumActions> bias{};
  std::size_t trained_iterations = 0;
  TrainingInfo training;

  static Policy zeros(const StateLayout& layout);
  bool fitted() const { return trained_iterations > 0; }
  bool operator==(const Policy&) const = default;
};

CostVector predict_costs(const Policy& policy, std::span<const double> state);

/// Argmin over predicted costs, ties to the smallest label.
ActionLabel predict(const Policy& policy, std::span<const double> state);

/// Training examples accumulated across DAGGER iterations.
///
/// Rollout states are stored as references into shot sequences plus the
/// 6-action history and materialized on demand, so the aggregate stays
/// small. Shot sequences passed to add_visit must outlive the dataset.
class AggregatedDataset {
 public:
  explicit AggregatedDataset(StateLayout layout = {});

  void add(std::vector<double> state, const CostVector& cost);
  void add_visit(std::span<const Shot> shots, std::size_t t, std::span<const ActionLabel> history,
                 const CostVector& cost);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const StateLayout& layout() const { return layout_; }
  CostVector cost(std::size_t i) const;
  std::vector<double> state(std::size_t i) const;

  /// w . s_i for a weight vector of layout().size() entries.
  double dot(std::size_t i, std::span<const double> weights) const;
  /// weights += scale * s_i.
  void axpy(std::size_t i, double scale, std::span<double> weights) const;

 private:
  struct Entry {
    const Shot* shots = nullptr;  // null for explicit states
    std::uint32_t n_shots = 0;
    std::uint32_t index = 0;      // position in shots, or row of dense_
    std::array<std::uint8_t, kHistorySpan> history{};  // most recent first, 0 = none
    std::array<float, kNumActions> cost{};
  };

  template <typename Fn>
  void for_each_block(const Entry& e, Fn&& fn) const;

  StateLayout layout_;
  std::vector<Entry> entries_;
  std::vector<std::vector<double>> dense_;
};

struct CscOptions {
  std::size_t epochs = 1;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

/// One-against-all squared-loss regression of each action's cost by online
/// gradient descent over a seeded shuffle, step size lr / sqrt(t). Starts
/// from zeros. Throws Error on an empty dataset or a non-finite update.
Policy train_csc(const AggregatedDataset& dataset, const CscOptions& options);

std::size_t hamming_loss(std::span<const ActionLabel> predicted, std::span<const ActionLabel> expert);

/// Left-to-right greedy decoding; each state's history is the policy's own
/// earlier predictions.
std::vector<ActionLabel> rollout(const Policy& policy, std::span<const Shot> shots);

/// Mean per-sequence Hamming loss of rollout() against the expert labels.
double mean_sequence_loss(const Policy& policy, std::span<const LabeledClip> clips);

inline constexpr std::size_t kDefaultDaggerIterations = 32;
inline constexpr double kDefaultLearningRate = 0.05;
inline constexpr double kDefaultHoldoutFraction = 0.1;

struct DaggerOptions {
  std::size_t iterations = kDefaultDaggerIterations;
  std::size_t epochs_per_iteration = 1;
  double learning_rate = kDefaultLearningRate;
  double holdout_fraction = kDefaultHoldoutFraction;
  std::uint64_t seed = 0;
  bool extra_features = false;
};

struct DaggerIteration {
  std::size_t iteration = 0;
  std::size_t dataset_size = 0;
  double heldout_loss = 0.0;
  double heldout_shot_error = 0.0;
};

struct DaggerResult {
  Policy policy;
  std::vector<DaggerIteration> trace;
  std::size_t best_iteration = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> heldout_indices;
  double heldout_mean_length = 0.0;
};

/// Seeded train / held-out split of clip indices. Throws when either side
/// would be empty.
void split_corpus(std::size_t n_clips, double holdout_fraction, std::uint64_t seed,
                  std::vector<std::size_t>& train, std::vector<std::size_t>& heldout);

/// DAGGER with an expert roll-in on iteration 1 and learner roll-ins after;
/// every visited state is added with Hamming costs and the policy is
/// retrained on the aggregate. Returns the iteration with the lowest
/// held-out loss.
DaggerResult dagger_train(std::span<const LabeledClip> corpus, const DaggerOptions& options);

/// `.policy.json`
void save_policy(const Policy& policy, const std::filesystem::path& path);
Policy load_policy(const std::filesystem::path& path);

}  // namespace autocut
