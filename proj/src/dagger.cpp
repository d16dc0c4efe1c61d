#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "autocut/error.hpp"
#include "autocut/policy.hpp"
#include "autocut/rng.hpp"

namespace autocut {

namespace {

constexpr std::uint64_t kSplitStream = 0x5EED5;
constexpr std::uint64_t kTrainStream = 0x7A1A;

StateLayout layout_for(std::span<const LabeledClip> corpus, bool extra_features) {
  StateLayout layout;
  layout.extra_features = extra_features;
  layout.semantic_dim = corpus.front().shots.front().semantic.size();
  for (const LabeledClip& c : corpus) {
    validate_clip(c);
    for (const Shot& s : c.shots)
      if (s.semantic.size() != layout.semantic_dim)
        throw Error("dagger: clip " + c.clip_id + " mixes semantic dimensions");
  }
  return layout;
}

}  // namespace

void split_corpus(std::size_t n_clips, double holdout_fraction, std::uint64_t seed,
                  std::vector<std::size_t>& train, std::vector<std::size_t>& heldout) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw Error("dagger: holdout fraction must be in (0, 1)");
  if (n_clips < 2) throw Error("dagger: corpus too small to split (" + std::to_string(n_clips) + " clips)");
  const auto n_held = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(n_clips))));
  if (n_held >= n_clips) throw Error("dagger: corpus too small to split at the requested holdout fraction");

  std::vector<std::size_t> perm(n_clips);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(seed, kSplitStream));
  for (std::size_t i = n_clips; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_index(i)]);
  heldout.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_held));
  train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_held), perm.end());
  std::sort(heldout.begin(), heldout.end());
  std::sort(train.begin(), train.end());
}

DaggerResult dagger_train(std::span<const LabeledClip> corpus, const DaggerOptions& options) {
  if (corpus.empty()) throw Error("dagger: empty corpus");
  if (options.iterations < 1) throw Error("dagger: need at least one iteration");
  const StateLayout layout = layout_for(corpus, options.extra_features);

  DaggerResult result;
  split_corpus(corpus.size(), options.holdout_fraction, options.seed, result.train_indices, result.heldout_indices);
  std::vector<LabeledClip> heldout;
  heldout.reserve(result.heldout_indices.size());
  double heldout_shots = 0.0;
  for (std::size_t i : result.heldout_indices) {
    heldout.push_back(corpus[i]);
    heldout_shots += static_cast<double>(corpus[i].shots.size());
  }
  result.heldout_mean_length = heldout_shots / static_cast<double>(heldout.size());

  AggregatedDataset data(layout);
  Policy learner;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<ActionLabel> rolled;
  for (std::size_t it = 1; it <= options.iterations; ++it) {
    for (std::size_t ci : result.train_indices) {
      const LabeledClip& clip = corpus[ci];
      rolled.clear();
      for (std::size_t t = 0; t < clip.shots.size(); ++t) {
        data.add_visit(clip.shots, t, rolled, hamming_costs(clip.labels[t]));
        const ActionLabel action =
            it == 1 ? clip.labels[t] : predict(learner, build_state(clip.shots, t, rolled, layout));
        rolled.push_back(action);
      }
    }

    learner = train_csc(data, {options.epochs_per_iteration, options.learning_rate, derive_seed(options.seed, kTrainStream + it)});
    learner.trained_iterations = it;

    DaggerIteration rec;
    rec.iteration = it;
    rec.dataset_size = data.size();
    rec.heldout_loss = mean_sequence_loss(learner, heldout);
    rec.heldout_shot_error = rec.heldout_loss / result.heldout_mean_length;
    result.trace.push_back(rec);
    if (rec.heldout_loss < best_loss) {
      best_loss = rec.heldout_loss;
      result.policy = learner;
      result.best_iteration = it;
    }
  }

  TrainingInfo& info = result.policy.training;
  info.iterations = options.iterations;
  info.epochs_per_iteration = options.epochs_per_iteration;
  info.learning_rate = options.learning_rate;
  info.holdout_fraction = options.holdout_fraction;
  info.seed = options.seed;
  info.heldout_trace.clear();
  for (const auto& r : result.trace) info.heldout_trace.push_back(r.heldout_loss);
  return result;
}

}  // namespace autocut
