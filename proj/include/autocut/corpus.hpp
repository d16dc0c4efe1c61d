#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autocut/labels.hpp"
#include "autocut/segment.hpp"

namespace autocut {

enum class Provenance : std::uint8_t { kReference, kForeign, kLowAesthetic };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Imitation-learning training unit: shots with one expert label each.
struct LabeledClip {
  std::string clip_id;
  std::vector<Shot> shots;
  std::vector<ActionLabel> labels;
  std::vector<Provenance> provenance;

  bool operator==(const LabeledClip&) const = default;
};

inline constexpr double kDefaultTargetSeconds = 120.0;
inline constexpr std::size_t kDefaultVariants = 40;
inline constexpr double kDefaultAestheticThreshold = 0.1;
inline constexpr double kMaxForeignFraction = 0.3;

/// Half-open buckets: (0,1) -> 1, [1,3) -> 2, [3,9) -> 3, [9,inf) -> 4.
ActionLabel duration_to_label(double duration_s);

/// Throws Error when sizes disagree, the clip is empty, or a foreign /
/// low-aesthetic shot is not labeled kSkip.
void validate_clip(const LabeledClip& clip);

/// Greedily accumulates consecutive shots until the running duration reaches
/// target_s, then starts a new clip. Every shot gets its duration label.
std::vector<LabeledClip> assemble_clips(std::span<const Shot> shots, double target_s = kDefaultTargetSeconds);

/// Relabels every shot whose aesthetic is below threshold as kSkip.
void apply_aesthetic_rule(LabeledClip& clip, double threshold);

/// Produces n_variants copies of clip, each with m foreign shots (m uniform
/// in 1..max(1, ceil(max_foreign_fraction |clip|))) drawn with replacement
/// from foreign_pool and inserted at uniform positions. The aesthetic rule is
/// applied afterwards.
std::vector<LabeledClip> augment_clip(const LabeledClip& clip, std::span<const Shot> foreign_pool,
                                      std::size_t n_variants, double aesthetic_threshold,
                                      std::uint64_t seed, double max_foreign_fraction = kMaxForeignFraction);

struct CorpusConfig {
  double target_seconds = kDefaultTargetSeconds;
  std::size_t variants = kDefaultVariants;
  double aesthetic_threshold = kDefaultAestheticThreshold;
  std::uint64_t seed = 0;
  double max_foreign_fraction = kMaxForeignFraction;
  bool keep_originals = true;
};

struct CorpusManifest {
  CorpusConfig config;
  std::vector<std::string> sources;
  std::size_t reference_clips = 0;
  std::size_t variant_clips = 0;
  std::size_t total_clips = 0;
  std::size_t total_shots = 0;
  std::array<std::size_t, kNumActions> label_counts{};
  std::array<std::size_t, 3> provenance_counts{};
};

struct Corpus {
  std::vector<LabeledClip> clips;
  CorpusManifest manifest;
};

/// assemble -> aesthetic rule -> augment (pool = shots of every other file)
/// -> seeded shuffle. Originals are kept unless keep_originals is off. Needs at least two files.
Corpus build_corpus(std::span<const ShotFile> files, const CorpusConfig& config);
Corpus build_corpus(std::span<const std::filesystem::path> shot_files, const CorpusConfig& config);

/// `.corpus.jsonl` with its `.corpus.manifest.json` sibling.
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
std::vector<LabeledClip> read_corpus(const std::filesystem::path& path);

}  // namespace autocut
