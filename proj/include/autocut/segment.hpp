#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "autocut/featstore.hpp"

namespace autocut {

inline constexpr double kDefaultThresholdK = 3.0;

/// A contiguous run of frames [start_frame, end_frame] (positions within the
/// stream) with aggregated attributes.
struct Shot {
  std::size_t shot_id = 0;
  std::string source_id;
  std::size_t start_frame = 0;
  std::size_t end_frame = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
  std::vector<double> semantic;
  int shot_size_class = 0;
  std::array<double, kShotSizeClasses> shot_size_vec{};
  double aesthetic = 0.0;

  double end_s() const { return start_s + duration_s; }
  bool operator==(const Shot&) const = default;
};

/// Euclidean distances between consecutive frames; entry i-1 is d_i, the
/// distance between frames i-1 and i.
std::vector<double> neighbor_distances(const FeatureStream& stream);

/// Cut threshold mu + k * sigma over the consecutive distances (population
/// standard deviation). +inf when k is +inf.
double boundary_threshold(std::span<const double> distances, double threshold_k);

/// Frame indices i where d_i exceeds the adaptive threshold; a boundary at i
/// means a cut between frames i-1 and i.
std::vector<std::size_t> detect_boundaries(const FeatureStream& stream,
                                           double threshold_k = kDefaultThresholdK);

/// Lower median: element floor((n-1)/2) of the sorted values.
double lower_median(std::vector<double> values);

std::vector<Shot> aggregate_shots(const FeatureStream& stream, std::span<const std::size_t> boundaries);

inline std::vector<Shot> segment_stream(const FeatureStream& stream, double threshold_k = kDefaultThresholdK) {
  const auto b = detect_boundaries(stream, threshold_k);
  return aggregate_shots(stream, b);
}

/// `.shots.jsonl`: header {source_id, fps_sampled, dim_semantic, shot_count}
/// followed by one Shot per line.
struct ShotFile {
  std::string source_id;
  double fps_sampled = 0.0;
  std::size_t dim_semantic = 0;
  std::vector<Shot> shots;

  bool operator==(const ShotFile&) const = default;
};

ShotFile make_shot_file(const FeatureStream& stream, std::vector<Shot> shots);
void write_shots(const ShotFile& file, const std::filesystem::path& path);
ShotFile read_shots(const std::filesystem::path& path);

}  // namespace autocut
