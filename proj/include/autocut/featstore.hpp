#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autocut {

inline constexpr std::size_t kRawSemanticDim = 1024;
inline constexpr std::size_t kReducedSemanticDim = 64;
inline constexpr std::size_t kAestheticDim = 2;
inline constexpr std::size_t kShotSizeClasses = 3;

/// One sampled frame. shot_size is a distribution over (close-up, medium,
/// long); aesthetic[0] is read as P(high quality).
struct FrameFeature {
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;
  std::vector<double> semantic;
  std::array<double, kAestheticDim> aesthetic{};
  std::array<double, kShotSizeClasses> shot_size{};

  bool operator==(const FrameFeature&) const = default;
};

struct FeatureStream {
  std::string source_id;
  double fps_sampled = 0.0;
  std::size_t dim_semantic = 0;
  std::vector<FrameFeature> frames;
  /// Header-level flags set by the extractor (e.g. a proxy shot-size model).
  std::vector<std::string> warnings;

  bool operator==(const FeatureStream&) const = default;
};

/// Throws FormatError naming the offending frame when any stream invariant
/// fails: dimension, finiteness, ranges, distribution sums, monotone
/// timestamps and frame indices, non-empty frames.
void validate_stream(const FeatureStream& stream);

/// `.feat.jsonl`: a JSON header line {source_id, fps_sampled, dim_semantic,
/// frame_count[, warnings]} followed by one JSON object per frame.
FeatureStream parse_stream(std::istream& in, std::string_view origin = "stream");
FeatureStream read_stream(const std::filesystem::path& path);
void write_stream(const FeatureStream& stream, std::ostream& out);
void write_stream(const FeatureStream& stream, const std::filesystem::path& path);

/// One planted segment of a synthetic stream. When `center` is empty a
/// random direction of length ScenarioSpec::center_norm is drawn.
struct SegmentSpec {
  std::optional<std::vector<double>> center;
  double noise = 0.0;
  std::size_t frames = 0;
  double aesthetic = 0.5;
  int shot_size_class = 1;
};

struct ScenarioSpec {
  std::string source_id = "synthetic";
  double fps = 4.0;
  std::size_t dim = kReducedSemanticDim;
  double center_norm = 1.0;
  std::vector<SegmentSpec> segments;
};

ScenarioSpec parse_scenario(std::string_view json_text);
ScenarioSpec read_scenario(const std::filesystem::path& path);
std::string scenario_json(const ScenarioSpec& spec);
void write_scenario(const ScenarioSpec& spec, const std::filesystem::path& path);

/// Deterministic synthetic stream: each frame is its segment center plus a
/// noise vector of Euclidean norm at most `noise`. Adjacent centers must be
/// at least 10x the larger noise scale apart.
FeatureStream synth_stream(const ScenarioSpec& spec, std::uint64_t seed);

/// Frame indices where synth_stream starts a new segment.
std::vector<std::size_t> planted_boundaries(const ScenarioSpec& spec);

}  // namespace autocut
