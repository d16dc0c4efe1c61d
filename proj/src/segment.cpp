#include "autocut/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "autocut/error.hpp"
#include "shot_json.hpp"

namespace autocut {

using jsonl::json;

std::vector<double> neighbor_distances(const FeatureStream& stream) {
  const auto& frames = stream.frames;
  if (frames.size() < 2) throw Error("segment: stream needs at least 2 frames");
  std::vector<double> d(frames.size() - 1);
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const auto& a = frames[i - 1].semantic;
    const auto& b = frames[i].semantic;
    if (a.size() != b.size()) throw Error("segment: frame " + std::to_string(i) + " has a different semantic dimension");
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d2 += (b[k] - a[k]) * (b[k] - a[k]);
    d[i - 1] = std::sqrt(d2);
  }
  return d;
}

double boundary_threshold(std::span<const double> distances, double threshold_k) {
  if (std::isnan(threshold_k)) throw Error("segment: threshold_k is NaN");
  if (std::isinf(threshold_k)) return threshold_k;
  if (distances.empty()) return std::numeric_limits<double>::infinity();
  const double n = static_cast<double>(distances.size());
  double mean = 0.0;
  for (double x : distances) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : distances) var += (x - mean) * (x - mean);
  var /= n;
  return mean + threshold_k * std::sqrt(var);
}

std::vector<std::size_t> detect_boundaries(const FeatureStream& stream, double threshold_k) {
  const auto d = neighbor_distances(stream);
  const double tau = boundary_threshold(d, threshold_k);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > tau) out.push_back(i + 1);
  return out;
}

double lower_median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty set");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

std::vector<Shot> aggregate_shots(const FeatureStream& stream, std::span<const std::size_t> boundaries) {
  const std::size_t n = stream.frames.size();
  if (n == 0) throw Error("segment: empty stream");
  for (std::size_t j = 0; j < boundaries.size(); ++j) {
    if (boundaries[j] == 0 || boundaries[j] >= n)
      throw Error("segment: boundary " + std::to_string(boundaries[j]) + " out of range (0, " +
                  std::to_string(n) + ")");
    if (j > 0 && boundaries[j] <= boundaries[j - 1]) throw Error("segment: boundaries not strictly increasing");
  }
  if (!(stream.fps_sampled > 0.0)) throw Error("segment: stream fps_sampled must be positive");

  std::vector<std::size_t> starts{0};
  starts.insert(starts.end(), boundaries.begin(), boundaries.end());

  std::vector<Shot> shots;
  shots.reserve(starts.size());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const std::size_t first = starts[s];
    const std::size_t last = s + 1 < starts.size() ? starts[s + 1] - 1 : n - 1;
    const std::size_t count = last - first + 1;
    const auto& f0 = stream.frames[first];

    Shot shot;
    shot.shot_id = s;
    shot.source_id = stream.source_id;
    shot.start_frame = first;
    shot.end_frame = last;
    shot.start_s = f0.timestamp_s;
    const double close = s + 1 < starts.size() ? stream.frames[last + 1].timestamp_s
                                               : stream.frames[last].timestamp_s + 1.0 / stream.fps_sampled;
    shot.duration_s = close - shot.start_s;

    shot.semantic.assign(f0.semantic.size(), 0.0);
    for (std::size_t i = first; i <= last; ++i) {
      const auto& v = stream.frames[i].semantic;
      for (std::size_t k = 0; k < v.size(); ++k) shot.semantic[k] += v[k];
    }
    for (double& x : shot.semantic) x /= static_cast<double>(count);

    std::vector<double> column(count);
    double size_sum = 0.0;
    for (std::size_t c = 0; c < kShotSizeClasses; ++c) {
      for (std::size_t i = 0; i < count; ++i) column[i] = stream.frames[first + i].shot_size[c];
      shot.shot_size_vec[c] = lower_median(column);
      size_sum += shot.shot_size_vec[c];
    }
    if (size_sum > 0.0) {
      for (double& p : shot.shot_size_vec) p /= size_sum;
    } else {
      // Component-wise medians can all be zero when frames disagree; fall back
      // to the mean distribution, which always sums to 1.
      shot.shot_size_vec.fill(0.0);
      for (std::size_t i = first; i <= last; ++i)
        for (std::size_t c = 0; c < kShotSizeClasses; ++c)
          shot.shot_size_vec[c] += stream.frames[i].shot_size[c] / static_cast<double>(count);
    }
    shot.shot_size_class = static_cast<int>(
        std::max_element(shot.shot_size_vec.begin(), shot.shot_size_vec.end()) - shot.shot_size_vec.begin());

    for (std::size_t i = 0; i < count; ++i) column[i] = stream.frames[first + i].aesthetic[0];
    shot.aesthetic = lower_median(column);
    shots.push_back(std::move(shot));
  }
  return shots;
}

namespace detail {

json shot_to_json(const Shot& shot) {
  return {{"shot_id", shot.shot_id},
          {"source_id", shot.source_id},
          {"start_frame", shot.start_frame},
          {"end_frame", shot.end_frame},
          {"start_s", shot.start_s},
          {"duration_s", shot.duration_s},
          {"semantic", shot.semantic},
          {"shot_size_class", shot.shot_size_class},
          {"shot_size_vec", shot.shot_size_vec},
          {"aesthetic", shot.aesthetic}};
}

Shot shot_from_json(const json& j, const std::string& context) {
  Shot s;
  const auto id = jsonl::integer_field(j, "shot_id", context);
  const auto first = jsonl::integer_field(j, "start_frame", context);
  const auto last = jsonl::integer_field(j, "end_frame", context);
  if (id < 0 || first < 0 || last < first) throw FormatError(context + ": invalid shot frame range");
  s.shot_id = static_cast<std::size_t>(id);
  s.source_id = jsonl::string_field(j, "source_id", context);
  s.start_frame = static_cast<std::size_t>(first);
  s.end_frame = static_cast<std::size_t>(last);
  s.start_s = jsonl::number_field(j, "start_s", context);
  s.duration_s = jsonl::number_field(j, "duration_s", context);
  if (!(s.duration_s > 0.0) || !std::isfinite(s.duration_s) || !std::isfinite(s.start_s))
    throw FormatError(context + ": shot duration must be positive and finite");
  s.semantic = jsonl::vector_field(j, "semantic", context);
  s.shot_size_class = static_cast<int>(jsonl::integer_field(j, "shot_size_class", context));
  if (s.shot_size_class < 0 || s.shot_size_class >= static_cast<int>(kShotSizeClasses))
    throw FormatError(context + ": shot_size_class out of range");
  const auto vec = jsonl::vector_field(j, "shot_size_vec", context);
  if (vec.size() != kShotSizeClasses) throw FormatError(context + ": shot_size_vec must have length 3");
  std::copy(vec.begin(), vec.end(), s.shot_size_vec.begin());
  s.aesthetic = jsonl::number_field(j, "aesthetic", context);
  if (!(s.aesthetic >= 0.0 && s.aesthetic <= 1.0)) throw FormatError(context + ": aesthetic outside [0,1]");
  return s;
}

}  // namespace detail

ShotFile make_shot_file(const FeatureStream& stream, std::vector<Shot> shots) {
  return {stream.source_id, stream.fps_sampled, stream.dim_semantic, std::move(shots)};
}

void write_shots(const ShotFile& file, const std::filesystem::path& path) {
  if (file.shots.empty()) throw Error("segment: refusing to write an empty shot list");
  json header = {{"source_id", file.source_id},
                 {"fps_sampled", file.fps_sampled},
                 {"dim_semantic", file.dim_semantic},
                 {"shot_count", file.shots.size()}};
  jsonl::write_file_atomic(path, [&](std::ostream& out) {
    out << jsonl::dump(header) << '\n';
    for (const Shot& s : file.shots) out << jsonl::dump(detail::shot_to_json(s)) << '\n';
  });
}

ShotFile read_shots(const std::filesystem::path& path) {
  const auto lines = jsonl::read_file(path, "shots");
  const std::string ctx = "shots " + path.string();
  if (lines.empty()) throw FormatError(ctx + ": missing header");
  const json& h = lines[0].value;
  ShotFile f;
  f.source_id = jsonl::string_field(h, "source_id", ctx);
  f.fps_sampled = jsonl::number_field(h, "fps_sampled", ctx);
  const auto dim = jsonl::integer_field(h, "dim_semantic", ctx);
  const auto count = jsonl::integer_field(h, "shot_count", ctx);
  if (dim <= 0 || count < 0 || static_cast<std::size_t>(count) != lines.size() - 1)
    throw FormatError(ctx + ": shot_count does not match the file");
  f.dim_semantic = static_cast<std::size_t>(dim);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    Shot s = detail::shot_from_json(lines[i].value, ctx + ": line " + std::to_string(lines[i].number));
    if (s.semantic.size() != f.dim_semantic)
      throw FormatError(ctx + ": shot " + std::to_string(i - 1) + " semantic dimension mismatch");
    f.shots.push_back(std::move(s));
  }
  if (f.shots.empty()) throw FormatError(ctx + ": file contributes zero shots");
  return f;
}

}  // namespace autocut
