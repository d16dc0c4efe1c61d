#include "autocut/featstore.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "autocut/error.hpp"
#include "autocut/rng.hpp"
#include "jsonl.hpp"

namespace autocut {

namespace {

using jsonl::json;

constexpr double kDistributionTolerance = 1e-6;
constexpr double kSeparationFactor = 10.0;

std::string frame_ctx(std::size_t i) { return "frame " + std::to_string(i); }

[[noreturn]] void fail_frame(std::size_t i, const std::string& what) {
  throw FormatError(frame_ctx(i) + ": " + what);
}

void validate_header(const FeatureStream& s) {
  if (!(s.fps_sampled > 0.0) || !std::isfinite(s.fps_sampled))
    throw FormatError("stream header: fps_sampled must be positive and finite");
  if (s.dim_semantic != kRawSemanticDim && s.dim_semantic != kReducedSemanticDim)
    throw FormatError("stream header: dim_semantic must be 64 or 1024, got " +
                      std::to_string(s.dim_semantic));
}

void validate_frame(const FeatureStream& s, std::size_t i) {
  const FrameFeature& f = s.frames[i];
  if (f.semantic.size() != s.dim_semantic)
    fail_frame(i, "dimension mismatch: semantic length " + std::to_string(f.semantic.size()) +
                      " but stream declares " + std::to_string(s.dim_semantic));
  for (double x : f.semantic)
    if (!std::isfinite(x)) fail_frame(i, "non-finite semantic component");
  if (f.frame_index < 0) fail_frame(i, "negative frame_index");
  if (!std::isfinite(f.timestamp_s) || f.timestamp_s < 0.0) fail_frame(i, "timestamp must be finite and >= 0");
  for (double a : f.aesthetic)
    if (!std::isfinite(a) || a < 0.0 || a > 1.0) fail_frame(i, "aesthetic component outside [0,1]");
  double sum = 0.0;
  for (double p : f.shot_size) {
    if (!std::isfinite(p) || p < 0.0) fail_frame(i, "shot_size component negative or non-finite");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) fail_frame(i, "shot_size does not sum to 1");
  if (i > 0) {
    const FrameFeature& prev = s.frames[i - 1];
    if (!(f.timestamp_s > prev.timestamp_s)) fail_frame(i, "non-monotone timestamp");
    if (!(f.frame_index > prev.frame_index)) fail_frame(i, "non-monotone frame_index");
  }
}

json header_json(const FeatureStream& s) {
  json h = {{"source_id", s.source_id},
            {"fps_sampled", s.fps_sampled},
            {"dim_semantic", s.dim_semantic},
            {"frame_count", s.frames.size()}};
  if (!s.warnings.empty()) h["warnings"] = s.warnings;
  return h;
}

json frame_json(const FrameFeature& f) {
  return {{"frame_index", f.frame_index},
          {"timestamp_s", f.timestamp_s},
          {"semantic", f.semantic},
          {"aesthetic", f.aesthetic},
          {"shot_size", f.shot_size}};
}

template <std::size_t N>
std::array<double, N> fixed_field(const json& obj, const char* key, const std::string& context) {
  auto v = jsonl::vector_field(obj, key, context);
  if (v.size() != N)
    throw FormatError(context + ": field '" + key + "' must have length " + std::to_string(N));
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

std::vector<double> random_direction(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double norm2 = 0.0;
  while (norm2 == 0.0) {
    norm2 = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : v) x *= inv;
  return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d2);
}

}  // namespace

void validate_stream(const FeatureStream& stream) {
  validate_header(stream);
  if (stream.frames.empty()) throw FormatError("stream has no frames");
  for (std::size_t i = 0; i < stream.frames.size(); ++i) validate_frame(stream, i);
}

FeatureStream parse_stream(std::istream& in, std::string_view origin) {
  auto lines = jsonl::parse_lines(in, origin);
  if (lines.empty()) throw FormatError(std::string(origin) + ": missing stream header");
  const json& h = lines.front().value;
  const std::string hctx = std::string(origin) + ": stream header";
  FeatureStream s;
  s.source_id = jsonl::string_field(h, "source_id", hctx);
  s.fps_sampled = jsonl::number_field(h, "fps_sampled", hctx);
  const auto dim = jsonl::integer_field(h, "dim_semantic", hctx);
  const auto count = jsonl::integer_field(h, "frame_count", hctx);
  if (dim <= 0 || count < 0) throw FormatError(hctx + ": dim_semantic/frame_count out of range");
  s.dim_semantic = static_cast<std::size_t>(dim);
  if (auto it = h.find("warnings"); it != h.end()) s.warnings = it->get<std::vector<std::string>>();
  validate_header(s);
  if (static_cast<std::size_t>(count) != lines.size() - 1)
    throw FormatError(hctx + ": frame_count " + std::to_string(count) + " but file holds " +
                      std::to_string(lines.size() - 1) + " frames");

  s.frames.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json& row = lines[i].value;
    const std::string fctx = std::string(origin) + ": " + frame_ctx(i - 1);
    FrameFeature f;
    f.frame_index = jsonl::integer_field(row, "frame_index", fctx);
    f.timestamp_s = jsonl::number_field(row, "timestamp_s", fctx);
    f.semantic = jsonl::vector_field(row, "semantic", fctx);
    f.aesthetic = fixed_field<kAestheticDim>(row, "aesthetic", fctx);
    f.shot_size = fixed_field<kShotSizeClasses>(row, "shot_size", fctx);
    s.frames.push_back(std::move(f));
    validate_frame(s, i - 1);
  }
  if (s.frames.empty()) throw FormatError(std::string(origin) + ": stream has no frames");
  return s;
}

FeatureStream read_stream(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_stream(in, path.string());
}

void write_stream(const FeatureStream& stream, std::ostream& out) {
  validate_stream(stream);
  out << jsonl::dump(header_json(stream)) << '\n';
  for (const FrameFeature& f : stream.frames) out << jsonl::dump(frame_json(f)) << '\n';
}

void write_stream(const FeatureStream& stream, const std::filesystem::path& path) {
  validate_stream(stream);
  jsonl::write_file_atomic(path, [&](std::ostream& out) { write_stream(stream, out); });
}

ScenarioSpec parse_scenario(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("scenario: invalid JSON (") + e.what() + ")");
  }
  const std::string ctx = "scenario";
  ScenarioSpec spec;
  spec.source_id = j.value("source_id", spec.source_id);
  spec.fps = j.value("fps", spec.fps);
  spec.dim = j.value("dim", spec.dim);
  spec.center_norm = j.value("center_norm", spec.center_norm);
  const json& segs = jsonl::field(j, "segments", ctx);
  if (!segs.is_array()) throw FormatError("scenario: 'segments' must be an array");
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const json& sj = segs[k];
    const std::string sctx = "scenario segment " + std::to_string(k);
    SegmentSpec seg;
    const auto frames = jsonl::integer_field(sj, "frames", sctx);
    if (frames < 0) throw FormatError(sctx + ": negative frame count");
    seg.frames = static_cast<std::size_t>(frames);
    seg.noise = sj.value("noise", 0.0);
    seg.aesthetic = sj.value("aesthetic", seg.aesthetic);
    seg.shot_size_class = sj.value("shot_size_class", seg.shot_size_class);
    if (sj.contains("center")) seg.center = jsonl::vector_field(sj, "center", sctx);
    spec.segments.push_back(std::move(seg));
  }
  return spec;
}

ScenarioSpec read_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_json(const ScenarioSpec& spec) {
  json segs = json::array();
  for (const auto& seg : spec.segments) {
    json sj = {{"frames", seg.frames},
               {"noise", seg.noise},
               {"aesthetic", seg.aesthetic},
               {"shot_size_class", seg.shot_size_class}};
    if (seg.center) sj["center"] = *seg.center;
    segs.push_back(std::move(sj));
  }
  const json j = {{"source_id", spec.source_id},
                  {"fps", spec.fps},
                  {"dim", spec.dim},
                  {"center_norm", spec.center_norm},
                  {"segments", std::move(segs)}};
  return j.dump() + "\n";
}

void write_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  jsonl::write_file_atomic(path, [&](std::ostream& out) { out << scenario_json(spec); });
}

FeatureStream synth_stream(const ScenarioSpec& spec, std::uint64_t seed) {
  if (spec.segments.empty()) throw Error("synth: scenario needs at least 1 segment");
  if (spec.dim != kRawSemanticDim && spec.dim != kReducedSemanticDim)
    throw Error("synth: dim must be 64 or 1024");
  if (!(spec.fps > 0.0)) throw Error("synth: fps must be positive");
  for (std::size_t k = 0; k < spec.segments.size(); ++k) {
    const SegmentSpec& seg = spec.segments[k];
    const std::string sctx = "synth: segment " + std::to_string(k);
    if (seg.frames == 0) throw Error(sctx + " has zero frames");
    if (!(seg.noise >= 0.0)) throw Error(sctx + ": noise must be >= 0");
    if (!(seg.aesthetic >= 0.0 && seg.aesthetic <= 1.0)) throw Error(sctx + ": aesthetic outside [0,1]");
    if (seg.shot_size_class < 0 || seg.shot_size_class >= static_cast<int>(kShotSizeClasses))
      throw Error(sctx + ": shot_size_class must be 0, 1 or 2");
    if (seg.center && seg.center->size() != spec.dim) throw Error(sctx + ": center has wrong dimension");
  }

  Rng center_rng(derive_seed(seed, 0));
  Rng noise_rng(derive_seed(seed, 1));

  std::vector<std::vector<double>> centers;
  for (std::size_t k = 0; k < spec.segments.size(); ++k) {
    const SegmentSpec& seg = spec.segments[k];
    const double min_sep =
        k == 0 ? 0.0 : kSeparationFactor * std::max(seg.noise, spec.segments[k - 1].noise);
    std::vector<double> c;
    if (seg.center) {
      c = *seg.center;
      if (k > 0 && distance(c, centers.back()) < min_sep)
        throw Error("synth: segment " + std::to_string(k) + " center is closer than 10x noise to its predecessor");
    } else {
      constexpr int kMaxDraws = 100;
      int draws = 0;
      do {
        if (++draws > kMaxDraws)
          throw Error("synth: cannot draw a center for segment " + std::to_string(k) +
                      " separated by 10x noise; raise center_norm");
        c = random_direction(center_rng, spec.dim);
        for (double& x : c) x *= spec.center_norm;
      } while (k > 0 && distance(c, centers.back()) < min_sep);
    }
    centers.push_back(std::move(c));
  }

  FeatureStream s;
  s.source_id = spec.source_id;
  s.fps_sampled = spec.fps;
  s.dim_semantic = spec.dim;
  std::int64_t index = 0;
  for (std::size_t k = 0; k < spec.segments.size(); ++k) {
    const SegmentSpec& seg = spec.segments[k];
    std::array<double, kShotSizeClasses> size{0.1, 0.1, 0.1};
    size[static_cast<std::size_t>(seg.shot_size_class)] = 0.8;
    for (std::size_t i = 0; i < seg.frames; ++i, ++index) {
      FrameFeature f;
      f.frame_index = index;
      f.timestamp_s = static_cast<double>(index) / spec.fps;
      auto dir = random_direction(noise_rng, spec.dim);
      const double radius = seg.noise * noise_rng.uniform();
      f.semantic = centers[k];
      for (std::size_t d = 0; d < spec.dim; ++d) f.semantic[d] += radius * dir[d];
      f.aesthetic = {seg.aesthetic, 1.0 - seg.aesthetic};
      f.shot_size = size;
      s.frames.push_back(std::move(f));
    }
  }
  return s;
}

std::vector<std::size_t> planted_boundaries(const ScenarioSpec& spec) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k < spec.segments.size(); ++k) {
    if (k > 0) out.push_back(start);
    start += spec.segments[k].frames;
  }
  return out;
}

}  // namespace autocut
