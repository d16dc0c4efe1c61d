#include "autocut/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "autocut/error.hpp"
#include "autocut/rng.hpp"
#include "manifest.hpp"
#include "shot_json.hpp"

namespace autocut {

using jsonl::json;

namespace {

constexpr const char* kCorpusFormat = "autocut.corpus/1";
constexpr std::uint64_t kShuffleStream = 0xC0FFEE;

json config_json(const CorpusConfig& c) {
  return {{"target_seconds", c.target_seconds},
          {"variants", c.variants},
          {"aesthetic_threshold", c.aesthetic_threshold},
          {"seed", c.seed},
          {"max_foreign_fraction", c.max_foreign_fraction},
          {"keep_originals", c.keep_originals}};
}

json manifest_json(const CorpusManifest& m) {
  json labels = json::object();
  for (std::size_t i = 0; i < kNumActions; ++i) labels[std::to_string(i + 1)] = m.label_counts[i];
  return {{"format", kCorpusFormat},
          {"seed", m.config.seed},
          {"config", config_json(m.config)},
          {"sources", m.sources},
          {"reference_clips", m.reference_clips},
          {"variant_clips", m.variant_clips},
          {"total_clips", m.total_clips},
          {"total_shots", m.total_shots},
          {"label_counts", labels},
          {"provenance_counts",
           {{"reference", m.provenance_counts[0]},
            {"foreign", m.provenance_counts[1]},
            {"low_aesthetic", m.provenance_counts[2]}}}};
}

}  // namespace

ActionLabel label_from_int(std::int64_t value) {
  if (value < 1 || value > static_cast<std::int64_t>(kNumActions))
    throw Error("action label must be in 1..5, got " + std::to_string(value));
  return static_cast<ActionLabel>(value);
}

double bucket_cap(ActionLabel a) {
  switch (a) {
    case ActionLabel::kUnder1s: return 1.0;
    case ActionLabel::kOneToThree: return 3.0;
    case ActionLabel::kThreeToNine: return 9.0;
    case ActionLabel::kOver9s: return std::numeric_limits<double>::infinity();
    case ActionLabel::kSkip: break;
  }
  throw Error("skip label has no duration bucket");
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kReference: return "reference";
    case Provenance::kForeign: return "foreign";
    case Provenance::kLowAesthetic: return "low_aesthetic";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "reference") return Provenance::kReference;
  if (s == "foreign") return Provenance::kForeign;
  if (s == "low_aesthetic") return Provenance::kLowAesthetic;
  throw FormatError("unknown provenance '" + std::string(s) + "'");
}

ActionLabel duration_to_label(double duration_s) {
  if (!(duration_s > 0.0) || std::isnan(duration_s))
    throw Error("duration must be positive, got " + std::to_string(duration_s));
  if (duration_s < 1.0) return ActionLabel::kUnder1s;
  if (duration_s < 3.0) return ActionLabel::kOneToThree;
  if (duration_s < 9.0) return ActionLabel::kThreeToNine;
  return ActionLabel::kOver9s;
}

void validate_clip(const LabeledClip& clip) {
  if (clip.shots.empty()) throw Error("clip " + clip.clip_id + ": no shots");
  if (clip.labels.size() != clip.shots.size() || clip.provenance.size() != clip.shots.size())
    throw Error("clip " + clip.clip_id + ": shots, labels and provenance differ in length");
  for (std::size_t i = 0; i < clip.shots.size(); ++i) {
    if (clip.provenance[i] != Provenance::kReference && clip.labels[i] != ActionLabel::kSkip)
      throw Error("clip " + clip.clip_id + ": shot " + std::to_string(i) + " is " +
                  std::string(to_string(clip.provenance[i])) + " but not labeled 5");
  }
}

std::vector<LabeledClip> assemble_clips(std::span<const Shot> shots, double target_s) {
  if (shots.empty()) throw Error("assemble: empty shot list");
  if (!(target_s > 0.0)) throw Error("assemble: target duration must be positive");
  std::vector<LabeledClip> clips;
  LabeledClip current;
  double accumulated = 0.0;
  auto flush = [&] {
    current.clip_id = shots.front().source_id + "/" + std::to_string(clips.size());
    clips.push_back(std::move(current));
    current = {};
    accumulated = 0.0;
  };
  for (const Shot& s : shots) {
    current.shots.push_back(s);
    current.labels.push_back(duration_to_label(s.duration_s));
    current.provenance.push_back(Provenance::kReference);
    accumulated += s.duration_s;
    if (accumulated >= target_s) flush();
  }
  if (!current.shots.empty()) flush();
  return clips;
}

void apply_aesthetic_rule(LabeledClip& clip, double threshold) {
  for (std::size_t i = 0; i < clip.shots.size(); ++i) {
    if (clip.shots[i].aesthetic < threshold) {
      clip.labels[i] = ActionLabel::kSkip;
      clip.provenance[i] = Provenance::kLowAesthetic;
    }
  }
}

std::vector<LabeledClip> augment_clip(const LabeledClip& clip, std::span<const Shot> foreign_pool,
                                      std::size_t n_variants, double aesthetic_threshold,
                                      std::uint64_t seed, double max_foreign_fraction) {
  if (foreign_pool.empty()) throw Error("augment: empty foreign pool");
  if (n_variants < 1) throw Error("augment: n_variants must be at least 1");
  if (!(max_foreign_fraction >= 0.0 && max_foreign_fraction <= 1.0))
    throw Error("augment: max_foreign_fraction must lie in [0, 1]");
  validate_clip(clip);
  const std::size_t max_insert = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(max_foreign_fraction * static_cast<double>(clip.shots.size()))));

  Rng rng(seed);
  std::vector<LabeledClip> variants;
  variants.reserve(n_variants);
  for (std::size_t v = 0; v < n_variants; ++v) {
    LabeledClip out = clip;
    out.clip_id = clip.clip_id + "~v" + std::to_string(v);
    const std::size_t m = rng.uniform_int(1, max_insert);
    for (std::size_t j = 0; j < m; ++j) {
      const Shot& foreign = foreign_pool[rng.uniform_index(foreign_pool.size())];
      const auto pos = static_cast<std::ptrdiff_t>(rng.uniform_int(0, out.shots.size()));
      out.shots.insert(out.shots.begin() + pos, foreign);
      out.labels.insert(out.labels.begin() + pos, ActionLabel::kSkip);
      out.provenance.insert(out.provenance.begin() + pos, Provenance::kForeign);
    }
    apply_aesthetic_rule(out, aesthetic_threshold);
    variants.push_back(std::move(out));
  }
  return variants;
}

Corpus build_corpus(std::span<const ShotFile> files, const CorpusConfig& config) {
  if (files.empty()) throw Error("build-corpus: no reference files");
  if (files.size() < 2)
    throw Error("build-corpus: foreign insertion needs shots from other files; got a single file");
  for (const ShotFile& f : files)
    if (f.shots.empty()) throw Error("build-corpus: file '" + f.source_id + "' contributes zero shots");

  if (!config.keep_originals && config.variants == 0)
    throw Error("build-corpus: dropping originals with zero variants leaves an empty corpus");

  Corpus corpus;
  corpus.manifest.config = config;
  std::uint64_t clip_counter = 0;
  for (std::size_t fi = 0; fi < files.size(); ++fi) {
    corpus.manifest.sources.push_back(files[fi].source_id);
    std::vector<Shot> pool;
    for (std::size_t fj = 0; fj < files.size(); ++fj)
      if (fj != fi) pool.insert(pool.end(), files[fj].shots.begin(), files[fj].shots.end());

    for (LabeledClip& clip : assemble_clips(files[fi].shots, config.target_seconds)) {
      apply_aesthetic_rule(clip, config.aesthetic_threshold);
      if (config.variants > 0) {
        auto variants = augment_clip(clip, pool, config.variants, config.aesthetic_threshold,
                                     derive_seed(config.seed, clip_counter), config.max_foreign_fraction);
        corpus.manifest.variant_clips += variants.size();
        for (auto& v : variants) corpus.clips.push_back(std::move(v));
      }
      ++clip_counter;
      if (config.keep_originals) {
        ++corpus.manifest.reference_clips;
        corpus.clips.push_back(std::move(clip));
      }
    }
  }

  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  for (std::size_t i = corpus.clips.size(); i > 1; --i) {
    const std::size_t j = shuffle_rng.uniform_index(i);
    std::swap(corpus.clips[i - 1], corpus.clips[j]);
  }

  auto& m = corpus.manifest;
  m.total_clips = corpus.clips.size();
  for (const LabeledClip& c : corpus.clips) {
    m.total_shots += c.shots.size();
    for (ActionLabel a : c.labels) ++m.label_counts[label_index(a)];
    for (Provenance p : c.provenance) ++m.provenance_counts[static_cast<std::size_t>(p)];
  }
  return corpus;
}

Corpus build_corpus(std::span<const std::filesystem::path> shot_files, const CorpusConfig& config) {
  std::vector<ShotFile> files;
  files.reserve(shot_files.size());
  for (const auto& p : shot_files) files.push_back(read_shots(p));
  return build_corpus(files, config);
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  json header = {{"format", kCorpusFormat}, {"clip_count", corpus.clips.size()}, {"seed", corpus.manifest.config.seed}};
  jsonl::write_file_atomic(path, [&](std::ostream& out) {
    out << jsonl::dump(header) << '\n';
    for (const LabeledClip& c : corpus.clips) {
      json shots = json::array();
      for (const Shot& s : c.shots) shots.push_back(detail::shot_to_json(s));
      json labels = json::array();
      for (ActionLabel a : c.labels) labels.push_back(label_value(a));
      json prov = json::array();
      for (Provenance p : c.provenance) prov.push_back(to_string(p));
      out << jsonl::dump(json{{"clip_id", c.clip_id}, {"labels", labels}, {"provenance", prov}, {"shots", shots}})
          << '\n';
    }
  });
  detail::write_manifest(path, manifest_json(corpus.manifest));
}

std::vector<LabeledClip> read_corpus(const std::filesystem::path& path) {
  const auto lines = jsonl::read_file(path, "corpus");
  const std::string ctx = "corpus " + path.string();
  if (lines.empty()) throw FormatError(ctx + ": missing header");
  if (lines[0].value.value("format", std::string()) != kCorpusFormat) throw FormatError(ctx + ": unknown format");
  const auto count = jsonl::integer_field(lines[0].value, "clip_count", ctx);
  if (count < 0 || static_cast<std::size_t>(count) != lines.size() - 1)
    throw FormatError(ctx + ": clip_count does not match the file");

  std::vector<LabeledClip> clips;
  clips.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json& row = lines[i].value;
    const std::string lctx = ctx + ": line " + std::to_string(lines[i].number);
    LabeledClip c;
    c.clip_id = jsonl::string_field(row, "clip_id", lctx);
    for (const json& s : jsonl::field(row, "shots", lctx)) c.shots.push_back(detail::shot_from_json(s, lctx));
    for (const json& l : jsonl::field(row, "labels", lctx)) {
      if (!l.is_number_integer()) throw FormatError(lctx + ": labels must be integers");
      c.labels.push_back(label_from_int(l.get<std::int64_t>()));
    }
    for (const json& p : jsonl::field(row, "provenance", lctx)) {
      if (!p.is_string()) throw FormatError(lctx + ": provenance must be strings");
      c.provenance.push_back(provenance_from_string(p.get<std::string>()));
    }
    try {
      validate_clip(c);
    } catch (const Error& e) {
      throw FormatError(lctx + ": " + e.what());
    }
    clips.push_back(std::move(c));
  }
  return clips;
}

}  // namespace autocut
