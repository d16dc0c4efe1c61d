#include "autocut/editor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "autocut/error.hpp"
#include "jsonl.hpp"

namespace autocut {

using jsonl::json;

namespace {

constexpr const char* kCutlistFormat = "autocut.cutlist/1";
constexpr const char* kAllSkippedWarning = "all shots skipped; storyboard is empty";

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

std::string seconds(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", t);
  return buf;
}

std::string part_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "part_%04zu.mp4", i);
  return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

double Storyboard::total_duration_s() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.duration_s();
  return total;
}

StoryboardEntry trim_shot(const Shot& shot, ActionLabel label) {
  if (label == ActionLabel::kSkip) throw Error("trim: skip label has no entry");
  StoryboardEntry e;
  e.shot_id = shot.shot_id;
  e.source_id = shot.source_id;
  e.in_time_s = shot.start_s;
  e.out_time_s = shot.start_s + std::min(shot.duration_s, bucket_cap(label));
  e.predicted_label = label;
  return e;
}

Storyboard storyboard_from_labels(std::span<const Shot> shots, std::span<const ActionLabel> labels) {
  if (shots.size() != labels.size()) throw Error("storyboard: shot and label counts differ");
  Storyboard sb;
  for (std::size_t t = 0; t < shots.size(); ++t) {
    if (labels[t] == ActionLabel::kSkip)
      sb.skipped.push_back({shots[t].shot_id, shots[t].source_id, ActionLabel::kSkip});
    else
      sb.entries.push_back(trim_shot(shots[t], labels[t]));
  }
  return sb;
}

Storyboard edit(std::span<const Shot> shots, const Policy& policy) {
  if (shots.empty()) throw Error("edit: no shots");
  if (!policy.fitted()) throw Error("policy not fitted");
  const auto labels = rollout(policy, shots);
  return storyboard_from_labels(shots, labels);
}

std::string render_command_plan(const Storyboard& sb, const std::string& media_dir, const std::string& output_name) {
  std::ostringstream out;
  out << "#!/bin/sh\n";
  out << "# Command plan generated by autocut. Review before running.\n";
  out << "set -e\n";
  if (sb.entries.empty()) {
    out << "# " << kAllSkippedWarning << "\n";
    out << "exit 0\n";
    return out.str();
  }
  out << "MEDIA_DIR=${MEDIA_DIR:-" << shell_quote(media_dir) << "}\n";
  for (std::size_t i = 0; i < sb.entries.size(); ++i) {
    const auto& e = sb.entries[i];
    out << "ffmpeg -nostdin -y -ss " << seconds(e.in_time_s) << " -i \"$MEDIA_DIR\"/" << shell_quote(e.source_id)
        << " -t " << seconds(e.duration_s()) << " -an -c:v libx264 " << part_name(i) << "\n";
  }
  out << "ffmpeg -nostdin -y";
  for (std::size_t i = 0; i < sb.entries.size(); ++i) out << " -i " << part_name(i);
  out << " -filter_complex '";
  for (std::size_t i = 0; i < sb.entries.size(); ++i) out << "[" << i << ":v:0]";
  out << "concat=n=" << sb.entries.size() << ":v=1:a=0[outv]' -map '[outv]' " << shell_quote(output_name) << "\n";
  return out.str();
}

CutlistPaths cutlist_paths(const std::filesystem::path& out) {
  std::string base = out.string();
  if (ends_with(base, ".cutlist.json")) base.resize(base.size() - std::string(".cutlist.json").size());
  return {base + ".cutlist.json", base + ".plan.sh"};
}

CutlistPaths emit_cutlist(const Storyboard& sb, const std::filesystem::path& out) {
  const CutlistPaths paths = cutlist_paths(out);
  json entries = json::array();
  for (const auto& e : sb.entries)
    entries.push_back({{"shot_id", e.shot_id},
                       {"source_id", e.source_id},
                       {"in_time_s", e.in_time_s},
                       {"out_time_s", e.out_time_s},
                       {"predicted_label", label_value(e.predicted_label)}});
  json skipped = json::array();
  for (const auto& s : sb.skipped)
    skipped.push_back({{"shot_id", s.shot_id}, {"source_id", s.source_id}, {"predicted_label", label_value(s.predicted_label)}});
  json doc = {{"format", kCutlistFormat},
              {"entries", entries},
              {"skipped", skipped},
              {"total_duration_s", sb.total_duration_s()},
              {"warning", sb.all_skipped() ? json(kAllSkippedWarning) : json(nullptr)}};
  jsonl::write_file_atomic(paths.cutlist, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  jsonl::write_file_atomic(paths.plan, [&](std::ostream& o) { o << render_command_plan(sb); });
  return paths;
}

Storyboard read_cutlist(const std::filesystem::path& path) {
  const json doc = jsonl::parse_json_file(path, "cutlist");
  const std::string ctx = "cutlist " + path.string();
  if (doc.value("format", std::string()) != kCutlistFormat) throw FormatError(ctx + ": unknown format");
  Storyboard sb;
  for (const json& e : jsonl::field(doc, "entries", ctx)) {
    StoryboardEntry entry;
    entry.shot_id = static_cast<std::size_t>(jsonl::integer_field(e, "shot_id", ctx));
    entry.source_id = jsonl::string_field(e, "source_id", ctx);
    entry.in_time_s = jsonl::number_field(e, "in_time_s", ctx);
    entry.out_time_s = jsonl::number_field(e, "out_time_s", ctx);
    entry.predicted_label = label_from_int(jsonl::integer_field(e, "predicted_label", ctx));
    if (entry.predicted_label == ActionLabel::kSkip) throw FormatError(ctx + ": entry labeled skip");
    if (!(entry.in_time_s >= 0.0 && entry.in_time_s < entry.out_time_s))
      throw FormatError(ctx + ": entry has an empty or negative time range");
    sb.entries.push_back(std::move(entry));
  }
  for (const json& s : jsonl::field(doc, "skipped", ctx)) {
    SkippedShot sk;
    sk.shot_id = static_cast<std::size_t>(jsonl::integer_field(s, "shot_id", ctx));
    sk.source_id = jsonl::string_field(s, "source_id", ctx);
    sk.predicted_label = label_from_int(jsonl::integer_field(s, "predicted_label", ctx));
    sb.skipped.push_back(std::move(sk));
  }
  return sb;
}

}  // namespace autocut
