#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autocut/labels.hpp"
#include "autocut/policy.hpp"
#include "autocut/segment.hpp"

namespace autocut {

struct StoryboardEntry {
  std::size_t shot_id = 0;
  std::string source_id;
  double in_time_s = 0.0;
  double out_time_s = 0.0;
  ActionLabel predicted_label = ActionLabel::kOver9s;

  double duration_s() const { return out_time_s - in_time_s; }
  bool operator==(const StoryboardEntry&) const = default;
};

struct SkippedShot {
  std::size_t shot_id = 0;
  std::string source_id;
  ActionLabel predicted_label = ActionLabel::kSkip;

  bool operator==(const SkippedShot&) const = default;
};

/// Ordered include decisions; entries keep source order and every input shot
/// lands in exactly one of entries / skipped.
struct Storyboard {
  std::vector<StoryboardEntry> entries;
  std::vector<SkippedShot> skipped;

  bool all_skipped() const { return entries.empty(); }
  double total_duration_s() const;
  bool operator==(const Storyboard&) const = default;
};

/// Keeps [start, start + min(duration, cap(label))) of an included shot.
StoryboardEntry trim_shot(const Shot& shot, ActionLabel label);

/// Left-to-right pass with the policy's own predictions as history.
Storyboard edit(std::span<const Shot> shots, const Policy& policy);

/// Builds a storyboard from already-decided labels (one per shot).
Storyboard storyboard_from_labels(std::span<const Shot> shots, std::span<const ActionLabel> labels);

/// Shell command plan: one ffmpeg trim per entry and one concat over the
/// intermediates. The plan is emitted as text and never executed here.
/// `media_dir` prefixes each source_id to locate its media file.
std::string render_command_plan(const Storyboard& sb, const std::string& media_dir = ".",
                                const std::string& output_name = "edited.mp4");

/// Writes `<stem>.cutlist.json` and `<stem>.plan.sh` for an output path that
/// ends in `.cutlist.json` (or any other path, used as the stem).
struct CutlistPaths {
  std::filesystem::path cutlist;
  std::filesystem::path plan;
};
CutlistPaths cutlist_paths(const std::filesystem::path& out);
CutlistPaths emit_cutlist(const Storyboard& sb, const std::filesystem::path& out);

Storyboard read_cutlist(const std::filesystem::path& path);

}  // namespace autocut
