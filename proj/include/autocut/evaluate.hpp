#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autocut/editor.hpp"
#include "autocut/segment.hpp"

namespace autocut {

/// Ordered shot-size classes, tightest to widest.
struct SizeScale {
  std::vector<std::string> classes;

  std::size_t size() const { return classes.size(); }
  /// Classifier scale: close-up, medium, long.
  static SizeScale three_class();
  /// Manual-annotation scale: detail, close-up, medium 1, medium 2, long,
  /// very long.
  static SizeScale six_class();
  static SizeScale with_classes(std::size_t n);
};

/// bins[k] = share of transitions whose size step |s_{t+1} - s_t| equals k.
struct TransitionHistogram {
  std::vector<double> bins;
  std::size_t total_transitions = 0;
};

using SizeSequence = std::vector<int>;

TransitionHistogram transition_histogram(std::span<const int> sizes, const SizeScale& scale);

/// Pools the transitions of several sequences; no transition is counted
/// across sequence ends. Sequences shorter than 2 contribute nothing, but
/// the pool must hold at least one transition.
TransitionHistogram transition_histogram(std::span<const SizeSequence> sequences, const SizeScale& scale);

/// sqrt(mean_i (h1_i - h2_i)^2).
double histogram_rms(const TransitionHistogram& a, const TransitionHistogram& b);

/// Share of transitions with a step of exactly two classes.
double two_step_share(const TransitionHistogram& h);

struct StyleReport {
  std::size_t scale_size = 0;
  TransitionHistogram reference;
  TransitionHistogram raw;
  TransitionHistogram edited;
  double rms_reference_raw = 0.0;
  double rms_reference_edited = 0.0;
  double rms_raw_edited = 0.0;
  double two_step_reference = 0.0;
  double two_step_raw = 0.0;
  double two_step_edited = 0.0;
  /// rms(ref, raw) / rms(ref, edited); nullopt when the denominator is 0
  /// and the numerator is not (reported as infinite).
  std::optional<double> improvement_ratio;
};

StyleReport style_report(std::span<const SizeSequence> reference, std::span<const SizeSequence> raw,
                         std::span<const SizeSequence> edited, const SizeScale& scale);

SizeSequence size_sequence(std::span<const Shot> shots);

/// Sizes of the storyboard's entries, resolved against the shots it was cut
/// from by (source_id, shot_id).
SizeSequence edited_size_sequence(const Storyboard& sb, std::span<const Shot> shots);

void write_report(const StyleReport& report, const std::filesystem::path& path);
std::string render_report_table(const StyleReport& report, const SizeScale& scale);

}  // namespace autocut
