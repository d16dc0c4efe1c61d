#include "autocut/evaluate.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <utility>

#include "autocut/error.hpp"
#include "jsonl.hpp"

namespace autocut {

using jsonl::json;

SizeScale SizeScale::three_class() { return {{"close-up", "medium", "long"}}; }

SizeScale SizeScale::six_class() {
  return {{"detail", "close-up", "medium-1", "medium-2", "long", "very-long"}};
}

SizeScale SizeScale::with_classes(std::size_t n) {
  if (n == 3) return three_class();
  if (n == 6) return six_class();
  throw Error("eval: scale must be 3 or 6 classes, got " + std::to_string(n));
}

namespace {

void count_sequence(std::span<const int> sizes, const SizeScale& scale, std::vector<std::size_t>& counts) {
  const int n = static_cast<int>(scale.size());
  for (std::size_t i = 0; i < sizes.size(); ++i)
    if (sizes[i] < 0 || sizes[i] >= n)
      throw Error("eval: size class " + std::to_string(sizes[i]) + " outside the " + std::to_string(n) + "-class scale");
  for (std::size_t i = 1; i < sizes.size(); ++i) ++counts[static_cast<std::size_t>(std::abs(sizes[i] - sizes[i - 1]))];
}

TransitionHistogram normalize(const std::vector<std::size_t>& counts) {
  TransitionHistogram h;
  for (std::size_t c : counts) h.total_transitions += c;
  h.bins.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    h.bins[k] = static_cast<double>(counts[k]) / static_cast<double>(h.total_transitions);
  return h;
}

json histogram_json(const TransitionHistogram& h) {
  return {{"bins", h.bins}, {"total_transitions", h.total_transitions}};
}

}  // namespace

TransitionHistogram transition_histogram(std::span<const int> sizes, const SizeScale& scale) {
  if (scale.size() < 2) throw Error("eval: scale needs at least 2 classes");
  if (sizes.size() < 2) throw Error("eval: size sequence needs at least 2 shots");
  std::vector<std::size_t> counts(scale.size(), 0);
  count_sequence(sizes, scale, counts);
  return normalize(counts);
}

TransitionHistogram transition_histogram(std::span<const SizeSequence> sequences, const SizeScale& scale) {
  if (scale.size() < 2) throw Error("eval: scale needs at least 2 classes");
  std::vector<std::size_t> counts(scale.size(), 0);
  for (const auto& s : sequences) count_sequence(s, scale, counts);
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  if (total == 0) throw Error("eval: degenerate corpus: fewer than 2 consecutive shots");
  return normalize(counts);
}

double histogram_rms(const TransitionHistogram& a, const TransitionHistogram& b) {
  if (a.bins.size() != b.bins.size())
    throw Error("eval: histogram bin counts differ (" + std::to_string(a.bins.size()) + " vs " +
                std::to_string(b.bins.size()) + ")");
  if (a.bins.empty()) throw Error("eval: empty histogram");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) acc += (a.bins[i] - b.bins[i]) * (a.bins[i] - b.bins[i]);
  return std::sqrt(acc / static_cast<double>(a.bins.size()));
}

double two_step_share(const TransitionHistogram& h) { return h.bins.size() > 2 ? h.bins[2] : 0.0; }

StyleReport style_report(std::span<const SizeSequence> reference, std::span<const SizeSequence> raw,
                         std::span<const SizeSequence> edited, const SizeScale& scale) {
  StyleReport r;
  r.scale_size = scale.size();
  r.reference = transition_histogram(reference, scale);
  r.raw = transition_histogram(raw, scale);
  r.edited = transition_histogram(edited, scale);
  r.rms_reference_raw = histogram_rms(r.reference, r.raw);
  r.rms_reference_edited = histogram_rms(r.reference, r.edited);
  r.rms_raw_edited = histogram_rms(r.raw, r.edited);
  r.two_step_reference = two_step_share(r.reference);
  r.two_step_raw = two_step_share(r.raw);
  r.two_step_edited = two_step_share(r.edited);
  if (r.rms_reference_edited > 0.0)
    r.improvement_ratio = r.rms_reference_raw / r.rms_reference_edited;
  else if (r.rms_reference_raw == 0.0)
    r.improvement_ratio = 1.0;  // all three agree: nothing to improve
  return r;
}

SizeSequence size_sequence(std::span<const Shot> shots) {
  SizeSequence out;
  out.reserve(shots.size());
  for (const Shot& s : shots) out.push_back(s.shot_size_class);
  return out;
}

SizeSequence edited_size_sequence(const Storyboard& sb, std::span<const Shot> shots) {
  std::map<std::pair<std::string, std::size_t>, int> by_id;
  for (const Shot& s : shots) by_id[{s.source_id, s.shot_id}] = s.shot_size_class;
  SizeSequence out;
  out.reserve(sb.entries.size());
  for (const auto& e : sb.entries) {
    auto it = by_id.find({e.source_id, e.shot_id});
    if (it == by_id.end())
      throw Error("eval: storyboard entry " + e.source_id + "#" + std::to_string(e.shot_id) + " not found among shots");
    out.push_back(it->second);
  }
  return out;
}

void write_report(const StyleReport& r, const std::filesystem::path& path) {
  json doc = {{"format", "autocut.report/1"},
              {"scale_size", r.scale_size},
              {"histograms", {{"reference", histogram_json(r.reference)}, {"raw", histogram_json(r.raw)}, {"edited", histogram_json(r.edited)}}},
              {"rms", {{"reference_raw", r.rms_reference_raw}, {"reference_edited", r.rms_reference_edited}, {"raw_edited", r.rms_raw_edited}}},
              {"two_step_share", {{"reference", r.two_step_reference}, {"raw", r.two_step_raw}, {"edited", r.two_step_edited}}},
              {"improvement_ratio", r.improvement_ratio ? json(*r.improvement_ratio) : json(nullptr)},
              {"improvement_ratio_infinite", !r.improvement_ratio.has_value()}};
  jsonl::write_file_atomic(path, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
}

std::string render_report_table(const StyleReport& r, const SizeScale& scale) {
  std::ostringstream out;
  char buf[128];
  out << "step";
  for (const char* name : {"reference", "raw", "edited"}) {
    std::snprintf(buf, sizeof buf, " %10s", name);
    out << buf;
  }
  out << "\n";
  for (std::size_t k = 0; k < scale.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%4zu %10.4f %10.4f %10.4f\n", k, r.reference.bins[k], r.raw.bins[k], r.edited.bins[k]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "n    %10zu %10zu %10zu\n", r.reference.total_transitions, r.raw.total_transitions,
                r.edited.total_transitions);
  out << buf;
  std::snprintf(buf, sizeof buf, "rms(ref,raw)=%.6f rms(ref,edited)=%.6f\n", r.rms_reference_raw, r.rms_reference_edited);
  out << buf;
  if (r.improvement_ratio)
    std::snprintf(buf, sizeof buf, "improvement ratio=%.3f\n", *r.improvement_ratio);
  else
    std::snprintf(buf, sizeof buf, "improvement ratio=inf\n");
  out << buf;
  return out.str();
}

}  // namespace autocut
