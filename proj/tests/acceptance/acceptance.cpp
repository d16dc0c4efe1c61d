// Acceptance gate. Prints one PASS/FAIL line per criterion; with arguments,
// runs only the named criteria. Exit status is 0 only when all pass.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "autocut/cli.hpp"
#include "autocut/corpus.hpp"
#include "autocut/editor.hpp"
#include "autocut/evaluate.hpp"
#include "autocut/policy.hpp"
#include "autocut/reduce.hpp"
#include "autocut/segment.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"
#include "support/style_world.hpp"

namespace fs = std::filesystem;
using namespace autocut;

#ifndef AUTOCUT_EXAMPLE_DIR
#error "AUTOCUT_EXAMPLE_DIR must point at data/example"
#endif

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<std::vector<int>> label_ints(std::span<const LabeledClip> corpus, std::span<const std::size_t> idx) {
  std::vector<std::vector<int>> out;
  for (auto i : idx) {
    std::vector<int> s;
    for (auto l : corpus[i].labels) s.push_back(label_value(l));
    out.push_back(std::move(s));
  }
  return out;
}

// Style-recovery world: 50 two-step reference films.
struct Trained {
  std::vector<ShotFile> reference;
  std::size_t segmentation_mismatches = 0;
  Corpus corpus;
  DaggerResult result;
  double seconds = 0.0;
  double cpu_seconds = 0.0;
};

const Trained& trained() {
  static std::optional<Trained> cache;
  if (cache) return *cache;
  Trained t;
  const auto start = std::chrono::steady_clock::now();
  const std::clock_t cpu_start = std::clock();
  testing::WorldOptions o;
  for (std::size_t i = 0; i < o.films; ++i) {
    const auto spec = testing::film_scenario(o, 11, 101, i);
    const auto stream = synth_stream(spec, i);
    const auto b = detect_boundaries(stream);
    if (b != planted_boundaries(spec)) ++t.segmentation_mismatches;
    t.reference.push_back(make_shot_file(stream, aggregate_shots(stream, b)));
  }
  CorpusConfig cc;
  cc.seed = 5;
  t.corpus = build_corpus(t.reference, cc);
  DaggerOptions d;
  d.seed = 9;
  t.result = dagger_train(t.corpus.clips, d);
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.cpu_seconds = static_cast<double>(std::clock() - cpu_start) / CLOCKS_PER_SEC;
  cache = std::move(t);
  return *cache;
}

Outcome style_recovery() {
  const Trained& t = trained();
  const auto& r = t.result;
  const double loss = r.trace[r.best_iteration - 1].heldout_loss;
  const double frac = loss / r.heldout_mean_length;
  const auto base =
      oracle::majority_baseline(label_ints(t.corpus.clips, r.train_indices), label_ints(t.corpus.clips, r.heldout_indices));
  const double ratio = loss > 0.0 ? base.loss / loss : INFINITY;
  std::size_t foreign = 0, shots = 0;
  for (auto i : r.heldout_indices)
    for (auto p : t.corpus.clips[i].provenance) {
      ++shots;
      foreign += p == Provenance::kForeign;
    }
  std::ostringstream d;
  d << "segmentation mismatches=" << t.segmentation_mismatches << " clips=" << t.corpus.clips.size() << " best_iter=" << r.best_iteration << " loss/len=" << fmt("%.4f", frac)
    << " (<=0.10) baseline_ratio=" << fmt("%.2f", ratio) << " (>=2, majority label " << base.label
    << ") heldout_foreign_share=" << fmt("%.4f", static_cast<double>(foreign) / static_cast<double>(shots))
    << " cpu=" << fmt("%.1f", t.cpu_seconds) << "s (<=300) wall=" << fmt("%.1f", t.seconds) << "s";
  return {frac <= 0.10 && ratio >= 2.0 && t.cpu_seconds <= 300.0, d.str()};
}

struct CliRun {
  int code;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "autocut");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, err.str()};
}

// The packaged example through the CLI, mirroring data/example/run.sh.
// Returns the report path, or nullopt with a message on failure.
std::optional<fs::path> run_example(const fs::path& work, std::string& error) {
  const fs::path here = AUTOCUT_EXAMPLE_DIR;
  const std::string cfg = (here / "config.json").string();
  std::vector<std::string> ref, raw;
  std::vector<fs::path> specs;
  for (const auto& e : fs::directory_iterator(here))
    if (e.path().string().ends_with(".scenario.json")) specs.push_back(e.path());
  std::sort(specs.begin(), specs.end());
  const auto step = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--config", cfg});
    const CliRun r = cli(args);
    if (r.code != 0) error = args[2] + ": " + r.err;
    return r.code == 0;
  };
  for (const auto& spec : specs) {
    const std::string stem = spec.filename().string().substr(0, spec.filename().string().find('.'));
    const std::string feat = (work / (stem + ".feat.jsonl")).string(), shots = (work / (stem + ".shots.jsonl")).string();
    if (!step({"synth", "--spec", spec.string(), "--out", feat})) return std::nullopt;
    if (!step({"segment", "--in", feat, "--out", shots})) return std::nullopt;
    (stem.starts_with("ref") ? ref : raw).push_back(shots);
  }
  const std::string corpus = (work / "example.corpus.jsonl").string(), policy = (work / "example.policy.json").string();
  std::vector<std::string> bc{"build-corpus", "--out", corpus, "--shots"};
  bc.insert(bc.end(), ref.begin(), ref.end());
  if (!step(bc)) return std::nullopt;
  if (!step({"train", "--corpus", corpus, "--out", policy})) return std::nullopt;
  std::vector<std::string> ev{"eval", "--out", (work / "example.report.json").string(), "--ref"};
  ev.insert(ev.end(), ref.begin(), ref.end());
  ev.push_back("--raw");
  ev.insert(ev.end(), raw.begin(), raw.end());
  ev.push_back("--edited");
  for (const auto& s : raw) {
    const std::string cut = s.substr(0, s.size() - std::string(".shots.jsonl").size()) + ".cutlist.json";
    if (!step({"edit", "--shots", s, "--policy", policy, "--out", cut})) return std::nullopt;
    ev.push_back(cut);
  }
  if (!step(ev)) return std::nullopt;
  return work / "example.report.json";
}

Outcome histogram_improvement() {
  const Trained& t = trained();
  testing::WorldOptions raw;
  raw.style = testing::SizeStyle::kUniform;
  raw.films = 30;
  raw.prefix = "raw";
  std::vector<SizeSequence> ref, raw_seq, edited;
  for (const auto& f : t.reference) ref.push_back(size_sequence(f.shots));
  for (std::size_t i = 0; i < raw.films; ++i) {
    const auto stream = synth_stream(testing::film_scenario(raw, 11, 202, i), 1000 + i);
    const auto shots = segment_stream(stream);
    raw_seq.push_back(size_sequence(shots));
    edited.push_back(edited_size_sequence(edit(shots, t.result.policy), shots));
  }
  const auto report = style_report(ref, raw_seq, edited, SizeScale::three_class());
  const double ratio = report.improvement_ratio.value_or(INFINITY);
  const std::size_t transitions = std::min(report.raw.total_transitions, report.edited.total_transitions);

  std::ostringstream d;
  d << "ratio=" << fmt("%.3f", ratio) << " (>=2) transitions raw=" << report.raw.total_transitions
    << " edited=" << report.edited.total_transitions << " (>=500) two_step ref/raw/edited="
    << fmt("%.3f", report.two_step_reference) << "/" << fmt("%.3f", report.two_step_raw) << "/"
    << fmt("%.3f", report.two_step_edited);

  testing::TempDir work("autocut-accept");
  std::string error;
  bool example_ok = false;
  if (const auto path = run_example(work.path(), error)) {
    const auto j = nlohmann::json::parse(testing::slurp(*path));
    const double ex = j.value("improvement_ratio_infinite", false) ? INFINITY : j.at("improvement_ratio").get<double>();
    d << "; packaged example ratio=" << fmt("%.3f", ex) << " (>=2)";
    example_ok = ex >= 2.0;
  } else {
    d << "; packaged example failed: " << error;
  }
  return {ratio >= 2.0 && transitions >= 500 && example_ok, d.str()};
}

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void fit_in_batches(PcaModel& m, const Eigen::MatrixXd& x, Eigen::Index batches) {
  const Eigen::Index step = x.rows() / batches;
  for (Eigen::Index b = 0; b < batches; ++b) m.fit_partial(x.middleRows(b * step, step));
}

Outcome pca_oracle() {
  Rng rng(17);
  double worst_iso = 0.0, worst_gap = 0.0, worst_res = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd iso = gaussian(rng, 500, 128);
    PcaModel a(128);
    fit_in_batches(a, iso, 5);
    worst_iso = std::max(worst_iso, oracle::projector_distance(a.components(), oracle::batch_pca_axes(iso, 64)));

    Eigen::MatrixXd gap = gaussian(rng, 500, 128) * 0.1;
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rng, 128, 128)).householderQ();
    const Eigen::MatrixXd z = gaussian(rng, 500, 64);
    for (Eigen::Index k = 0; k < 64; ++k)
      gap += (3.0 - 2.0 * static_cast<double>(k) / 63.0) * z.col(k) * q.col(k).transpose();
    PcaModel g(128, 64, 0);
    fit_in_batches(g, gap, 5);
    worst_gap = std::max(worst_gap, oracle::projector_distance(g.components(), oracle::batch_pca_axes(gap, 64)));

    const Eigen::Index rank = 16 + 12 * trial;  // 16 .. 64
    const Eigen::MatrixXd basis = gaussian(rng, rank, 256);
    const Eigen::MatrixXd low = (gaussian(rng, 500, rank) * basis).rowwise() + gaussian(rng, 1, 256).row(0);
    PcaModel l(256);
    fit_in_batches(l, low, 5);
    worst_res = std::max(worst_res, l.relative_residual(low));
  }
  std::ostringstream d;
  d << "projector distance isotropic=" << fmt("%.2e", worst_iso) << " gapped(no oversample)=" << fmt("%.2e", worst_gap)
    << " (<=0.1); rank<=64 relative residual=" << fmt("%.2e", worst_res) << " (<=1e-6)";
  return {worst_iso <= 0.1 && worst_gap <= 0.1 && worst_res <= 1e-6, d.str()};
}

Outcome segmentation_oracle() {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    for (bool tight : {false, true}) {
      ScenarioSpec spec;
      const double noise = 0.01;
      std::vector<double> center = testing::random_vector(rng, kReducedSemanticDim);
      for (int k = 0; k < 3; ++k) {
        SegmentSpec seg{std::nullopt, noise, 10 + rng.uniform_index(31), 0.5, k};
        if (tight) {
          // Adjacent centers 10x the noise scale apart (plus rounding slack).
          if (k > 0) {
            const auto dir = testing::random_vector(rng, kReducedSemanticDim);
            double n = 0.0;
            for (double x : dir) n += x * x;
            for (std::size_t i = 0; i < center.size(); ++i) center[i] += 10.0 * (1.0 + 1e-9) * noise * dir[i] / std::sqrt(n);
          }
          seg.center = center;
        }
        spec.segments.push_back(seg);
      }
      const auto got = detect_boundaries(synth_stream(spec, rng.next()));
      const auto want = planted_boundaries(spec);
      for (auto b : got) (std::find(want.begin(), want.end(), b) != want.end() ? tp : fp) += 1;
      for (auto b : want) fn += std::find(got.begin(), got.end(), b) == got.end();
    }
  }
  const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  std::ostringstream d;
  d << "200 streams (100 seeds x random/tight separation), k=3: precision=" << fmt("%.4f", precision)
    << " recall=" << fmt("%.4f", recall) << " (both 1)";
  return {fp == 0 && fn == 0, d.str()};
}

// Invariant suites; each returns an empty string or the first violation.
std::string tiling_suite() {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = testing::random_stream(rng, 2 + rng.uniform_index(120));
    const auto shots = segment_stream(s, rng.uniform(-0.5, 3.5));
    if (shots.front().start_frame != 0 || shots.back().end_frame != s.frames.size() - 1) return "tiling: ends";
    for (std::size_t i = 1; i < shots.size(); ++i)
      if (shots[i].start_frame != shots[i - 1].end_frame + 1) return "tiling: gap or overlap";
  }
  return {};
}

std::string label_suite() {
  testing::WorldOptions o;
  o.films = 8;
  o.low_aesthetic_rate = 0.25;
  std::vector<ShotFile> files;
  for (std::size_t i = 0; i < o.films; ++i) {
    const auto s = synth_stream(testing::film_scenario(o, 3, 4, i), i);
    files.push_back(make_shot_file(s, segment_stream(s)));
  }
  CorpusConfig cc;
  cc.variants = 10;
  cc.target_seconds = 30;
  const Corpus c = build_corpus(files, cc);
  std::size_t scanned = 0;
  for (const auto& clip : c.clips) {
    const std::string own = clip.clip_id.substr(0, clip.clip_id.find('/'));
    for (std::size_t i = 0; i < clip.shots.size(); ++i, ++scanned) {
      const Shot& s = clip.shots[i];
      const auto p = clip.provenance[i];
      if (p != Provenance::kReference && clip.labels[i] != ActionLabel::kSkip) return "label-5: " + clip.clip_id;
      if ((s.source_id != own && p == Provenance::kReference) || (p == Provenance::kForeign && s.source_id == own))
        return "foreign provenance: " + clip.clip_id;
      if (s.aesthetic < cc.aesthetic_threshold && clip.labels[i] != ActionLabel::kSkip) return "low aesthetic kept";
      if (p == Provenance::kReference && clip.labels[i] != duration_to_label(s.duration_s))
        return "duration bucket: " + clip.clip_id;
    }
  }
  return scanned > 1000 ? std::string{} : "label-5: too few shots scanned";
}

std::string state_suite() {
  Rng rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto shots = testing::random_shots(rng, 1 + rng.uniform_index(15));
    const std::size_t t = rng.uniform_index(shots.size());
    std::vector<ActionLabel> history;
    for (std::size_t i = 0; i < rng.uniform_index(9); ++i) history.push_back(testing::random_label(rng));
    const auto s = build_state(shots, t, history);
    if (s.size() != 670) return "state: length " + std::to_string(s.size());
    for (std::size_t k = 0; k < kHistorySpan; ++k) {
      double sum = 0.0;
      for (std::size_t a = 0; a < kNumActions; ++a) sum += s[k * kNumActions + a];
      if (sum != (k < history.size() ? 1.0 : 0.0)) return "state: history padding";
      if (k < history.size() && s[k * kNumActions + label_index(history[history.size() - 1 - k])] != 1.0)
        return "state: history order";
    }
    for (std::size_t slot = 0; slot < kShotWindow; ++slot) {
      const long idx = static_cast<long>(t) + static_cast<long>(slot) - static_cast<long>(kPastShots);
      const bool present = idx >= 0 && idx < static_cast<long>(shots.size());
      for (std::size_t j = 0; j < kReducedSemanticDim; ++j) {
        const double v = s[30 + slot * kReducedSemanticDim + j];
        if (v != (present ? shots[static_cast<std::size_t>(idx)].semantic[j] : 0.0)) return "state: semantic padding";
      }
    }
  }
  return {};
}

std::string storyboard_suite() {
  Rng rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const auto shots = testing::random_shots(rng, 1 + rng.uniform_index(30));
    std::vector<ActionLabel> labels;
    for (std::size_t i = 0; i < shots.size(); ++i) labels.push_back(testing::random_label(rng));
    const Storyboard sb = storyboard_from_labels(shots, labels);
    if (sb.entries.size() + sb.skipped.size() != shots.size()) return "storyboard: partition";
    double input = 0.0;
    for (const auto& s : shots) input += s.duration_s;
    for (std::size_t i = 0; i < sb.entries.size(); ++i) {
      const auto& e = sb.entries[i];
      const Shot& s = shots[e.shot_id];
      if (i > 0 && e.in_time_s < sb.entries[i - 1].in_time_s) return "storyboard: order";
      if (e.in_time_s < s.start_s || e.out_time_s > s.end_s() + 1e-12 || !(e.in_time_s < e.out_time_s))
        return "storyboard: bounds";
      if (e.duration_s() > bucket_cap(e.predicted_label) + 1e-12) return "storyboard: bucket cap";
    }
    if (sb.total_duration_s() > input + 1e-9) return "storyboard: total duration";
  }
  return {};
}

std::string histogram_suite() {
  Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    const int classes = trial % 2 ? 6 : 3;
    const auto scale = SizeScale::with_classes(static_cast<std::size_t>(classes));
    std::array<TransitionHistogram, 3> h;
    for (auto& x : h) {
      SizeSequence seq;
      for (std::size_t i = 0; i < 2 + rng.uniform_index(40); ++i)
        seq.push_back(static_cast<int>(rng.uniform_index(static_cast<std::size_t>(classes))));
      x = transition_histogram(seq, scale);
      double sum = 0.0;
      for (double b : x.bins) sum += b;
      if (std::abs(sum - 1.0) > 1e-9) return "histogram: normalization";
    }
    const double ab = histogram_rms(h[0], h[1]), bc = histogram_rms(h[1], h[2]), ac = histogram_rms(h[0], h[2]);
    if (ab != histogram_rms(h[1], h[0]) || histogram_rms(h[0], h[0]) != 0.0) return "histogram: symmetry/identity";
    if (ac > ab + bc + 1e-15) return "histogram: triangle inequality";
    if ((ab == 0.0) != (h[0].bins == h[1].bins)) return "histogram: zero iff equal";
  }
  return {};
}

std::string determinism_suite() {
  testing::TempDir a("autocut-det"), b("autocut-det");
  std::string error;
  if (!run_example(a.path(), error) || !run_example(b.path(), error)) return "determinism: " + error;
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a.path())) {
    const fs::path other = b / e.path().filename().string();
    if (!fs::exists(other)) return "determinism: missing " + other.string();
    if (e.path().string().ends_with(".manifest.json")) {
      // Manifests echo their own paths; everything else must match.
      auto x = nlohmann::json::parse(testing::slurp(e.path())), y = nlohmann::json::parse(testing::slurp(other));
      for (auto* m : {&x, &y}) {
        m->erase("inputs");
        m->erase("outputs");
      }
      if (x != y) return "determinism: " + e.path().filename().string();
    } else if (!e.path().string().ends_with(".policy.json") &&
               testing::slurp(e.path()) != testing::slurp(other)) {
      return "determinism: " + e.path().filename().string();
    }
    ++n;
  }
  // Policies carry the corpus manifest hash, which covers the run's paths.
  auto pa = load_policy(a / "example.policy.json"), pb = load_policy(b / "example.policy.json");
  pa.training.corpus_hash.clear();
  pb.training.corpus_hash.clear();
  if (!(pa == pb)) return "determinism: policy";
  return n > 40 ? std::string{} : "determinism: too few artifacts";
}

Outcome invariants() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> suites{
      {"tiling", tiling_suite},         {"label-5", label_suite},         {"state-670", state_suite},
      {"storyboard", storyboard_suite}, {"histogram", histogram_suite}, {"determinism", determinism_suite}};
  std::ostringstream d;
  bool ok = true;
  for (const auto& [name, run] : suites) {
    const std::string v = run();
    d << name << "=" << (v.empty() ? "ok" : v) << " ";
    ok = ok && v.empty();
  }
  return {ok, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"style_recovery", style_recovery},   {"histogram_improvement", histogram_improvement},
      {"pca_oracle", pca_oracle},           {"segmentation_oracle", segmentation_oracle},
      {"invariants", invariants}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted)
    if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; })) {
      std::fprintf(stderr, "unknown criterion '%s'\n", w.c_str());
      return 2;
    }
  bool all = true;
  for (const auto& [name, run] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
