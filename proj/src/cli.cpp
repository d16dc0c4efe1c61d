#include "autocut/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include "autocut/corpus.hpp"
#include "autocut/editor.hpp"
#include "autocut/error.hpp"
#include "autocut/evaluate.hpp"
#include "autocut/featstore.hpp"
#include "autocut/policy.hpp"
#include "autocut/reduce.hpp"
#include "autocut/segment.hpp"
#include "jsonl.hpp"
#include "manifest.hpp"

namespace autocut {

namespace {

using jsonl::json;
namespace fs = std::filesystem;

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Command-line values; unset optionals fall back to the config file.
struct Flags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold_k;
  std::optional<double> target_seconds;
  std::optional<std::size_t> variants;
  std::optional<double> aesthetic_threshold;
  std::optional<double> max_foreign_fraction;
  bool no_originals = false;
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<double> holdout_frac;
  bool extra_features = false;
  std::optional<std::size_t> scale;
  std::optional<std::size_t> pca_components;
  std::optional<std::size_t> pca_oversample;
  std::optional<std::size_t> pca_batch;

  std::string in, out, spec, pca, corpus, policy, shots_file;
  std::vector<std::string> inputs, shots, ref, raw, edited, edited_shots;
  bool table = false;
};

template <typename T>
void resolve(T& slot, const std::optional<T>& flag, const json& config, const char* key) {
  if (flag) {
    slot = *flag;
  } else if (auto it = config.find(key); it != config.end()) {
    try {
      slot = it->get<T>();
    } catch (const json::exception&) {
      throw UsageError(std::string("config: bad value for '") + key + "'");
    }
  }
}

RunConfig resolve_config(const Flags& f) {
  json config = json::object();
  if (f.config_path) {
    config = jsonl::parse_json_file(*f.config_path, "config");
    if (!config.is_object()) throw UsageError("config: expected a JSON object");
  }
  static const std::vector<std::string> known = {
      "seed", "threshold_k", "target_seconds", "variants", "aesthetic_threshold", "max_foreign_fraction",
      "keep_originals", "iterations", "epochs", "lr",
      "holdout_frac", "extra_features", "scale", "pca_components", "pca_oversample", "pca_batch"};
  for (const auto& [key, value] : config.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw UsageError("config: unknown key '" + key + "'");

  RunConfig c;
  if (const char* env = std::getenv("AUTOCUT_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == nullptr || *end != '\0') throw UsageError("AUTOCUT_SEED is not an unsigned integer");
    c.seed = v;
  }
  resolve(c.seed, f.seed, config, "seed");
  resolve(c.threshold_k, f.threshold_k, config, "threshold_k");
  resolve(c.target_seconds, f.target_seconds, config, "target_seconds");
  resolve(c.variants, f.variants, config, "variants");
  resolve(c.aesthetic_threshold, f.aesthetic_threshold, config, "aesthetic_threshold");
  resolve(c.max_foreign_fraction, f.max_foreign_fraction, config, "max_foreign_fraction");
  resolve(c.keep_originals, f.no_originals ? std::optional<bool>(false) : std::nullopt, config, "keep_originals");
  resolve(c.iterations, f.iterations, config, "iterations");
  resolve(c.epochs, f.epochs, config, "epochs");
  resolve(c.lr, f.lr, config, "lr");
  resolve(c.holdout_frac, f.holdout_frac, config, "holdout_frac");
  resolve(c.extra_features, f.extra_features ? std::optional<bool>(true) : std::nullopt, config, "extra_features");
  resolve(c.scale, f.scale, config, "scale");
  resolve(c.pca_components, f.pca_components, config, "pca_components");
  resolve(c.pca_oversample, f.pca_oversample, config, "pca_oversample");
  resolve(c.pca_batch, f.pca_batch, config, "pca_batch");
  return c;
}

json config_json(const RunConfig& c) {
  return {{"seed", c.seed},
          {"threshold_k", c.threshold_k},
          {"target_seconds", c.target_seconds},
          {"variants", c.variants},
          {"aesthetic_threshold", c.aesthetic_threshold},
          {"max_foreign_fraction", c.max_foreign_fraction},
          {"keep_originals", c.keep_originals},
          {"iterations", c.iterations},
          {"epochs", c.epochs},
          {"lr", c.lr},
          {"holdout_frac", c.holdout_frac},
          {"extra_features", c.extra_features},
          {"scale", c.scale},
          {"pca_components", c.pca_components},
          {"pca_oversample", c.pca_oversample},
          {"pca_batch", c.pca_batch}};
}

json base_manifest(const std::string& command, const RunConfig& c, const std::vector<std::string>& inputs,
                   const std::vector<std::string>& outputs) {
  return {{"tool", "autocut"},
          {"version", "0.1.0"},
          {"command", command},
          {"config", config_json(c)},
          {"inputs", inputs},
          {"outputs", outputs}};
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// `.sizes.json` holds externally annotated sequences: {"sequences": [[...], ...]}.
std::vector<SizeSequence> load_sequences(const std::vector<std::string>& paths, std::vector<Shot>* shots_out) {
  std::vector<SizeSequence> out;
  for (const auto& p : paths) {
    if (has_suffix(p, ".sizes.json")) {
      const json doc = jsonl::parse_json_file(p, "size annotations");
      for (const json& seq : jsonl::field(doc, "sequences", "size annotations " + p))
        out.push_back(seq.get<SizeSequence>());
    } else {
      ShotFile f = read_shots(p);
      out.push_back(size_sequence(f.shots));
      if (shots_out) shots_out->insert(shots_out->end(), f.shots.begin(), f.shots.end());
    }
  }
  return out;
}

int cmd_synth(const Flags& f, const RunConfig& c, std::ostream& out) {
  const ScenarioSpec spec = read_scenario(f.spec);
  const FeatureStream s = synth_stream(spec, c.seed);
  write_stream(s, fs::path(f.out));
  json m = base_manifest("synth", c, {f.spec}, {f.out});
  m["frame_count"] = s.frames.size();
  m["planted_boundaries"] = planted_boundaries(spec);
  detail::write_manifest(f.out, m);
  out << "synth: wrote " << s.frames.size() << " frames to " << f.out << "\n";
  return kExitOk;
}

int cmd_segment(const Flags& f, const RunConfig& c, std::ostream& out) {
  FeatureStream s = read_stream(f.in);
  std::vector<std::string> inputs{f.in};
  if (!f.pca.empty()) {
    s = reduce_stream(PcaModel::load(f.pca), s);
    inputs.push_back(f.pca);
  }
  const auto boundaries = detect_boundaries(s, c.threshold_k);
  ShotFile file = make_shot_file(s, aggregate_shots(s, boundaries));
  write_shots(file, f.out);
  json m = base_manifest("segment", c, inputs, {f.out});
  m["shot_count"] = file.shots.size();
  m["boundaries"] = boundaries;
  detail::write_manifest(f.out, m);
  out << "segment: " << file.shots.size() << " shots -> " << f.out << "\n";
  return kExitOk;
}

int cmd_pca_fit(const Flags& f, const RunConfig& c, std::ostream& out) {
  if (c.pca_batch == 0) throw UsageError("pca-fit: --batch must be positive");
  std::optional<PcaModel> model;
  Eigen::MatrixXd batch;
  std::size_t fill = 0;
  for (const auto& path : f.inputs) {
    const FeatureStream s = read_stream(path);
    if (!model) model.emplace(s.dim_semantic, c.pca_components, c.pca_oversample);
    if (s.dim_semantic != model->dim_in()) throw Error("pca-fit: " + path + " has a different semantic dimension");
    if (batch.rows() == 0) batch.resize(static_cast<Eigen::Index>(c.pca_batch), static_cast<Eigen::Index>(model->dim_in()));
    for (const auto& frame : s.frames) {
      batch.row(static_cast<Eigen::Index>(fill++)) =
          Eigen::Map<const Eigen::RowVectorXd>(frame.semantic.data(), static_cast<Eigen::Index>(frame.semantic.size()));
      if (fill == c.pca_batch) {
        model->fit_partial(batch);
        fill = 0;
      }
    }
  }
  if (fill > 0) model->fit_partial(batch.topRows(static_cast<Eigen::Index>(fill)));
  if (!model->is_fitted())
    throw Error("pca-fit: only " + std::to_string(model->n_samples_seen() + model->buffered_rows()) +
                " frames; need at least " + std::to_string(model->n_components()));
  model->save(f.out);
  json m = base_manifest("pca-fit", c, f.inputs, {f.out});
  m["n_samples_seen"] = model->n_samples_seen();
  m["last_batch_residual"] = model->last_batch_residual();
  detail::write_manifest(f.out, m);
  out << "pca-fit: " << model->n_samples_seen() << " samples, last batch residual " << model->last_batch_residual()
      << "\n";
  return kExitOk;
}

int cmd_build_corpus(const Flags& f, const RunConfig& c, std::ostream& out) {
  std::vector<fs::path> paths(f.shots.begin(), f.shots.end());
  CorpusConfig cc{c.target_seconds, c.variants, c.aesthetic_threshold, c.seed, c.max_foreign_fraction,
                  c.keep_originals};
  const Corpus corpus = build_corpus(paths, cc);
  write_corpus(corpus, f.out);
  // Extend the corpus manifest with the run echo.
  json m = jsonl::parse_json_file(detail::manifest_path(f.out), "manifest");
  json run = base_manifest("build-corpus", c, f.shots, {f.out});
  for (auto& [k, v] : run.items()) m[k] = v;
  detail::write_manifest(f.out, m);
  out << "build-corpus: " << corpus.manifest.total_clips << " clips (" << corpus.manifest.reference_clips
      << " reference) -> " << f.out << "\n";
  return kExitOk;
}

int cmd_train(const Flags& f, const RunConfig& c, std::ostream& out) {
  const auto clips = read_corpus(f.corpus);
  DaggerOptions opt;
  opt.iterations = c.iterations;
  opt.epochs_per_iteration = c.epochs;
  opt.learning_rate = c.lr;
  opt.holdout_fraction = c.holdout_frac;
  opt.seed = c.seed;
  opt.extra_features = c.extra_features;
  DaggerResult result = dagger_train(clips, opt);
  const fs::path corpus_manifest = detail::manifest_path(f.corpus);
  result.policy.training.corpus_hash = file_hash(fs::exists(corpus_manifest) ? corpus_manifest : fs::path(f.corpus));
  save_policy(result.policy, f.out);

  json trace = json::array();
  for (const auto& r : result.trace)
    trace.push_back({{"iteration", r.iteration},
                     {"dataset_size", r.dataset_size},
                     {"heldout_loss", r.heldout_loss},
                     {"heldout_shot_error", r.heldout_shot_error}});
  json m = base_manifest("train", c, {f.corpus}, {f.out});
  m["best_iteration"] = result.best_iteration;
  m["heldout_mean_length"] = result.heldout_mean_length;
  m["train_clips"] = result.train_indices.size();
  m["heldout_clips"] = result.heldout_indices.size();
  m["trace"] = trace;
  detail::write_manifest(f.out, m);
  const auto& best = result.trace[result.best_iteration - 1];
  out << "train: best iteration " << result.best_iteration << ", held-out loss " << best.heldout_loss
      << " (mean length " << result.heldout_mean_length << ") -> " << f.out << "\n";
  return kExitOk;
}

int cmd_edit(const Flags& f, const RunConfig& c, std::ostream& out) {
  const ShotFile shots = read_shots(f.shots_file);
  const Policy policy = load_policy(f.policy);
  if (!policy.fitted()) throw Error("policy not fitted");
  const Storyboard sb = edit(shots.shots, policy);
  const CutlistPaths paths = emit_cutlist(sb, f.out);
  json m = base_manifest("edit", c, {f.shots_file, f.policy}, {paths.cutlist.string(), paths.plan.string()});
  m["entries"] = sb.entries.size();
  m["skipped"] = sb.skipped.size();
  m["total_duration_s"] = sb.total_duration_s();
  if (sb.all_skipped()) m["warning"] = "all shots skipped";
  detail::write_manifest(paths.cutlist, m);
  out << "edit: kept " << sb.entries.size() << " of " << shots.shots.size() << " shots -> " << paths.cutlist.string()
      << "\n";
  return kExitOk;
}

int cmd_eval(const Flags& f, const RunConfig& c, std::ostream& out) {
  const SizeScale scale = SizeScale::with_classes(c.scale);
  std::vector<Shot> raw_shots;
  const auto ref = load_sequences(f.ref, nullptr);
  const auto raw = load_sequences(f.raw, &raw_shots);
  std::vector<Shot> lookup = raw_shots;
  if (!f.edited_shots.empty()) {
    lookup.clear();
    load_sequences(f.edited_shots, &lookup);
  }
  std::vector<SizeSequence> edited;
  for (const auto& p : f.edited) edited.push_back(edited_size_sequence(read_cutlist(p), lookup));
  const StyleReport report = style_report(ref, raw, edited, scale);
  write_report(report, f.out);
  std::vector<std::string> inputs = f.ref;
  inputs.insert(inputs.end(), f.raw.begin(), f.raw.end());
  inputs.insert(inputs.end(), f.edited.begin(), f.edited.end());
  json m = base_manifest("eval", c, inputs, {f.out});
  m["improvement_ratio"] = report.improvement_ratio ? json(*report.improvement_ratio) : json(nullptr);
  detail::write_manifest(f.out, m);
  if (f.table) out << render_report_table(report, scale);
  out << "eval: report -> " << f.out << "\n";
  return kExitOk;
}

void error_line(std::ostream& err, const std::string& command, const std::string& message, int code) {
  err << json{{"error", message}, {"command", command}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"autocut: learn an editing style from reference footage and apply it to new footage", "autocut"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_path, "JSON config file (flags take precedence)");
  app.add_option("--seed", f.seed, "Global seed (falls back to AUTOCUT_SEED, then 0)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic feature stream from a scenario");
  synth->add_option("--spec", f.spec, "Scenario JSON")->required();
  synth->add_option("--out", f.out, "Output .feat.jsonl")->required();

  auto* segment = app.add_subcommand("segment", "Segment a feature stream into shots");
  segment->add_option("--in", f.in, "Input .feat.jsonl")->required();
  segment->add_option("--out", f.out, "Output .shots.jsonl")->required();
  segment->add_option("--pca", f.pca, "Reduce semantics with this .pca.json first");
  segment->add_option("--threshold-k", f.threshold_k, "Cut threshold mean + k * stddev");

  auto* pca = app.add_subcommand("pca-fit", "Fit incremental PCA over feature streams");
  pca->add_option("--in", f.inputs, "Input .feat.jsonl files")->required();
  pca->add_option("--out", f.out, "Output .pca.json")->required();
  pca->add_option("--components", f.pca_components, "Reported components");
  pca->add_option("--oversample", f.pca_oversample, "Extra directions tracked internally");
  pca->add_option("--batch", f.pca_batch, "Rows per incremental update");

  auto* corpus = app.add_subcommand("build-corpus", "Build the imitation-learning corpus");
  corpus->add_option("--shots", f.shots, "Reference .shots.jsonl files (at least 2)")->required();
  corpus->add_option("--out", f.out, "Output .corpus.jsonl")->required();
  corpus->add_option("--target-seconds", f.target_seconds, "Clip length target");
  corpus->add_option("--variants", f.variants, "Augmented variants per clip");
  corpus->add_option("--aesthetic-threshold", f.aesthetic_threshold, "Skip shots scoring below this");
  corpus->add_option("--max-foreign-fraction", f.max_foreign_fraction, "Upper bound on insertions per variant");
  corpus->add_flag("--no-originals", f.no_originals, "Emit augmented variants only");

  auto* train = app.add_subcommand("train", "Train the editing policy with DAGGER");
  train->add_option("--corpus", f.corpus, "Input .corpus.jsonl")->required();
  train->add_option("--out", f.out, "Output .policy.json")->required();
  train->add_option("--iterations", f.iterations, "DAGGER iterations");
  train->add_option("--epochs", f.epochs, "SGD epochs per iteration");
  train->add_option("--lr", f.lr, "Initial learning rate");
  train->add_option("--holdout-frac", f.holdout_frac, "Held-out clip fraction");
  train->add_flag("--extra-features", f.extra_features, "Append shot-size and aesthetic features to the state");

  auto* edit_cmd = app.add_subcommand("edit", "Apply a policy to shots and emit a cutlist");
  edit_cmd->add_option("--shots", f.shots_file, "Input .shots.jsonl")->required();
  edit_cmd->add_option("--policy", f.policy, "Trained .policy.json")->required();
  edit_cmd->add_option("--out", f.out, "Output .cutlist.json (the .plan.sh goes alongside)")->required();

  auto* eval = app.add_subcommand("eval", "Compare shot-size transition histograms");
  eval->add_option("--ref", f.ref, "Reference .shots.jsonl or .sizes.json files")->required();
  eval->add_option("--raw", f.raw, "Raw .shots.jsonl or .sizes.json files")->required();
  eval->add_option("--edited", f.edited, "Edited .cutlist.json files")->required();
  eval->add_option("--edited-shots", f.edited_shots, "Shots the cutlists were cut from (default: --raw)");
  eval->add_option("--scale", f.scale, "Size scale: 3 or 6");
  eval->add_option("--out", f.out, "Output .report.json")->required();
  eval->add_flag("--table", f.table, "Print a text table");

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    error_line(err, "", e.what(), kExitUsage);
    return kExitUsage;
  }

  const auto subs = app.get_subcommands();
  const std::string command = subs.empty() ? "" : subs.front()->get_name();
  try {
    const RunConfig config = resolve_config(f);
    if (command == "synth") return cmd_synth(f, config, out);
    if (command == "segment") return cmd_segment(f, config, out);
    if (command == "pca-fit") return cmd_pca_fit(f, config, out);
    if (command == "build-corpus") return cmd_build_corpus(f, config, out);
    if (command == "train") return cmd_train(f, config, out);
    if (command == "edit") return cmd_edit(f, config, out);
    if (command == "eval") return cmd_eval(f, config, out);
    error_line(err, command, "unknown subcommand", kExitUsage);
    return kExitUsage;
  } catch (const UsageError& e) {
    error_line(err, command, e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    error_line(err, command, e.what(), kExitStageError);
    return kExitStageError;
  }
}

}  // namespace autocut
