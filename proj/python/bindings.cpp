#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "autocut/cli.hpp"
#include "autocut/error.hpp"
#include "autocut/evaluate.hpp"
#include "autocut/featstore.hpp"
#include "autocut/policy.hpp"
#include "autocut/reduce.hpp"
#include "autocut/segment.hpp"

namespace py = pybind11;
using namespace autocut;

namespace {

// A bare stream around a (frames x dim) matrix; only semantics matter for
// boundary detection.
FeatureStream stream_from_rows(const Eigen::MatrixXd& rows) {
  FeatureStream s;
  s.source_id = "array";
  s.fps_sampled = 1.0;
  s.dim_semantic = static_cast<std::size_t>(rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    FrameFeature f;
    f.frame_index = i;
    f.timestamp_s = static_cast<double>(i);
    f.semantic.resize(static_cast<std::size_t>(rows.cols()));
    for (Eigen::Index j = 0; j < rows.cols(); ++j) f.semantic[static_cast<std::size_t>(j)] = rows(i, j);
    s.frames.push_back(std::move(f));
  }
  return s;
}

py::dict histogram_dict(const TransitionHistogram& h) {
  py::dict d;
  d["bins"] = h.bins;
  d["total_transitions"] = h.total_transitions;
  return d;
}

}  // namespace

PYBIND11_MODULE(_autocut, m) {
  m.doc() = "autocut core bindings";
  m.attr("__version__") = "0.1.0";

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<PcaModel>(m, "PcaModel")
      .def(py::init<std::size_t, std::size_t, std::size_t>(), py::arg("dim_in"),
           py::arg("n_components") = PcaModel::kDefaultComponents,
           py::arg("oversample") = PcaModel::kDefaultOversample)
      .def("fit_partial", &PcaModel::fit_partial, py::arg("batch"))
      .def("transform",
           [](const PcaModel& p, const std::vector<double>& v) { return Eigen::VectorXd(p.transform(v)); })
      .def("relative_residual", &PcaModel::relative_residual, py::arg("rows"))
      .def_property_readonly("components", &PcaModel::components)
      .def_property_readonly("mean", &PcaModel::mean)
      .def_property_readonly("singular_values", &PcaModel::singular_values)
      .def_property_readonly("n_samples_seen", &PcaModel::n_samples_seen)
      .def_property_readonly("n_components", &PcaModel::n_components)
      .def_property_readonly("dim_in", &PcaModel::dim_in)
      .def_property_readonly("buffered_rows", &PcaModel::buffered_rows)
      .def("is_fitted", &PcaModel::is_fitted)
      .def("save", &PcaModel::save, py::arg("path"))
      .def_static("load", &PcaModel::load, py::arg("path"));

  m.def(
      "detect_boundaries",
      [](const Eigen::MatrixXd& rows, double k) { return detect_boundaries(stream_from_rows(rows), k); },
      py::arg("semantics"), py::arg("threshold_k") = kDefaultThresholdK,
      "Frame indices that start a new shot, for a (frames x dim) array.");

  m.def(
      "synth",
      [](const std::filesystem::path& spec, std::uint64_t seed, const std::filesystem::path& out) {
        const ScenarioSpec s = read_scenario(spec);
        write_stream(synth_stream(s, seed), out);
        return planted_boundaries(s);
      },
      py::arg("spec"), py::arg("seed"), py::arg("out"), "Writes a synthetic .feat.jsonl; returns planted boundaries.");

  m.def(
      "segment_file",
      [](const std::filesystem::path& in, const std::filesystem::path& out, double k) {
        const FeatureStream s = read_stream(in);
        const ShotFile f = make_shot_file(s, segment_stream(s, k));
        write_shots(f, out);
        return f.shots.size();
      },
      py::arg("feat"), py::arg("out"), py::arg("threshold_k") = kDefaultThresholdK);

  m.def(
      "transition_histogram",
      [](const std::vector<SizeSequence>& seqs, std::size_t scale) {
        return histogram_dict(transition_histogram(seqs, SizeScale::with_classes(scale)));
      },
      py::arg("sequences"), py::arg("scale") = 3);

  m.def(
      "histogram_rms",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return histogram_rms(TransitionHistogram{a, 0}, TransitionHistogram{b, 0});
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "style_report",
      [](const std::vector<SizeSequence>& ref, const std::vector<SizeSequence>& raw,
         const std::vector<SizeSequence>& edited, std::size_t scale) {
        const StyleReport r = style_report(ref, raw, edited, SizeScale::with_classes(scale));
        py::dict d;
        d["reference"] = histogram_dict(r.reference);
        d["raw"] = histogram_dict(r.raw);
        d["edited"] = histogram_dict(r.edited);
        d["rms_reference_raw"] = r.rms_reference_raw;
        d["rms_reference_edited"] = r.rms_reference_edited;
        d["improvement_ratio"] = r.improvement_ratio ? *r.improvement_ratio : INFINITY;
        return d;
      },
      py::arg("reference"), py::arg("raw"), py::arg("edited"), py::arg("scale") = 3);

  m.def(
      "state_size", [](bool extras) { return StateLayout{kReducedSemanticDim, extras}.size(); },
      py::arg("extra_features") = false);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> argv{"autocut"};
        argv.insert(argv.end(), args.begin(), args.end());
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(argv, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
