#include "autocut/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "autocut/error.hpp"
#include "jsonl.hpp"

namespace autocut {

namespace {

using jsonl::json;

constexpr const char* kPcaFormat = "autocut.pca/1";

// Makes each row's largest-magnitude entry positive so the basis is a
// deterministic function of the data rather than of SVD internals.
void canonicalize_signs(Eigen::MatrixXd& rows) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    Eigen::Index arg = 0;
    rows.row(r).cwiseAbs().maxCoeff(&arg);
    if (rows(r, arg) < 0.0) rows.row(r) *= -1.0;
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

PcaModel::PcaModel(std::size_t dim_in, std::size_t n_components, std::size_t oversample)
    : dim_in_(dim_in), n_components_(n_components), oversample_(oversample) {
  if (n_components == 0) throw Error("pca: n_components must be positive");
  if (n_components > dim_in)
    throw Error("pca: n_components " + std::to_string(n_components) + " exceeds input dimension " +
                std::to_string(dim_in));
  mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_in));
}

std::size_t PcaModel::reported_rows() const {
  return std::min<std::size_t>(n_components_, static_cast<std::size_t>(basis_.rows()));
}

void PcaModel::fit_partial(const Eigen::MatrixXd& batch) {
  if (dim_in_ == 0) throw Error("pca: model has no input dimension");
  if (batch.rows() < 1) throw Error("pca: empty batch");
  if (static_cast<std::size_t>(batch.cols()) != dim_in_)
    throw Error("pca: dimension mismatch: batch has " + std::to_string(batch.cols()) +
                " columns, model expects " + std::to_string(dim_in_));
  if (!batch.allFinite()) throw Error("pca: batch contains non-finite values");

  if (n_samples_seen_ > 0) {
    fit_rows(batch);
    return;
  }
  Eigen::MatrixXd grown(pending_.rows() + batch.rows(), batch.cols());
  if (pending_.rows() > 0) grown.topRows(pending_.rows()) = pending_;
  grown.bottomRows(batch.rows()) = batch;
  pending_ = std::move(grown);
  if (static_cast<std::size_t>(pending_.rows()) < n_components_) return;
  Eigen::MatrixXd first = std::move(pending_);
  pending_.resize(0, 0);
  fit_rows(first);
}

void PcaModel::fit_rows(const Eigen::MatrixXd& batch) {
  const Eigen::Index b = batch.rows();
  const Eigen::VectorXd batch_mean = batch.colwise().mean().transpose();

  Eigen::MatrixXd stack;
  Eigen::VectorXd new_mean;
  if (n_samples_seen_ == 0) {
    new_mean = batch_mean;
    stack = batch.rowwise() - batch_mean.transpose();
  } else {
    const double n_old = static_cast<double>(n_samples_seen_);
    const double n_new = static_cast<double>(b);
    const double n_total = n_old + n_new;
    new_mean = (n_old * mean_ + n_new * batch_mean) / n_total;
    const Eigen::Index k = basis_.rows();
    stack.resize(k + b + 1, static_cast<Eigen::Index>(dim_in_));
    stack.topRows(k) = singular_values_.asDiagonal() * basis_;
    stack.middleRows(k, b) = batch.rowwise() - batch_mean.transpose();
    stack.row(k + b) = std::sqrt(n_old * n_new / n_total) * (mean_ - batch_mean).transpose();
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(stack, Eigen::ComputeThinV);
  const std::size_t target = std::min(n_components_ + oversample_, dim_in_);
  const auto keep = static_cast<Eigen::Index>(
      std::min<std::size_t>(target, static_cast<std::size_t>(svd.matrixV().cols())));
  basis_ = svd.matrixV().leftCols(keep).transpose();
  singular_values_ = svd.singularValues().head(keep);
  canonicalize_signs(basis_);

  mean_ = std::move(new_mean);
  n_samples_seen_ += static_cast<std::uint64_t>(b);
  last_batch_residual_ = relative_residual(batch);
}

double PcaModel::relative_residual(const Eigen::MatrixXd& rows) const {
  if (basis_.rows() == 0) throw Error("pca: model not fitted");
  if (static_cast<std::size_t>(rows.cols()) != dim_in_) throw Error("pca: dimension mismatch");
  const Eigen::MatrixXd centered = rows.rowwise() - mean_.transpose();
  const Eigen::MatrixXd c = components();
  const Eigen::MatrixXd recon = (centered * c.transpose()) * c;
  const double energy = centered.squaredNorm();
  if (energy == 0.0) return 0.0;
  return (centered - recon).squaredNorm() / energy;
}

Eigen::VectorXd PcaModel::transform(std::span<const double> vec) const {
  if (!is_fitted())
    throw Error("pca: model not fitted (" + std::to_string(n_samples_seen_) + " samples seen, need " +
                std::to_string(n_components_) + ")");
  if (vec.size() != dim_in_)
    throw Error("pca: dimension mismatch: vector has " + std::to_string(vec.size()) + " entries, model expects " +
                std::to_string(dim_in_));
  const Eigen::Map<const Eigen::VectorXd> x(vec.data(), static_cast<Eigen::Index>(vec.size()));
  return components() * (x - mean_);
}

std::vector<double> PcaModel::transform_vector(std::span<const double> vec) const {
  return to_std(transform(vec));
}

void PcaModel::save(const std::filesystem::path& path) const {
  if (pending_.rows() > 0 || basis_.rows() == 0)
    throw Error("pca: cannot save a model that has not completed its first fit");
  json header = {{"format", kPcaFormat},
                 {"dim_in", dim_in_},
                 {"n_components", n_components_},
                 {"oversample", oversample_},
                 {"retained_rank", basis_.rows()},
                 {"n_samples_seen", n_samples_seen_},
                 {"last_batch_residual", last_batch_residual_},
                 {"singular_values", to_std(singular_values_)}};
  jsonl::write_file_atomic(path, [&](std::ostream& out) {
    out << jsonl::dump(header) << '\n';
    out << jsonl::dump(json{{"mean", to_std(mean_)}}) << '\n';
    for (Eigen::Index r = 0; r < basis_.rows(); ++r) {
      const Eigen::VectorXd row = basis_.row(r).transpose();
      out << jsonl::dump(json{{"component", to_std(row)}}) << '\n';
    }
  });
}

PcaModel PcaModel::load(const std::filesystem::path& path) {
  const auto lines = jsonl::read_file(path, "pca model");
  const std::string ctx = "pca model " + path.string();
  if (lines.size() < 2) throw FormatError(ctx + ": truncated file");
  const json& h = lines[0].value;
  if (h.value("format", std::string()) != kPcaFormat) throw FormatError(ctx + ": unknown format");
  const auto dim_in = jsonl::integer_field(h, "dim_in", ctx);
  const auto n_components = jsonl::integer_field(h, "n_components", ctx);
  const auto oversample = jsonl::integer_field(h, "oversample", ctx);
  const auto retained = jsonl::integer_field(h, "retained_rank", ctx);
  if (dim_in <= 0 || n_components <= 0 || oversample < 0 || retained <= 0)
    throw FormatError(ctx + ": header values out of range");
  PcaModel m(static_cast<std::size_t>(dim_in), static_cast<std::size_t>(n_components),
             static_cast<std::size_t>(oversample));
  m.n_samples_seen_ = static_cast<std::uint64_t>(jsonl::integer_field(h, "n_samples_seen", ctx));
  m.last_batch_residual_ = jsonl::number_field(h, "last_batch_residual", ctx);
  const auto sv = jsonl::vector_field(h, "singular_values", ctx);
  if (sv.size() != static_cast<std::size_t>(retained) || lines.size() != static_cast<std::size_t>(retained) + 2)
    throw FormatError(ctx + ": retained_rank does not match the stored rows");
  m.singular_values_ = Eigen::Map<const Eigen::VectorXd>(sv.data(), retained);

  auto mean = jsonl::vector_field(lines[1].value, "mean", ctx);
  if (mean.size() != static_cast<std::size_t>(dim_in)) throw FormatError(ctx + ": mean has wrong length");
  m.mean_ = Eigen::Map<const Eigen::VectorXd>(mean.data(), dim_in);
  m.basis_.resize(retained, dim_in);
  for (Eigen::Index r = 0; r < retained; ++r) {
    auto row = jsonl::vector_field(lines[static_cast<std::size_t>(r) + 2].value, "component", ctx);
    if (row.size() != static_cast<std::size_t>(dim_in))
      throw FormatError(ctx + ": component " + std::to_string(r) + " has wrong length");
    m.basis_.row(r) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), dim_in);
  }
  return m;
}

Eigen::MatrixXd semantic_rows(const FeatureStream& stream, std::size_t first, std::size_t count) {
  if (first + count > stream.frames.size()) throw Error("pca: frame range out of bounds");
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(stream.dim_semantic));
  for (std::size_t i = 0; i < count; ++i) {
    const auto& v = stream.frames[first + i].semantic;
    rows.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return rows;
}

FeatureStream reduce_stream(const PcaModel& model, const FeatureStream& stream) {
  if (model.n_components() != kReducedSemanticDim)
    throw Error("pca: reduced streams must be 64-dimensional, model has " +
                std::to_string(model.n_components()) + " components");
  FeatureStream out = stream;
  out.dim_semantic = kReducedSemanticDim;
  for (FrameFeature& f : out.frames) f.semantic = model.transform_vector(f.semantic);
  return out;
}

}  // namespace autocut
