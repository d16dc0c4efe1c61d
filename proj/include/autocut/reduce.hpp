#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "autocut/featstore.hpp"

namespace autocut {

/// Streaming PCA by mean-corrected incremental SVD.
///
/// Each fit_partial stacks the retained basis (scaled by its singular values),
/// the centered batch, and a mean-correction row, and keeps the leading
/// right singular vectors of that stack. The model retains
/// `n_components + oversample` directions internally and reports the leading
/// `n_components`; the extra directions keep variance that is briefly out of
/// the top-k from being discarded for good.
///
/// Batches are buffered until at least `n_components` rows have arrived.
/// fit_partial must be externally serialized; const members are thread-safe.
class PcaModel {
 public:
  static constexpr std::size_t kDefaultComponents = 64;
  static constexpr std::size_t kDefaultOversample = 64;
  static constexpr std::size_t kDefaultBatchRows = 4096;

  PcaModel() = default;
  explicit PcaModel(std::size_t dim_in, std::size_t n_components = kDefaultComponents,
                    std::size_t oversample = kDefaultOversample);

  void fit_partial(const Eigen::MatrixXd& batch);

  /// components * (vec - mean). Requires is_fitted().
  Eigen::VectorXd transform(std::span<const double> vec) const;
  std::vector<double> transform_vector(std::span<const double> vec) const;

  /// Relative residual of `rows` against the reported components: summed
  /// squared reconstruction error over summed squared centered norm.
  double relative_residual(const Eigen::MatrixXd& rows) const;

  bool is_fitted() const { return n_samples_seen_ >= n_components_ && basis_.rows() > 0; }
  std::size_t dim_in() const { return dim_in_; }
  std::size_t n_components() const { return n_components_; }
  std::size_t oversample() const { return oversample_; }
  std::uint64_t n_samples_seen() const { return n_samples_seen_; }
  std::size_t buffered_rows() const { return static_cast<std::size_t>(pending_.rows()); }
  double last_batch_residual() const { return last_batch_residual_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Leading n_components rows, each a unit vector; rows are orthonormal.
  Eigen::MatrixXd components() const { return basis_.topRows(reported_rows()); }
  const Eigen::VectorXd& singular_values() const { return singular_values_; }

  /// `.pca.json`: a header line followed by the mean row and one row per
  /// retained basis vector. Saving requires an empty buffer.
  void save(const std::filesystem::path& path) const;
  static PcaModel load(const std::filesystem::path& path);

 private:
  void fit_rows(const Eigen::MatrixXd& batch);
  std::size_t reported_rows() const;

  std::size_t dim_in_ = 0;
  std::size_t n_components_ = kDefaultComponents;
  std::size_t oversample_ = kDefaultOversample;
  std::uint64_t n_samples_seen_ = 0;
  double last_batch_residual_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd basis_;  // retained rows x dim_in
  Eigen::VectorXd singular_values_;
  Eigen::MatrixXd pending_;
};

/// Projects every frame's semantic vector, yielding a 64-dim stream.
FeatureStream reduce_stream(const PcaModel& model, const FeatureStream& stream);

/// Stacks frames [first, first + count) of a stream as matrix rows.
Eigen::MatrixXd semantic_rows(const FeatureStream& stream, std::size_t first, std::size_t count);

}  // namespace autocut
