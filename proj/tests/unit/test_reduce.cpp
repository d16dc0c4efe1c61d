#include <doctest.h>

#include <Eigen/Dense>

#include "autocut/error.hpp"
#include "autocut/reduce.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace autocut;
using autocut::testing::TempDir;

namespace {

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

/// Rows drawn from a random rank-r affine subspace of R^d.
Eigen::MatrixXd low_rank(Rng& rng, Eigen::Index rows, Eigen::Index d, Eigen::Index r) {
  const Eigen::MatrixXd basis = gaussian(rng, r, d);
  const Eigen::RowVectorXd offset = gaussian(rng, 1, d);
  return (gaussian(rng, rows, r) * basis).rowwise() + offset;
}

void fit_in_batches(PcaModel& m, const Eigen::MatrixXd& x, Eigen::Index batches) {
  const Eigen::Index step = x.rows() / batches;
  for (Eigen::Index b = 0; b < batches; ++b) {
    const Eigen::Index rows = b + 1 == batches ? x.rows() - b * step : step;
    m.fit_partial(x.middleRows(b * step, rows));
  }
}

double orthonormality_error(const Eigen::MatrixXd& c) {
  return (c * c.transpose() - Eigen::MatrixXd::Identity(c.rows(), c.rows())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("components are orthonormal after every fit_partial") {
  Rng rng(1);
  PcaModel m(128, 64, 16);
  for (int b = 0; b < 6; ++b) {
    m.fit_partial(gaussian(rng, 70 + 13 * b, 128));
    REQUIRE(m.is_fitted());
    CHECK(m.components().rows() == 64);
    CHECK(orthonormality_error(m.components()) < 1e-6);
  }
}

TEST_CASE("full-rank tracking matches the batch eigendecomposition") {
  Rng rng(2);
  const Eigen::MatrixXd x = gaussian(rng, 500, 128);
  PcaModel m(128, 64, 64);
  fit_in_batches(m, x, 5);
  CHECK(oracle::projector_distance(m.components(), oracle::batch_pca_axes(x, 64)) <= 0.1);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  CHECK((m.mean().transpose() - mean).norm() < 1e-10);
  CHECK(m.n_samples_seen() == 500);
}

TEST_CASE("gapped spectrum is recovered without oversampling") {
  Rng rng(3);
  // 64 strong directions (scales 3 -> 1) over a 0.1 noise floor.
  Eigen::MatrixXd x = gaussian(rng, 500, 128) * 0.1;
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rng, 128, 128)).householderQ();
  const Eigen::MatrixXd z = gaussian(rng, 500, 64);
  for (Eigen::Index k = 0; k < 64; ++k) x += (3.0 - 2.0 * static_cast<double>(k) / 63.0) * z.col(k) * q.col(k).transpose();
  PcaModel m(128, 64, 0);
  fit_in_batches(m, x, 5);
  CHECK(oracle::projector_distance(m.components(), oracle::batch_pca_axes(x, 64)) <= 0.1);
}

TEST_CASE("rank <= 64 data has negligible residual once fitted") {
  Rng rng(4);
  const Eigen::MatrixXd x = low_rank(rng, 600, 256, 40);
  PcaModel m(256, 64, 8);
  fit_in_batches(m, x, 6);
  CHECK(m.last_batch_residual() <= 1e-6);
  CHECK(m.relative_residual(low_rank(rng, 1, 256, 40)) > 0.0);  // other subspace
  CHECK(m.relative_residual(x.topRows(50)) <= 1e-6);
}

TEST_CASE("reconstruction error on a fixed subspace never increases") {
  Rng rng(5);
  const Eigen::MatrixXd all = low_rank(rng, 1200, 128, 64);
  const Eigen::MatrixXd probe = all.bottomRows(200);
  for (std::size_t oversample : {std::size_t{0}, std::size_t{32}}) {
    PcaModel m(128, 64, oversample);
    double prev = std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < 10; ++b) {
      m.fit_partial(all.middleRows(b * 100, 100));
      const double r = m.relative_residual(probe);
      CHECK(r <= prev + 1e-9);
      prev = r;
    }
  }
}

TEST_CASE("small batches are buffered until enough rows arrive") {
  Rng rng(6);
  PcaModel m(64, 10, 0);
  m.fit_partial(gaussian(rng, 4, 64));
  CHECK_FALSE(m.is_fitted());
  CHECK(m.buffered_rows() == 4);
  std::vector<double> v(64, 0.0);
  CHECK_THROWS_AS(m.transform(v), Error);
  m.fit_partial(gaussian(rng, 7, 64));
  CHECK(m.is_fitted());
  CHECK(m.buffered_rows() == 0);
  CHECK(m.n_samples_seen() == 11);
}

TEST_CASE("transform is centered and linear") {
  Rng rng(7);
  const Eigen::MatrixXd x = gaussian(rng, 300, 96);
  PcaModel m(96, 64, 8);
  fit_in_batches(m, x, 3);
  std::vector<double> mean(m.mean().data(), m.mean().data() + 96);
  CHECK(m.transform(mean).norm() < 1e-12);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd a = gaussian(rng, 96, 1), b = gaussian(rng, 96, 1);
    const double s = rng.uniform(-3, 3);
    const Eigen::VectorXd combo = a + s * b - s * m.mean();
    const auto ta = m.transform({a.data(), 96}), tb = m.transform({b.data(), 96});
    const auto tc = m.transform({combo.data(), 96});
    CHECK((tc - (ta + s * tb)).norm() < 1e-9);
  }
  std::vector<double> wrong(95, 0.0);
  CHECK_THROWS_AS(m.transform(wrong), Error);
}

TEST_CASE("two synthetic clusters project to separated points") {
  ScenarioSpec spec;
  spec.dim = 1024;
  spec.segments = {{std::nullopt, 0.01, 60, 0.5, 0}, {std::nullopt, 0.01, 60, 0.5, 2}};
  const auto s = synth_stream(spec, 8);
  PcaModel m(1024);
  m.fit_partial(semantic_rows(s, 0, s.frames.size()));
  const auto reduced = reduce_stream(m, s);
  CHECK(reduced.dim_semantic == 64);
  double d2 = 0.0;
  for (std::size_t j = 0; j < 64; ++j) {
    const double d = reduced.frames.front().semantic[j] - reduced.frames.back().semantic[j];
    d2 += d * d;
  }
  CHECK(std::sqrt(d2) > 1.0);
  CHECK(reduced.frames.size() == s.frames.size());
  CHECK(reduced.frames[5].aesthetic == s.frames[5].aesthetic);
}

TEST_CASE("dimension mismatch and bad construction") {
  PcaModel m(32, 8, 0);
  Rng rng(9);
  CHECK_THROWS_AS(m.fit_partial(gaussian(rng, 10, 31)), Error);
  CHECK_THROWS_AS(PcaModel(32, 0, 0), Error);
  CHECK_THROWS_AS(PcaModel(8, 16, 0), Error);
}

TEST_CASE("model file roundtrips and refuses pending rows") {
  TempDir dir;
  Rng rng(10);
  PcaModel m(128, 64, 8);
  m.fit_partial(gaussian(rng, 200, 128));
  m.save(dir / "m.pca.json");
  const PcaModel back = PcaModel::load(dir / "m.pca.json");
  CHECK(back.components() == m.components());
  CHECK(back.mean() == m.mean());
  CHECK(back.singular_values() == m.singular_values());
  CHECK(back.n_samples_seen() == m.n_samples_seen());
  CHECK(back.last_batch_residual() == m.last_batch_residual());
  // Continuing to fit from a loaded model matches continuing in memory.
  const Eigen::MatrixXd more = gaussian(rng, 100, 128);
  PcaModel a = m, b = back;
  a.fit_partial(more);
  b.fit_partial(more);
  CHECK(a.components() == b.components());

  PcaModel partial(128, 64, 0);
  partial.fit_partial(gaussian(rng, 10, 128));
  CHECK_THROWS_AS(partial.save(dir / "p.pca.json"), Error);
  autocut::testing::spit(dir / "bad.pca.json", "{\"format\":\"other\"}\n");
  CHECK_THROWS_AS(PcaModel::load(dir / "bad.pca.json"), FormatError);
}

TEST_CASE("reduce_stream requires a 64-component fitted model") {
  Rng rng(11);
  auto s = autocut::testing::random_stream(rng, 5, 1024);
  PcaModel small(1024, 8, 0);
  small.fit_partial(gaussian(rng, 20, 1024));
  CHECK_THROWS_AS(reduce_stream(small, s), Error);
  PcaModel unfitted(1024);
  CHECK_THROWS_AS(reduce_stream(unfitted, s), Error);
}
