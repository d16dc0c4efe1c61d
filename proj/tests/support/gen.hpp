#pragma once

// Hand-rolled generators and small fixtures for property tests.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "autocut/featstore.hpp"
#include "autocut/labels.hpp"
#include "autocut/rng.hpp"
#include "autocut/segment.hpp"

namespace autocut::testing {

class TempDir {
 public:
  explicit TempDir(const std::string& tag = "autocut") {
    static std::uint64_t counter = 0;
    Rng rng(derive_seed(static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)), ++counter));
    path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rng.next() % 1000000007ULL));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

inline std::array<double, 3> random_distribution3(Rng& rng) {
  std::array<double, 3> p{rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0)};
  const double s = p[0] + p[1] + p[2];
  for (auto& x : p) x /= s;
  return p;
}

/// Valid stream with irregular timestamps and arbitrary-magnitude values.
inline FeatureStream random_stream(Rng& rng, std::size_t n_frames, std::size_t dim = kReducedSemanticDim) {
  FeatureStream s;
  s.source_id = "clip_" + std::to_string(rng.next() % 10000) + ".mp4";
  s.fps_sampled = rng.uniform(0.5, 30.0);
  s.dim_semantic = dim;
  double ts = rng.uniform(0.0, 5.0);
  std::size_t idx = rng.uniform_index(3);
  for (std::size_t i = 0; i < n_frames; ++i) {
    FrameFeature f;
    f.frame_index = idx;
    f.timestamp_s = ts;
    f.semantic = random_vector(rng, dim, std::pow(10.0, rng.uniform(-3.0, 3.0)));
    const double a = rng.uniform();
    f.aesthetic = {a, 1.0 - a};
    f.shot_size = random_distribution3(rng);
    s.frames.push_back(std::move(f));
    idx += 1 + rng.uniform_index(3);
    ts += rng.uniform(0.01, 2.0);
  }
  return s;
}

/// A plausible shot sequence from one source (consecutive, positive durations).
inline std::vector<Shot> random_shots(Rng& rng, std::size_t n, std::size_t dim = kReducedSemanticDim,
                                      const std::string& source = "src.mp4") {
  std::vector<Shot> shots;
  double t = 0.0;
  std::size_t frame = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Shot s;
    s.shot_id = i;
    s.source_id = source;
    const std::size_t frames = 1 + rng.uniform_index(60);
    s.start_frame = frame;
    s.end_frame = frame + frames - 1;
    frame += frames;
    s.start_s = t;
    s.duration_s = rng.uniform(0.1, 20.0);
    t += s.duration_s;
    s.semantic = random_vector(rng, dim);
    s.shot_size_vec = random_distribution3(rng);
    s.shot_size_class = static_cast<int>(rng.uniform_index(3));
    s.aesthetic = rng.uniform();
    shots.push_back(std::move(s));
  }
  return shots;
}

inline ActionLabel random_label(Rng& rng) { return label_at(rng.uniform_index(kNumActions)); }

}  // namespace autocut::testing
