#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

namespace autocut {

/// Every stage hyperparameter; resolved as flag > config file > defaults
/// (the seed additionally falls back to AUTOCUT_SEED before its default).
struct RunConfig {
  std::uint64_t seed = 0;
  double threshold_k = 3.0;
  double target_seconds = 120.0;
  std::size_t variants = 40;
  double aesthetic_threshold = 0.1;
  double max_foreign_fraction = 0.3;
  bool keep_originals = true;
  std::size_t iterations = 32;
  std::size_t epochs = 1;
  double lr = 0.05;
  double holdout_frac = 0.1;
  bool extra_features = false;
  std::size_t scale = 3;
  std::size_t pca_components = 64;
  std::size_t pca_oversample = 64;
  std::size_t pca_batch = 4096;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `autocut` tool. args[0] is the program name. Errors
/// are reported on `err` as one JSON line.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace autocut
