#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace autocut {

/// Per-shot editing action. 1-4 include the shot with a duration bucket,
/// 5 skips it.
enum class ActionLabel : std::uint8_t {
  kUnder1s = 1,
  kOneToThree = 2,
  kThreeToNine = 3,
  kOver9s = 4,
  kSkip = 5,
};

inline constexpr std::size_t kNumActions = 5;

constexpr int label_value(ActionLabel a) { return static_cast<int>(a); }
constexpr std::size_t label_index(ActionLabel a) { return static_cast<std::size_t>(a) - 1; }
constexpr ActionLabel label_at(std::size_t index) { return static_cast<ActionLabel>(index + 1); }

/// Throws Error unless 1 <= value <= 5.
ActionLabel label_from_int(std::int64_t value);

/// Upper bound of the kept duration for an included label; +inf for
/// kOver9s. Throws for kSkip.
double bucket_cap(ActionLabel a);

}  // namespace autocut
