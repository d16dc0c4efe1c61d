#pragma once

#include <string>

#include "autocut/segment.hpp"
#include "jsonl.hpp"

namespace autocut::detail {

jsonl::json shot_to_json(const Shot& shot);
Shot shot_from_json(const jsonl::json& j, const std::string& context);

}  // namespace autocut::detail
