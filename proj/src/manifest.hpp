#pragma once

#include <filesystem>

#include "jsonl.hpp"

namespace autocut::detail {

/// `x.kind.jsonl` / `x.kind.json` -> `x.kind.manifest.json`.
std::filesystem::path manifest_path(const std::filesystem::path& output);

void write_manifest(const std::filesystem::path& output, const jsonl::json& body);

}  // namespace autocut::detail
