#include "manifest.hpp"

namespace autocut::detail {

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  std::filesystem::path out = output;
  const auto ext = out.extension();
  if (ext == ".jsonl" || ext == ".json") out.replace_extension();
  out += ".manifest.json";
  return out;
}

void write_manifest(const std::filesystem::path& output, const jsonl::json& body) {
  jsonl::write_file_atomic(manifest_path(output), [&](std::ostream& out) { out << body.dump(2) << '\n'; });
}

}  // namespace autocut::detail
