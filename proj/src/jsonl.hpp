#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace autocut::jsonl {

using json = nlohmann::json;

struct Line {
  std::size_t number = 0;  // 1-based line number in the source
  json value;
};

/// Parses every non-blank line as one JSON value. Errors name the line.
std::vector<Line> parse_lines(std::istream& in, std::string_view what);
std::vector<Line> read_file(const std::filesystem::path& path, std::string_view what);

/// Compact single-line dump; doubles use shortest round-trip formatting.
std::string dump(const json& value);

/// Writes through a temporary sibling file and renames it into place, so a
/// failed write never leaves a truncated output behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body);

json parse_json_file(const std::filesystem::path& path, std::string_view what);

/// Field accessors with context-bearing error messages.
const json& field(const json& object, const char* key, std::string_view context);
double number_field(const json& object, const char* key, std::string_view context);
std::vector<double> vector_field(const json& object, const char* key, std::string_view context);
std::string string_field(const json& object, const char* key, std::string_view context);
std::int64_t integer_field(const json& object, const char* key, std::string_view context);

/// Throws FormatError unless every value is finite.
void require_finite(std::span<const double> values, std::string_view context);

}  // namespace autocut::jsonl
