#include "jsonl.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "autocut/error.hpp"

namespace autocut::jsonl {

namespace {

std::string ctx(std::string_view context, std::string_view detail) {
  std::string out(context);
  out += ": ";
  out += detail;
  return out;
}

}  // namespace

std::vector<Line> parse_lines(std::istream& in, std::string_view what) {
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      lines.push_back({number, json::parse(text)});
    } catch (const json::exception& e) {
      throw FormatError(std::string(what) + ": line " + std::to_string(number) +
                        ": invalid JSON (" + e.what() + ")");
    }
  }
  if (in.bad()) throw Error(std::string(what) + ": read failure");
  return lines;
}

std::vector<Line> read_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw Error(std::string(what) + ": cannot open " + path.string());
  return parse_lines(in, std::string(what) + " " + path.string());
}

std::string dump(const json& value) {
  return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    body(out);
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("write failure on " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

json parse_json_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw Error(std::string(what) + ": cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + " " + path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

const json& field(const json& object, const char* key, std::string_view context) {
  if (!object.is_object()) throw FormatError(ctx(context, "expected a JSON object"));
  auto it = object.find(key);
  if (it == object.end()) throw FormatError(ctx(context, std::string("missing field '") + key + "'"));
  return *it;
}

double number_field(const json& object, const char* key, std::string_view context) {
  const json& v = field(object, key, context);
  if (!v.is_number()) throw FormatError(ctx(context, std::string("field '") + key + "' must be a number"));
  return v.get<double>();
}

std::vector<double> vector_field(const json& object, const char* key, std::string_view context) {
  const json& v = field(object, key, context);
  if (!v.is_array()) throw FormatError(ctx(context, std::string("field '") + key + "' must be an array"));
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) {
    // NaN/Inf serialize as null, so a null entry is a non-finite value.
    if (x.is_null()) throw FormatError(ctx(context, std::string("field '") + key + "' has a non-finite entry"));
    if (!x.is_number()) throw FormatError(ctx(context, std::string("field '") + key + "' must hold numbers"));
    out.push_back(x.get<double>());
  }
  return out;
}

std::string string_field(const json& object, const char* key, std::string_view context) {
  const json& v = field(object, key, context);
  if (!v.is_string()) throw FormatError(ctx(context, std::string("field '") + key + "' must be a string"));
  return v.get<std::string>();
}

std::int64_t integer_field(const json& object, const char* key, std::string_view context) {
  const json& v = field(object, key, context);
  if (!v.is_number_integer()) throw FormatError(ctx(context, std::string("field '") + key + "' must be an integer"));
  return v.get<std::int64_t>();
}

void require_finite(std::span<const double> values, std::string_view context) {
  for (double x : values) {
    if (!std::isfinite(x)) throw FormatError(ctx(context, "non-finite value"));
  }
}

}  // namespace autocut::jsonl
