#pragma once

// Internal helpers shared by the JSONL readers. Not installed.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "relgrade/errors.hpp"

namespace relgrade::detail {

// Calls fn(line_number, parsed_object) for every non-blank line.
// Parse failures become ParseError with file:line.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string(), line_no, e.what());
    }
    if (!j.is_object()) throw ParseError(path.string(), line_no, "expected a JSON object");
    fn(line_no, j);
  }
}

inline const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                         const std::string& file, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw ParseError(file, line, std::string("missing key \"") + key + "\"");
  }
  return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* key,
                                  const std::string& file, std::size_t line) {
  const auto& v = require_key(j, key, file, line);
  if (!v.is_string()) {
    throw ParseError(file, line, std::string("key \"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace relgrade::detail
