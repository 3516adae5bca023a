#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

#include "ispcav/errors.hpp"

namespace ispcav {

/// Flat `key = value` text, one pair per line. Blank lines and lines starting
/// with '#' are skipped; later duplicates are rejected.
using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline KeyValues parse_key_values(std::istream& is) {
  KeyValues out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParameterError("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ParameterError("line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, std::move(value)).second) {
      throw ParameterError("duplicate key '" + key + "' on line " + std::to_string(lineno));
    }
  }
  return out;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return parse_key_values(is);
}

inline void write_key_values(std::ostream& os, const KeyValues& kv) {
  for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
}

}  // namespace ispcav
