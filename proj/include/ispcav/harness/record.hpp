#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ispcav/errors.hpp"
#include "ispcav/kv.hpp"
#include "ispcav/measure.hpp"

namespace ispcav::harness {

/// One result row. `params` echoes every parameter the command ran with, so
/// (command, params, seed) regenerates the numeric fields bit for bit.
struct ExperimentRecord {
  std::string command;
  KeyValues params;
  std::optional<std::uint64_t> n;
  std::optional<double> beta, h, gamma;
  std::optional<std::uint64_t> pop_size, num_graphs, num_samples;
  std::optional<double> estimate, std_error, c_beta_gamma;
  std::optional<bool> converged, extrapolated;
  std::uint64_t seed = 0;
  std::string version;
  /// Command-specific extras (term values, iteration counts, ids).
  KeyValues diagnostics;
};

inline constexpr std::array<const char*, 15> kCsvColumns = {
    "command",    "n",         "beta",         "h",         "gamma",        "pop_size", "num_graphs", "num_samples",
    "estimate",   "std_error", "C_beta_gamma", "converged", "extrapolated", "seed",     "version"};

inline std::string csv_header() {
  std::string out;
  for (std::size_t k = 0; k < kCsvColumns.size(); ++k) out += (k ? "," : "") + std::string(kCsvColumns[k]);
  return out;
}

namespace detail {
template <typename T>
std::string cell(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_same_v<T, double>) {
    return format_double(*v);
  } else if constexpr (std::is_same_v<T, bool>) {
    return *v ? "true" : "false";
  } else {
    return std::to_string(*v);
  }
}

inline std::vector<std::string> csv_cells(const ExperimentRecord& r) {
  return {r.command,
          cell(r.n),
          cell(r.beta),
          cell(r.h),
          cell(r.gamma),
          cell(r.pop_size),
          cell(r.num_graphs),
          cell(r.num_samples),
          cell(r.estimate),
          cell(r.std_error),
          cell(r.c_beta_gamma),
          cell(r.converged),
          cell(r.extrapolated),
          std::to_string(r.seed),
          r.version};
}
}  // namespace detail

inline std::string csv_row(const ExperimentRecord& r) {
  const auto cells = detail::csv_cells(r);
  std::string out;
  for (std::size_t k = 0; k < cells.size(); ++k) out += (k ? "," : "") + cells[k];
  return out;
}

inline nlohmann::ordered_json to_json(const ExperimentRecord& r) {
  nlohmann::ordered_json j;
  j["command"] = r.command;
  auto put = [&j](const char* key, const auto& v) {
    if (v) {
      j[key] = *v;
    } else {
      j[key] = nullptr;
    }
  };
  put("n", r.n);
  put("beta", r.beta);
  put("h", r.h);
  put("gamma", r.gamma);
  put("pop_size", r.pop_size);
  put("num_graphs", r.num_graphs);
  put("num_samples", r.num_samples);
  put("estimate", r.estimate);
  put("std_error", r.std_error);
  put("C_beta_gamma", r.c_beta_gamma);
  put("converged", r.converged);
  put("extrapolated", r.extrapolated);
  j["seed"] = r.seed;
  j["version"] = r.version;
  j["params"] = r.params;
  j["diagnostics"] = r.diagnostics;
  return j;
}

/// Writes `records.csv` (fixed header, 17 significant digits) and
/// `records.jsonl` into dir. An empty list still produces the header.
inline void emit_report(const std::vector<ExperimentRecord>& records, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const auto csv_path = (std::filesystem::path(dir) / "records.csv").string();
  const auto json_path = (std::filesystem::path(dir) / "records.jsonl").string();
  std::ofstream csv(csv_path), jsonl(json_path);
  if (!csv) throw IoError("cannot open " + csv_path + " for writing");
  if (!jsonl) throw IoError("cannot open " + json_path + " for writing");
  csv << csv_header() << '\n';
  for (const auto& r : records) {
    csv << csv_row(r) << '\n';
    jsonl << to_json(r).dump() << '\n';
  }
  if (!csv || !jsonl) throw IoError("write failed in " + dir);
}

/// Parses a records CSV back into column -> text maps.
inline std::vector<KeyValues> parse_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != csv_header()) throw ParameterError("records CSV: unexpected header");
  std::vector<KeyValues> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    KeyValues row;
    std::size_t start = 0;
    for (std::size_t k = 0; k < kCsvColumns.size(); ++k) {
      const auto comma = line.find(',', start);
      const bool last = k + 1 == kCsvColumns.size();
      if (!last && comma == std::string::npos) throw ParameterError("records CSV: short row");
      row[kCsvColumns[k]] = line.substr(start, last ? std::string::npos : comma - start);
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Rebuilds the CSV-visible fields of a record from a parsed row.
inline ExperimentRecord record_from_row(const KeyValues& row) {
  auto get = [&row](const char* key) -> const std::string& {
    auto it = row.find(key);
    if (it == row.end()) throw ParameterError(std::string("records CSV: missing column ") + key);
    return it->second;
  };
  auto real = [&](const char* key) -> std::optional<double> {
    const auto& s = get(key);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ParameterError(std::string("records CSV: bad number in ") + key);
    }
    return v;
  };
  auto count = [&](const char* key) -> std::optional<std::uint64_t> {
    const auto& s = get(key);
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ParameterError(std::string("records CSV: bad integer in ") + key);
    }
    return v;
  };
  auto flag = [&](const char* key) -> std::optional<bool> {
    const auto& s = get(key);
    if (s.empty()) return std::nullopt;
    if (s != "true" && s != "false") throw ParameterError(std::string("records CSV: bad flag in ") + key);
    return s == "true";
  };
  ExperimentRecord r;
  r.command = get("command");
  r.n = count("n");
  r.beta = real("beta");
  r.h = real("h");
  r.gamma = real("gamma");
  r.pop_size = count("pop_size");
  r.num_graphs = count("num_graphs");
  r.num_samples = count("num_samples");
  r.estimate = real("estimate");
  r.std_error = real("std_error");
  r.c_beta_gamma = real("C_beta_gamma");
  r.converged = flag("converged");
  r.extrapolated = flag("extrapolated");
  r.seed = count("seed").value_or(0);
  r.version = get("version");
  return r;
}

}  // namespace ispcav::harness
