#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ispcav/errors.hpp"
#include "ispcav/kv.hpp"

namespace ispcav::harness {

inline constexpr const char* kVersion = "ispcav 0.1.0";

/// A violated config constraint, naming the offending key.
class ConfigError : public ParameterError {
public:
  ConfigError(std::string key, const std::string& what) : ParameterError(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

struct ExperimentConfig {
  std::string command;
  KeyValues values;  // every known key, defaults applied
  std::uint64_t seed = 0;
  std::string out_dir;

  bool has(const std::string& key) const { return values.count(key) && !values.at(key).empty(); }
  const std::string& raw(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end() || it->second.empty()) throw ConfigError(key, "required");
    return it->second;
  }

  double real(const std::string& key) const {
    const auto& s = raw(key);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
      throw ConfigError(key, "expected a finite number, got '" + s + "'");
    }
    return v;
  }

  std::uint64_t count(const std::string& key) const {
    const auto& s = raw(key);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
    }
    return v;
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    const auto& s = raw(key);
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto comma = s.find(',', start);
      const auto end = comma == std::string::npos ? s.size() : comma;
      std::string item = trim(std::string_view(s).substr(start, end - start));
      if (item.empty()) throw ConfigError(key, "empty list entry");
      out.push_back(std::move(item));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) {
      double v = 0.0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc{} || res.ptr != item.data() + item.size() || !std::isfinite(v)) {
        throw ConfigError(key, "expected a list of numbers, got '" + item + "'");
      }
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::uint64_t> counts(const std::string& key) const {
    std::vector<std::uint64_t> out;
    for (const auto& item : list(key)) {
      std::uint64_t v = 0;
      const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
      if (res.ec != std::errc{} || res.ptr != item.data() + item.size()) {
        throw ConfigError(key, "expected a list of non-negative integers, got '" + item + "'");
      }
      out.push_back(v);
    }
    return out;
  }
};

/// Allowed keys per subcommand with their defaults ("" = no default).
inline const std::map<std::string, KeyValues>& command_schemas() {
  static const std::map<std::string, KeyValues> schemas = [] {
    const KeyValues fixpoint{{"pop_size", "100000"}, {"tol", "0.002"}, {"max_iter", "200"}};
    const KeyValues structure{{"m", ""},          {"truncation", ""},   {"num_outer", "10000"},
                              {"directing", "rs"}, {"tree_weights", ""}, {"tree_leaves", ""}};
    auto merge = [](KeyValues a, const KeyValues& b) {
      a.insert(b.begin(), b.end());
      return a;
    };
    std::map<std::string, KeyValues> s;
    s["gen-graph"] = {{"n", ""}, {"gamma", ""}};
    s["exact"] = {{"graph", ""}, {"n", ""}, {"gamma", ""}, {"beta", ""}, {"h", ""}, {"num_graphs", "100"}};
    s["mis"] = {{"graph", ""}, {"n", ""}, {"gamma", ""}, {"num_graphs", "100"}};
    s["cavity-check"] = {{"graph", ""}, {"n", ""}, {"gamma", ""}, {"beta", ""}, {"h", ""}, {"vertex", ""}};
    s["fixpoint"] = merge({{"beta", ""}, {"h", ""}, {"gamma", ""}, {"init", "grid"}}, fixpoint);
    s["rs-free-energy"] =
        merge({{"beta", ""}, {"h", ""}, {"gamma", ""}, {"num_samples", "100000"}, {"population", ""}}, fixpoint);
    s["contraction-check"] = {{"beta", ""}, {"h", "0"}, {"gamma", ""}, {"num_pairs", "100"}, {"pop_size", "10000"}};
    s["isp-curve"] = merge({{"gamma", ""}, {"betas", ""}, {"hs", ""}, {"num_samples", "100000"}}, fixpoint);
    s["mp-eval"] = merge(merge({{"beta", ""}, {"h", ""}, {"gamma", ""}}, structure), fixpoint);
    s["residual"] = merge(merge({{"n", ""}, {"beta", ""}, {"h", ""}, {"gamma", ""}, {"num_graphs", "400"}}, structure),
                          fixpoint);
    s["sweep"] = merge({{"kind", "rs-vs-exact"},
                        {"ns", ""},
                        {"beta", ""},
                        {"h", ""},
                        {"gamma", ""},
                        {"num_graphs", "400"},
                        {"num_samples", "100000"}},
                       fixpoint);
    for (auto& [name, keys] : s) keys.emplace("workers", "0");
    return s;
  }();
  return schemas;
}

namespace detail {

inline void require_positive(const ExperimentConfig& c, const std::string& key) {
  if (c.has(key) && c.count(key) == 0) throw ConfigError(key, "must be positive");
}

inline void require_nonnegative(const ExperimentConfig& c, const std::string& key) {
  if (c.has(key) && c.real(key) < 0.0) throw ConfigError(key, "must be >= 0");
}

inline void require_finite(const ExperimentConfig& c, const std::string& key) {
  if (c.has(key)) (void)c.real(key);
}

inline void validate(const ExperimentConfig& c) {
  const auto& cmd = c.command;
  auto needs = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) (void)c.raw(k);
  };

  for (const char* key : {"beta", "gamma", "tol"}) require_nonnegative(c, key);
  require_finite(c, "h");
  for (const char* key : {"n", "pop_size", "max_iter", "num_graphs", "num_samples", "num_outer", "num_pairs"}) {
    require_positive(c, key);
  }
  if (c.has("workers")) (void)c.count("workers");
  if (c.has("tol") && !(c.real("tol") > 0.0)) throw ConfigError("tol", "must be positive");

  const bool graph_command = cmd == "exact" || cmd == "mis" || cmd == "cavity-check";
  if (cmd == "gen-graph" || (graph_command && !c.has("graph"))) needs({"n", "gamma"});
  if (cmd == "residual") needs({"n"});
  if (c.has("n") && c.has("gamma") && c.real("gamma") > static_cast<double>(c.count("n"))) {
    throw ConfigError("gamma", "exceeds n (edge probability gamma/n > 1)");
  }
  if (cmd == "exact" || cmd == "cavity-check" || cmd == "fixpoint" || cmd == "rs-free-energy" || cmd == "mp-eval" ||
      cmd == "residual" || cmd == "sweep") {
    needs({"beta", "h"});
  }
  if (cmd == "fixpoint" || cmd == "rs-free-energy" || cmd == "mp-eval" || cmd == "residual" || cmd == "sweep" ||
      cmd == "contraction-check" || cmd == "isp-curve") {
    needs({"gamma"});
  }
  if (cmd == "contraction-check") needs({"beta"});
  if (cmd == "fixpoint") {
    const auto& init = c.raw("init");
    if (init != "grid" && init != "zero" && init != "one") throw ConfigError("init", "expected grid, zero or one");
  }
  if (cmd == "isp-curve") {
    for (const char* key : {"betas", "hs"}) {
      const auto v = c.reals(key);
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k > 0 && !(v[k] > v[k - 1])) throw ConfigError(key, "must be strictly increasing");
      }
    }
    for (double b : c.reals("betas")) {
      if (b < 0.0) throw ConfigError("betas", "entries must be >= 0");
    }
    if (!(c.reals("hs").front() > 0.0)) throw ConfigError("hs", "entries must be positive");
  }
  if (cmd == "mp-eval" || cmd == "residual") {
    const auto m = c.reals("m");
    for (std::size_t l = 0; l < m.size(); ++l) {
      if (!(m[l] > 0.0 && m[l] < 1.0)) throw ConfigError("m", "entries must lie in (0, 1)");
      if (l > 0 && !(m[l] > m[l - 1])) throw ConfigError("m", "must be strictly increasing");
    }
    if (c.has("truncation") && c.count("truncation") < 2) throw ConfigError("truncation", "must be >= 2");
    const auto& directing = c.raw("directing");
    if (directing == "tree") {
      if (m.size() != 1) throw ConfigError("directing", "tree structures from config support K = 1 only");
      const auto w = c.reals("tree_weights");
      const auto leaves = c.list("tree_leaves");
      if (w.size() != leaves.size()) throw ConfigError("tree_leaves", "need one leaf per entry of tree_weights");
    } else if (directing != "rs" && directing.rfind("point:", 0) != 0 && directing.rfind("file:", 0) != 0) {
      throw ConfigError("directing", "expected rs, point:<x>, file:<path> or tree");
    }
  }
  if (cmd == "sweep") {
    if (c.raw("kind") != "rs-vs-exact") throw ConfigError("kind", "only rs-vs-exact is supported");
    const auto ns = c.counts("ns");
    for (auto n : ns) {
      if (n == 0) throw ConfigError("ns", "entries must be positive");
      if (c.real("gamma") > static_cast<double>(n)) throw ConfigError("gamma", "exceeds n = " + std::to_string(n));
    }
  }
}

}  // namespace detail

/// Builds a validated config. File keys are read first; inline keys
/// override them. Unknown keys and a missing seed are errors.
inline ExperimentConfig make_config(const std::string& command, const KeyValues& file_values,
                                    const KeyValues& inline_values, std::optional<std::uint64_t> seed,
                                    std::string out_dir = {}) {
  const auto& schemas = command_schemas();
  auto schema = schemas.find(command);
  if (schema == schemas.end()) throw ConfigError("command", "unknown subcommand '" + command + "'");
  if (!seed) throw ConfigError("seed", "a seed is required");

  ExperimentConfig cfg;
  cfg.command = command;
  cfg.seed = *seed;
  cfg.out_dir = std::move(out_dir);
  cfg.values = schema->second;
  for (const auto* source : {&file_values, &inline_values}) {
    for (const auto& [key, value] : *source) {
      if (!cfg.values.count(key)) throw ConfigError(key, "unknown key for '" + command + "'");
      cfg.values[key] = value;
    }
  }
  detail::validate(cfg);
  return cfg;
}

inline std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("seed", "expected a non-negative 64-bit integer, got '" + text + "'");
  }
  return v;
}

/// `ispcav <subcommand> [--config PATH] [--key value ...] --seed S --out DIR`
/// (argv without the program name). Dashes in keys map to underscores.
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  if (args.empty()) throw ConfigError("command", "missing subcommand");
  const std::string command = args.front();
  KeyValues file_values, inline_values;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  for (std::size_t k = 1; k < args.size(); ++k) {
    const auto& flag = args[k];
    if (flag.rfind("--", 0) != 0 || flag.size() == 2) throw ConfigError(flag, "expected --key value");
    if (k + 1 >= args.size()) throw ConfigError(flag.substr(2), "missing value");
    const std::string& value = args[++k];
    std::string key = flag.substr(2);
    for (auto& ch : key) ch = ch == '-' ? '_' : ch;
    if (key == "config") {
      file_values = load_key_values(value);
    } else if (key == "seed") {
      seed = parse_seed(value);
    } else if (key == "out") {
      out_dir = value;
    } else if (!inline_values.emplace(key, value).second) {
      throw ConfigError(key, "given twice");
    }
  }
  if (auto it = file_values.find("seed"); it != file_values.end()) {
    if (!seed) seed = parse_seed(it->second);
    file_values.erase(it);
  }
  return make_config(command, file_values, inline_values, seed, out_dir);
}

}  // namespace ispcav::harness
