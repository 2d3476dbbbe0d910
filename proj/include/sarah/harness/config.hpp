// Copyright 2026 The sarahnc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration files.
//
// Flat "key = value" lines; '#' starts a comment. Keys before the first
// "[name]" header are defaults for every cell; each section is one run cell
// and may override any default. A file without sections is a single cell.
// Values may be comma-separated lists for grid keys (grid command only) and
// for `seeds`.

#ifndef SARAH_HARNESS_CONFIG_HPP
#define SARAH_HARNESS_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sarah/errors.hpp"

namespace sarah::harness {

/// Every key the harness understands.
inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      // optimizer
      "algo", "eta", "m", "b", "s", "steps", "gamma", "beta", "delta", "seed", "seeds", "output_mode",
      "divergence_limit",
      // run control
      "passes", "checkpoint_every", "epsilon", "grid_budget", "workers",
      // problem
      "problem", "n", "d", "quad_min", "quad_max", "curvature_spread", "linear_spread", "problem_seed",
      "init", "init_scale", "data", "data_seed", "data_dir", "lambda", "hidden", "activation",
      "train_images", "train_labels", "test_images", "test_labels", "train_subset", "test_subset",
      "subset_seed"};
  return keys;
}

/// Keys whose value may be a comma-separated list in a grid search.
inline const std::set<std::string>& grid_keys() {
  static const std::set<std::string> keys = {"eta", "m", "b", "s", "gamma", "beta", "delta"};
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using KeyValues = std::map<std::string, std::string>;

struct ConfigSection {
  std::string name;
  KeyValues values;
};

struct ConfigDocument {
  KeyValues defaults;
  std::vector<ConfigSection> sections;
};

/// Parses configuration text. Unknown or repeated keys raise ConfigError naming the key.
inline ConfigDocument parse_config(const std::string& text) {
  ConfigDocument doc;
  KeyValues* current = &doc.defaults;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
      for (const auto& s : doc.sections)
        if (s.name == name) throw ConfigError("duplicate section [" + name + "]");
      doc.sections.push_back({name, {}});
      current = &doc.sections.back().values;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'", key);
    if (value.empty()) throw ConfigError("empty value for key '" + key + "'", key);
    if (current->contains(key)) throw ConfigError("key '" + key + "' given twice", key);
    (*current)[key] = value;
  }
  return doc;
}

inline ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// A cell's merged key set (section values over defaults).
class CellConfig {
 public:
  CellConfig(std::string name, KeyValues values) : name_(std::move(name)), values_(std::move(values)) {}

  const std::string& name() const { return name_; }
  const KeyValues& values() const { return values_; }
  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_uint(key, it->second);
  }

  /// Size that may be written relative to n: "500", "0.1n", "n".
  std::size_t get_size(const std::string& key, std::size_t fallback, std::size_t n) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return resolve_size(key, it->second, n);
  }

  static std::size_t resolve_size(const std::string& key, const std::string& raw, std::size_t n) {
    if (!raw.empty() && raw.back() == 'n') {
      const std::string coef = trim(raw.substr(0, raw.size() - 1));
      const double c = coef.empty() ? 1.0 : to_double(key, coef);
      const double v = std::round(c * static_cast<double>(n));
      if (!(v >= 1.0)) throw ConfigError("key '" + key + "' resolves to less than 1", key);
      return static_cast<std::size_t>(v);
    }
    return static_cast<std::size_t>(to_uint(key, raw));
  }

  static double to_double(const std::string& key, const std::string& raw) {
    if (raw == "inf") return HUGE_VAL;
    double v = 0.0;
    const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
      throw ConfigError("key '" + key + "': '" + raw + "' is not a number", key);
    return v;
  }

  static std::uint64_t to_uint(const std::string& key, const std::string& raw) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (res.ec != std::errc() || res.ptr != raw.data() + raw.size())
      throw ConfigError("key '" + key + "': '" + raw + "' is not a nonnegative integer", key);
    return v;
  }

  /// FNV-1a over the canonical "key=value\n" listing, excluding seeds and run plumbing.
  std::string hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values_) {
      if (k == "seed" || k == "seeds" || k == "workers") continue;
      for (char ch : k + "=" + v + "\n") {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
      }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  std::string name_;
  KeyValues values_;
};

/// One CellConfig per section (or a single cell named after its algorithm).
inline std::vector<CellConfig> resolve_cells(const ConfigDocument& doc) {
  std::vector<CellConfig> cells;
  if (doc.sections.empty()) {
    const auto it = doc.defaults.find("algo");
    cells.emplace_back(it == doc.defaults.end() ? "sarah" : it->second, doc.defaults);
    return cells;
  }
  for (const auto& sec : doc.sections) {
    KeyValues merged = doc.defaults;
    for (const auto& [k, v] : sec.values) merged[k] = v;
    cells.emplace_back(sec.name, std::move(merged));
  }
  return cells;
}

/// Seeds of a cell: `seeds = a, b, ...` or `seed = a` (default 1). Both at once is an error.
inline std::vector<std::uint64_t> cell_seeds(const CellConfig& cell) {
  if (cell.has("seed") && cell.has("seeds"))
    throw ConfigError("cell [" + cell.name() + "] sets both 'seed' and 'seeds'", "seeds");
  if (cell.has("seeds")) {
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(cell.get_string("seeds", ""))) out.push_back(CellConfig::to_uint("seeds", item));
    if (out.empty()) throw ConfigError("empty seed list", "seeds");
    return out;
  }
  return {cell.get_uint("seed", 1)};
}

}  // namespace sarah::harness

#endif  // SARAH_HARNESS_CONFIG_HPP
