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

// Run traces and their CSV encoding.
//
// CSV columns (header row always present):
//   algo,seed,checkpoint,ifo,effective_passes,train_loss,grad_norm_sq,test_error,diverged
// Reals are printed with %.17g; test_error is empty when no test set is
// configured; diverged is 0/1 and repeats the trace flag on every row.
// Wall-clock time is kept in memory only, so equal runs give equal bytes.

#ifndef SARAH_HARNESS_TRACE_HPP
#define SARAH_HARNESS_TRACE_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include "sarah/errors.hpp"

namespace sarah::harness {

inline constexpr const char* kCsvHeader =
    "algo,seed,checkpoint,ifo,effective_passes,train_loss,grad_norm_sq,test_error,diverged";

struct TraceRecord {
  std::size_t checkpoint = 0;
  std::int64_t ifo = 0;
  double effective_passes = 0.0;  ///< ifo / n
  double train_loss = 0.0;
  double grad_norm_sq = 0.0;
  std::optional<double> test_error;
  std::int64_t wall_ms = 0;  ///< informational only
};

struct RunTrace {
  std::string algo;
  std::string cell;
  std::string config_hash;
  std::string output_mode;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  bool diverged = false;
  std::string failure;  ///< divergence message, if any
  std::vector<TraceRecord> records;

  /// First checkpoint whose squared gradient norm is at most epsilon.
  std::optional<std::size_t> first_below(double epsilon) const {
    for (const auto& r : records)
      if (r.grad_norm_sq <= epsilon) return r.checkpoint;
    return std::nullopt;
  }

  /// Record with the given checkpoint index, if present.
  const TraceRecord* at_checkpoint(std::size_t k) const {
    for (const auto& r : records)
      if (r.checkpoint == k) return &r;
    return nullptr;
  }
};

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_rows(const RunTrace& t) {
  std::string out;
  for (const auto& r : t.records) {
    out += t.algo + ',' + std::to_string(t.seed) + ',' + std::to_string(r.checkpoint) + ',' +
           std::to_string(r.ifo) + ',' + format_real(r.effective_passes) + ',' + format_real(r.train_loss) +
           ',' + format_real(r.grad_norm_sq) + ',' + (r.test_error ? format_real(*r.test_error) : "") + ',' +
           (t.diverged ? "1" : "0") + '\n';
  }
  return out;
}

inline std::string to_csv(const RunTrace& t) { return std::string(kCsvHeader) + '\n' + csv_rows(t); }

inline std::string to_csv(const std::vector<RunTrace>& traces) {
  std::string out = std::string(kCsvHeader) + '\n';
  for (const auto& t : traces) out += csv_rows(t);
  return out;
}

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp + "'");
    out << content;
    if (!out) throw ConfigError("write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move '" + tmp + "' into place: " + ec.message());
}

}  // namespace sarah::harness

#endif  // SARAH_HARNESS_TRACE_HPP
