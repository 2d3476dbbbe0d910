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

// Labeled datasets: IDX (MNIST container) I/O, subsetting, synthetic data.
//
// IDX layout, all header integers big-endian 32-bit:
//   images: 0x00000803, count, rows, cols, count*rows*cols unsigned bytes
//   labels: 0x00000801, count, count unsigned bytes
// Pixels are mapped to [0, 1] as byte / 255.0.

#ifndef SARAH_DATA_HPP
#define SARAH_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sarah/errors.hpp"
#include "sarah/linalg.hpp"
#include "sarah/rng.hpp"
#include "sarah/sampling.hpp"

namespace sarah {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct Dataset {
  RowMatrix features;       ///< n x d
  std::vector<int> labels;  ///< class indices in [0, num_classes)
  int num_classes = 0;
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws ContractError if the dataset is empty, shapes disagree, a feature
  /// is non-finite, or a label is out of range.
  void validate() const {
    if (labels.empty()) throw ContractError("dataset '" + name + "' is empty");
    if (static_cast<std::size_t>(features.rows()) != labels.size())
      throw ContractError("dataset '" + name + "': feature rows do not match label count");
    if (!features.allFinite()) throw ContractError("dataset '" + name + "': non-finite feature");
    for (int y : labels)
      if (y < 0 || y >= num_classes)
        throw ContractError("dataset '" + name + "': label " + std::to_string(y) + " out of range");
  }
};

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t offset) {
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

inline void write_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                  static_cast<unsigned char>(v >> 16),
                                  static_cast<unsigned char>(v >> 8),
                                  static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

inline std::string hex32(std::uint32_t v) {
  char buf[11];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

inline void expect_length(const std::vector<unsigned char>& buf, std::uint64_t expected,
                          const std::filesystem::path& path) {
  if (buf.size() != expected)
    throw LengthError("'" + path.string() + "': expected " + std::to_string(expected) +
                      " bytes from the header, found " + std::to_string(buf.size()));
}

inline std::uint32_t check_magic(const std::vector<unsigned char>& buf, std::uint32_t expected,
                                 const std::filesystem::path& path) {
  if (buf.size() < 8) throw LengthError("'" + path.string() + "': truncated IDX header");
  const std::uint32_t magic = read_be32(buf, 0);
  if (magic != expected)
    throw FormatError("'" + path.string() + "': bad IDX magic, expected " + hex32(expected) +
                      ", found " + hex32(magic));
  return read_be32(buf, 4);
}

}  // namespace detail

/// Parses an IDX image/label file pair into a dataset with pixels in [0, 1].
inline Dataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
  const auto img = detail::read_file_bytes(images_path);
  const std::uint32_t count = detail::check_magic(img, kIdxImageMagic, images_path);
  if (img.size() < 16) throw LengthError("'" + images_path.string() + "': truncated IDX header");
  const std::uint32_t rows = detail::read_be32(img, 8);
  const std::uint32_t cols = detail::read_be32(img, 12);
  const std::uint64_t pixels = std::uint64_t{rows} * cols;
  detail::expect_length(img, 16 + std::uint64_t{count} * pixels, images_path);

  const auto lab = detail::read_file_bytes(labels_path);
  const std::uint32_t label_count = detail::check_magic(lab, kIdxLabelMagic, labels_path);
  detail::expect_length(lab, 8 + std::uint64_t{label_count}, labels_path);
  if (label_count != count)
    throw ConsistencyError("IDX image count " + std::to_string(count) +
                           " does not match label count " + std::to_string(label_count));
  if (count == 0) throw ConsistencyError("IDX files contain no examples");

  Dataset ds;
  ds.name = images_path.filename().string();
  ds.features.resize(count, static_cast<Eigen::Index>(pixels));
  const unsigned char* p = img.data() + 16;
  for (std::uint32_t i = 0; i < count; ++i)
    for (std::uint64_t k = 0; k < pixels; ++k)
      ds.features(i, static_cast<Eigen::Index>(k)) = static_cast<double>(*p++) / 255.0;
  ds.labels.assign(lab.begin() + 8, lab.end());
  ds.num_classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  return ds;
}

/// Writes a dataset whose features are exact multiples of 1/255 as an IDX pair.
inline void write_idx(const Dataset& ds, std::uint32_t rows, std::uint32_t cols,
                      const std::filesystem::path& images_path,
                      const std::filesystem::path& labels_path) {
  ds.validate();
  if (std::uint64_t{rows} * cols != ds.dim())
    throw ContractError("write_idx: rows*cols does not match the feature dimension");
  std::vector<unsigned char> pixels;
  pixels.reserve(ds.size() * ds.dim());
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i)
    for (Eigen::Index k = 0; k < ds.features.cols(); ++k) {
      const double scaled = std::round(ds.features(i, k) * 255.0);
      if (scaled < 0.0 || scaled > 255.0 || scaled / 255.0 != ds.features(i, k))
        throw ContractError("write_idx: feature is not a byte/255 value");
      pixels.push_back(static_cast<unsigned char>(scaled));
    }
  for (int y : ds.labels)
    if (y > 255) throw ContractError("write_idx: label does not fit in a byte");

  std::ofstream img(images_path, std::ios::binary | std::ios::trunc);
  detail::write_be32(img, kIdxImageMagic);
  detail::write_be32(img, static_cast<std::uint32_t>(ds.size()));
  detail::write_be32(img, rows);
  detail::write_be32(img, cols);
  img.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));

  std::ofstream lab(labels_path, std::ios::binary | std::ios::trunc);
  detail::write_be32(lab, kIdxLabelMagic);
  detail::write_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (int y : ds.labels) lab.put(static_cast<char>(static_cast<unsigned char>(y)));
  if (!img || !lab) throw FormatError("write_idx: write failed");
}

/// k examples drawn uniformly without replacement; original order is kept.
inline Dataset subset(const Dataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > ds.size())
    throw ContractError("subset: k=" + std::to_string(k) + " outside [1, " +
                        std::to_string(ds.size()) + "]");
  RngStream rng(seed, {0, 0, StreamPurpose::kSubset});
  const MiniBatch pick = sample_batch(rng, ds.size(), k);
  Dataset out;
  out.name = ds.name + "[" + std::to_string(k) + "]";
  out.num_classes = ds.num_classes;
  out.features.resize(static_cast<Eigen::Index>(k), ds.features.cols());
  out.labels.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(static_cast<Eigen::Index>(pick[r]));
    out.labels.push_back(ds.labels[pick[r]]);
  }
  return out;
}

inline constexpr double kSyntheticFlipRate = 0.1;

/// Gaussian features; binary labels from a random linear teacher, each flipped
/// with probability 0.1. Class 1 means a positive teacher margin.
inline Dataset make_synthetic(std::size_t n, std::size_t d, std::uint64_t seed,
                              Vector* teacher_out = nullptr) {
  if (n < 1 || d < 1) throw ContractError("make_synthetic: n and d must be positive");
  RngStream feat(seed, {0, 0, StreamPurpose::kSynthetic});
  RngStream teach(seed, {1, 0, StreamPurpose::kSynthetic});
  RngStream flip(seed, {2, 0, StreamPurpose::kSynthetic});

  Vector teacher(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < teacher.size(); ++k) teacher[k] = teach.normal();

  Dataset ds;
  ds.name = "synthetic";
  ds.num_classes = 2;
  ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  ds.labels.resize(n);
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    double margin = 0.0;
    for (Eigen::Index k = 0; k < ds.features.cols(); ++k) {
      ds.features(i, k) = feat.normal();
      margin += ds.features(i, k) * teacher[k];
    }
    int y = margin > 0.0 ? 1 : 0;
    if (flip.uniform01() < kSyntheticFlipRate) y = 1 - y;
    ds.labels[static_cast<std::size_t>(i)] = y;
  }
  if (teacher_out) *teacher_out = teacher;
  return ds;
}

/// Binary class labels mapped to {-1, +1} (class 0 -> -1).
inline Vector signed_labels(const Dataset& ds) {
  if (ds.num_classes != 2) throw ContractError("signed_labels: dataset is not binary");
  Vector y(static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) y[static_cast<Eigen::Index>(i)] = ds.labels[i] == 1 ? 1.0 : -1.0;
  return y;
}

}  // namespace sarah

#endif  // SARAH_DATA_HPP
