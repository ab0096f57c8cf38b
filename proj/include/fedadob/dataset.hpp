//
// Copyright 2026 The fedadob Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FEDADOB_DATASET_HPP
#define FEDADOB_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "fedadob/errors.hpp"
#include "fedadob/rng.hpp"
#include "fedadob/tensor.hpp"

namespace fedadob {

// A labeled dataset plus its split tags. Split tags are index lists into the
// sample axis; the auxiliary set (used by model-completion attackers) must be
// a subset of the training set.
struct Dataset {
  Tensor features;  // [n x d] or [n x h x w]
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  std::vector<std::size_t> aux_idx;

  std::size_t size() const { return labels.size(); }

  std::size_t sample_size() const {
    return features.size() / features.extent(0);
  }

  void validate() const {
    if (features.ndim() < 2 || features.extent(0) != labels.size()) {
      throw DimensionError("dataset features/labels mismatch");
    }
    for (int l : labels) {
      if (l < 0 || static_cast<std::size_t>(l) >= num_classes) {
        throw ArgumentError("label outside [0, num_classes)");
      }
    }
    for (std::size_t i : aux_idx) {
      if (std::find(train_idx.begin(), train_idx.end(), i) == train_idx.end()) {
        throw ArgumentError("auxiliary index not contained in the training split");
      }
    }
  }

  Tensor gather_features(const std::vector<std::size_t>& idx) const {
    const std::size_t d = sample_size();
    Shape out_shape = features.shape();
    out_shape[0] = idx.size();
    Tensor out(out_shape);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (idx[r] >= size()) throw ArgumentError("sample index out of range");
      for (std::size_t k = 0; k < d; ++k) out[r * d + k] = features[idx[r] * d + k];
    }
    return out;
  }

  std::vector<int> gather_labels(const std::vector<std::size_t>& idx) const {
    std::vector<int> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) out[r] = labels[idx[r]];
    return out;
  }
};

// ---------------------------------------------------------------------------
// IDX (big-endian) readers/writers for MNIST-format files.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, std::size_t offset, const char* path) {
  unsigned char buf[4];
  if (!in.read(reinterpret_cast<char*>(buf), 4)) {
    throw FormatError(std::string(path) + ": truncated at byte " + std::to_string(offset));
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

inline void write_be_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(buf), 4);
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

// Parses the classic IDX pair. Pixels are scaled to [0, 1]; labels must fit
// in [0, 9]. All samples land in the training split; callers re-tag.
inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw FormatError(images_path + ": cannot open");
  std::size_t off = 0;
  const std::uint32_t img_magic = detail::read_be_u32(img, off, images_path.c_str());
  if (img_magic != kIdxImageMagic) {
    throw FormatError(images_path + ": bad image magic at byte 0 (got " +
                      std::to_string(img_magic) + ")");
  }
  const std::uint32_t n = detail::read_be_u32(img, 4, images_path.c_str());
  const std::uint32_t h = detail::read_be_u32(img, 8, images_path.c_str());
  const std::uint32_t w = detail::read_be_u32(img, 12, images_path.c_str());

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw FormatError(labels_path + ": cannot open");
  const std::uint32_t lab_magic = detail::read_be_u32(lab, 0, labels_path.c_str());
  if (lab_magic != kIdxLabelMagic) {
    throw FormatError(labels_path + ": bad label magic at byte 0 (got " +
                      std::to_string(lab_magic) + ")");
  }
  const std::uint32_t n_lab = detail::read_be_u32(lab, 4, labels_path.c_str());
  if (n_lab != n) {
    throw FormatError(labels_path + ": label count " + std::to_string(n_lab) +
                      " does not match image count " + std::to_string(n));
  }

  Dataset ds;
  ds.features = Tensor({n, h, w});
  ds.labels.resize(n);
  ds.num_classes = 10;
  std::vector<unsigned char> row(static_cast<std::size_t>(h) * w);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!img.read(reinterpret_cast<char*>(row.data()), row.size())) {
      throw FormatError(images_path + ": truncated at byte " +
                        std::to_string(16 + std::size_t(i) * row.size()));
    }
    for (std::size_t k = 0; k < row.size(); ++k) {
      ds.features[std::size_t(i) * row.size() + k] = row[k] / 255.0;
    }
    char l;
    if (!lab.read(&l, 1)) {
      throw FormatError(labels_path + ": truncated at byte " + std::to_string(8 + i));
    }
    ds.labels[i] = static_cast<unsigned char>(l);
  }
  ds.train_idx.resize(n);
  std::iota(ds.train_idx.begin(), ds.train_idx.end(), 0);
  ds.validate();
  return ds;
}

// Writes an IDX pair from a [n x h x w] dataset with values in [0, 1].
inline void save_mnist_idx(const Dataset& ds, const std::string& images_path,
                           const std::string& labels_path) {
  if (ds.features.ndim() != 3) throw DimensionError("save_mnist_idx wants [n x h x w]");
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw FormatError("cannot open IDX output files");
  const std::size_t n = ds.size(), h = ds.features.extent(1), w = ds.features.extent(2);
  detail::write_be_u32(img, kIdxImageMagic);
  detail::write_be_u32(img, static_cast<std::uint32_t>(n));
  detail::write_be_u32(img, static_cast<std::uint32_t>(h));
  detail::write_be_u32(img, static_cast<std::uint32_t>(w));
  detail::write_be_u32(lab, kIdxLabelMagic);
  detail::write_be_u32(lab, static_cast<std::uint32_t>(n));
  for (std::size_t i = 0; i < n * h * w; ++i) {
    const double v = std::clamp(ds.features[i], 0.0, 1.0);
    const unsigned char byte = static_cast<unsigned char>(std::lround(v * 255.0));
    img.write(reinterpret_cast<const char*>(&byte), 1);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const char byte = static_cast<char>(ds.labels[i]);
    lab.write(&byte, 1);
  }
}

// ---------------------------------------------------------------------------
// Synthetic datasets (desk-scale substitutes).
// ---------------------------------------------------------------------------

enum class SyntheticKind { GaussianBlobs, LinearlySeparable, BinaryVfl };

inline SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "gaussian_blobs") return SyntheticKind::GaussianBlobs;
  if (s == "linearly_separable") return SyntheticKind::LinearlySeparable;
  if (s == "binary_vfl") return SyntheticKind::BinaryVfl;
  throw ConfigError("unknown synthetic dataset kind: " + s);
}

// Deterministic labeled dataset. Blob centres sit `separation` standard
// deviations apart (in the subspace of the first few coordinates), so a
// linear probe separates them easily at the default.
inline Dataset gen_synthetic(SyntheticKind kind, std::size_t n, std::size_t d,
                             std::uint64_t seed, std::size_t classes = 2,
                             double separation = 10.0) {
  if (n < 1 || d < 1) throw ArgumentError("gen_synthetic wants n, d >= 1");
  Rng rng(derive_seed(seed, 0xda7a));
  Dataset ds;
  switch (kind) {
    case SyntheticKind::BinaryVfl:
      classes = 2;
      [[fallthrough]];
    case SyntheticKind::GaussianBlobs: {
      if (classes < 2) throw ArgumentError("blobs want >= 2 classes");
      ds.num_classes = classes;
      // Unit-norm class centres scaled to the requested separation.
      std::vector<Tensor> centers;
      for (std::size_t c = 0; c < classes; ++c) {
        Tensor dir = rng.normal_tensor({d});
        const double norm = l2_norm(dir);
        centers.push_back(dir * (separation / (norm > 0 ? norm : 1.0)));
      }
      ds.features = Tensor({n, d});
      ds.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % classes);
        ds.labels[i] = label;
        for (std::size_t k = 0; k < d; ++k) {
          ds.features[i * d + k] = centers[label][k] + rng.normal();
        }
      }
      break;
    }
    case SyntheticKind::LinearlySeparable: {
      ds.num_classes = 2;
      Tensor normal_dir = rng.normal_tensor({d});
      const double norm = l2_norm(normal_dir);
      normal_dir *= 1.0 / (norm > 0 ? norm : 1.0);
      ds.features = Tensor({n, d});
      ds.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        Tensor x = rng.normal_tensor({d});
        const double projection = dot(x, normal_dir);
        // Re-project so every point sits a clean margin off the plane.
        const double sign = i % 2 == 0 ? 1.0 : -1.0;
        const double margin = sign * (1.0 + rng.uniform01());
        for (std::size_t k = 0; k < d; ++k) {
          ds.features[i * d + k] = x[k] + (margin - projection) * normal_dir[k];
        }
        ds.labels[i] = sign > 0 ? 1 : 0;
      }
      break;
    }
  }
  ds.train_idx.resize(n);
  std::iota(ds.train_idx.begin(), ds.train_idx.end(), 0);
  ds.validate();
  return ds;
}

// Reshapes flat feature rows into [n x h x w] images (values clipped to
// [0, 1] after an affine squash), for image-shaped desk-scale runs.
inline Dataset as_images(Dataset ds, std::size_t h, std::size_t w) {
  if (ds.sample_size() != h * w) {
    throw DimensionError("as_images: sample size " + std::to_string(ds.sample_size()) +
                         " != " + std::to_string(h * w));
  }
  double lo = ds.features[0], hi = ds.features[0];
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    lo = std::min(lo, ds.features[i]);
    hi = std::max(hi, ds.features[i]);
  }
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < ds.features.size(); ++i) {
    ds.features[i] = (ds.features[i] - lo) / span;
  }
  ds.features = ds.features.reshaped({ds.size(), h, w});
  return ds;
}

// Tags train/test (and optionally auxiliary <= train) splits in order; data
// generators already randomize sample order.
inline void tag_splits(Dataset& ds, std::size_t n_train, std::size_t n_test,
                       std::size_t n_aux = 0) {
  if (n_train + n_test > ds.size()) throw ConfigError("train+test exceeds dataset size");
  if (n_aux > n_train) throw ConfigError("auxiliary split must fit inside train");
  ds.train_idx.clear();
  ds.test_idx.clear();
  ds.aux_idx.clear();
  for (std::size_t i = 0; i < n_train; ++i) ds.train_idx.push_back(i);
  for (std::size_t i = 0; i < n_test; ++i) ds.test_idx.push_back(n_train + i);
  for (std::size_t i = 0; i < n_aux; ++i) ds.aux_idx.push_back(i);
  ds.validate();
}

// ---------------------------------------------------------------------------
// Vertical feature partitioning.
// ---------------------------------------------------------------------------

struct FeatureRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive, over the last feature axis
};

// Shard k receives columns [begin_k, end_k) of the last axis. The ranges
// must exactly partition the axis.
inline std::vector<Tensor> vertical_split(const Tensor& features,
                                          const std::vector<FeatureRange>& ranges) {
  if (features.ndim() < 2) throw DimensionError("vertical_split wants batched features");
  const std::size_t width = features.extent(features.ndim() - 1);
  std::vector<bool> covered(width, false);
  for (const FeatureRange& r : ranges) {
    if (r.end <= r.begin || r.end > width) {
      throw ConfigError("bad feature range [" + std::to_string(r.begin) + ", " +
                        std::to_string(r.end) + ") for width " + std::to_string(width));
    }
    for (std::size_t c = r.begin; c < r.end; ++c) {
      if (covered[c]) throw ConfigError("overlapping feature ranges at column " + std::to_string(c));
      covered[c] = true;
    }
  }
  for (std::size_t c = 0; c < width; ++c) {
    if (!covered[c]) throw ConfigError("feature ranges leave column " + std::to_string(c) + " unassigned");
  }

  const std::size_t rows = features.size() / width;  // product of leading axes
  std::vector<Tensor> shards;
  shards.reserve(ranges.size());
  for (const FeatureRange& r : ranges) {
    Shape shape = features.shape();
    shape.back() = r.end - r.begin;
    Tensor shard(shape);
    for (std::size_t row = 0; row < rows; ++row)
      for (std::size_t c = r.begin; c < r.end; ++c)
        shard[row * (r.end - r.begin) + (c - r.begin)] = features[row * width + c];
    shards.push_back(std::move(shard));
  }
  return shards;
}

struct VerticalShards {
  std::vector<Tensor> features;  // one per passive party
  std::vector<int> labels;       // held by the active party only
};

inline VerticalShards vertical_split(const Dataset& ds, const std::vector<FeatureRange>& ranges) {
  VerticalShards out;
  out.features = vertical_split(ds.features, ranges);
  out.labels = ds.labels;
  return out;
}

// Evenly partitions a width into `parties` contiguous column ranges.
inline std::vector<FeatureRange> even_ranges(std::size_t width, std::size_t parties) {
  if (parties == 0 || parties > width) throw ConfigError("cannot split width among parties");
  std::vector<FeatureRange> out;
  std::size_t start = 0;
  for (std::size_t k = 0; k < parties; ++k) {
    const std::size_t len = width / parties + (k < width % parties ? 1 : 0);
    out.push_back({start, start + len});
    start += len;
  }
  return out;
}

}  // namespace fedadob

#endif  // FEDADOB_DATASET_HPP
