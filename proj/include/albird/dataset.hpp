#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "albird/matrix.hpp"

namespace albird {

struct InstanceMeta {
  std::size_t index = 0;
  std::string segment_id;
  std::string recording_id;
  int day = 1;         // 1-based recording day
  double start_s = 0;  // offset within the recording

  friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

/// Embedding rows, multi-hot labels and metadata for N instances. Immutable
/// once loaded; a label row may be all zero (no bird present).
struct EmbeddingDataset {
  std::vector<std::string> class_names;
  MatrixF embeddings;  // N x D
  LabelMatrix labels;  // N x C, entries 0/1
  std::vector<InstanceMeta> meta;

  std::size_t num_instances() const noexcept { return embeddings.rows(); }
  std::size_t dim() const noexcept { return embeddings.cols(); }
  std::size_t num_classes() const noexcept { return class_names.size(); }

  /// Throws Error on the first violated invariant.
  void validate() const;

  friend bool operator==(const EmbeddingDataset&, const EmbeddingDataset&) = default;
};

struct SplitSpec {
  std::set<int> pool_days;
  std::set<int> test_days;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct PoolTestSplit {
  std::vector<std::size_t> pool;
  std::vector<std::size_t> test;
};

inline constexpr int kDatasetFormatVersion = 1;

EmbeddingDataset load_dataset(const std::filesystem::path& root);
void write_dataset(const EmbeddingDataset& ds, const std::filesystem::path& root);

PoolTestSplit split_pool_test(const EmbeddingDataset& ds, const SplitSpec& spec);

/// Scales each embedding row to unit L2 norm; zero rows are left unchanged.
void l2_normalize_rows(EmbeddingDataset& ds);

struct SynthConfig {
  std::size_t num_instances = 2000;
  std::size_t dim = 16;
  std::size_t num_classes = 4;
  std::size_t num_clusters = 8;
  double noise = 0.5;
};

/// Gaussian-cluster multi-label dataset. Instance i gets day 1 + (i % 2), so
/// pool_days={1} / test_days={2} is a built-in split.
EmbeddingDataset synth_dataset(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace albird
