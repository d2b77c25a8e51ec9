#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "albird/dataset.hpp"
#include "albird/metrics.hpp"
#include "albird/model.hpp"
#include "albird/strategies.hpp"

namespace albird {

struct ExperimentConfig {
  std::filesystem::path dataset;
  SplitSpec split;
  std::vector<Strategy> strategies = {Strategy::Random, Strategy::Entropy, Strategy::Badge, Strategy::TypiClust};
  std::size_t initial_size = 10;
  std::size_t batch_size = 10;
  std::size_t num_cycles = 50;
  std::size_t repetitions = 10;
  std::uint64_t master_seed = 0;
  TrainConfig train;
  bool normalize = false;

  std::size_t budget() const noexcept { return initial_size + num_cycles * batch_size; }

  /// Checks everything that does not need the dataset.
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct PoolState {
  std::vector<std::size_t> unlabeled;  // sorted dataset indices
  std::vector<std::size_t> labeled;    // sorted dataset indices
  std::size_t cycle = 0;
};

struct AnnotatedInstance {
  std::size_t index;
  std::span<const float> embedding;
  std::span<const std::uint8_t> labels;
};

/// Replays ground-truth labels for a batch of dataset indices drawn from U(t).
std::vector<AnnotatedInstance> simulate_annotation(const EmbeddingDataset& ds, const PoolState& pools,
                                                   std::span<const std::size_t> batch);

struct CurveRow {
  Strategy strategy = Strategy::Random;
  std::size_t repetition = 0;
  std::size_t cycle = 0;
  std::size_t labeled_count = 0;
  MetricRecord metrics;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

using LearningCurve = std::vector<CurveRow>;

enum class SeedPurpose : std::uint64_t { Initial = 1, Train = 2, Query = 3 };

std::uint64_t derive_seed(std::uint64_t master_seed, std::optional<Strategy> strategy, std::size_t repetition,
                          std::size_t cycle, SeedPurpose purpose) noexcept;

using PoolObserver = std::function<void(const PoolState&)>;

/// One (strategy, repetition) AL run on an already split dataset: num_cycles+1
/// rows, evaluated on `split.test` after every retraining.
std::vector<CurveRow> run_single(const EmbeddingDataset& ds, const PoolTestSplit& split, Strategy strategy,
                                 std::size_t repetition, const ExperimentConfig& cfg,
                                 const PoolObserver& observer = {});

/// All strategies x repetitions, ordered by (strategy position in cfg,
/// repetition, cycle). `jobs` > 1 runs independent pairs on worker threads.
LearningCurve run_experiment(const EmbeddingDataset& ds, const ExperimentConfig& cfg, std::size_t jobs = 1,
                             std::vector<double>* run_seconds = nullptr);

enum class Metric { Cmap, Auroc, T1Acc };

inline constexpr std::array<Metric, 3> kAllMetrics = {Metric::Cmap, Metric::Auroc, Metric::T1Acc};

std::string_view metric_name(Metric m) noexcept;
double metric_value(const MetricRecord& r, Metric m) noexcept;

struct ImprovementRow {
  Strategy strategy = Strategy::Random;
  Metric metric = Metric::Cmap;
  std::size_t cycle = 0;
  std::size_t labeled_count = 0;
  double abs_delta = 0.0;
  std::optional<double> rel_percent;  // absent when the baseline mean is 0

  friend bool operator==(const ImprovementRow&, const ImprovementRow&) = default;
};

/// Per-cycle mean differences of every non-baseline strategy against the
/// baseline, averaged over repetitions present for both.
std::vector<ImprovementRow> improvement_curves(const LearningCurve& curve, Strategy baseline);

}  // namespace albird
