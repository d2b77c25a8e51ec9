#include "albird/loop.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "albird/error.hpp"
#include "albird/rng.hpp"

namespace albird {

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw Error(Errc::InvalidConfig, "strategies must not be empty");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    for (std::size_t j = i + 1; j < strategies.size(); ++j) {
      if (strategies[i] == strategies[j]) {
        throw Error(Errc::InvalidConfig, "strategy '" + std::string(strategy_name(strategies[i])) + "' listed twice");
      }
    }
  }
  if (initial_size < 1) throw Error(Errc::InvalidConfig, "initial_size must be >= 1");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "batch_size must be >= 1");
  if (repetitions < 1) throw Error(Errc::InvalidConfig, "repetitions must be >= 1");
  if (split.pool_days.empty() || split.test_days.empty()) {
    throw Error(Errc::InvalidConfig, "split.pool_days and split.test_days must be non-empty");
  }
  train.validate();
}

std::vector<AnnotatedInstance> simulate_annotation(const EmbeddingDataset& ds, const PoolState& pools,
                                                   std::span<const std::size_t> batch) {
  std::vector<AnnotatedInstance> out;
  out.reserve(batch.size());
  for (auto idx : batch) {
    if (!std::binary_search(pools.unlabeled.begin(), pools.unlabeled.end(), idx)) {
      throw Error(Errc::IndexNotInPool, "instance " + std::to_string(idx) + " is not in the unlabeled pool");
    }
    out.push_back({idx, ds.embeddings.row(idx), ds.labels.row(idx)});
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::optional<Strategy> strategy, std::size_t repetition,
                          std::size_t cycle, SeedPurpose purpose) noexcept {
  const std::uint64_t strategy_part = strategy ? hash_name(strategy_name(*strategy)) : 0;
  return mix_seed({master_seed, strategy_part, repetition, cycle, static_cast<std::uint64_t>(purpose)});
}

namespace {

LabelMatrix gather_labels(const EmbeddingDataset& ds, std::span<const std::size_t> rows) {
  LabelMatrix out(rows.size(), ds.num_classes());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(ds.labels.row(rows[i]).begin(), ds.num_classes(), out.row(i).begin());
  }
  return out;
}

}  // namespace

std::vector<CurveRow> run_single(const EmbeddingDataset& ds, const PoolTestSplit& split, Strategy strategy,
                                 std::size_t repetition, const ExperimentConfig& cfg, const PoolObserver& observer) {
  cfg.validate();
  if (cfg.budget() > split.pool.size()) {
    throw Error(Errc::PoolExhausted, "budget " + std::to_string(cfg.budget()) + " exceeds pool of " +
                                         std::to_string(split.pool.size()));
  }

  PoolState pools;
  {
    // L(0) depends only on the repetition, so every strategy starts alike.
    Rng rng(derive_seed(cfg.master_seed, std::nullopt, repetition, 0, SeedPurpose::Initial));
    std::vector<std::size_t> pool = split.pool;
    for (std::size_t i = 0; i < cfg.initial_size; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pools.labeled.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.initial_size));
    pools.unlabeled.assign(pool.begin() + static_cast<std::ptrdiff_t>(cfg.initial_size), pool.end());
    std::sort(pools.labeled.begin(), pools.labeled.end());
    std::sort(pools.unlabeled.begin(), pools.unlabeled.end());
  }

  const RowsView test_rows(ds.embeddings, split.test);
  const LabelMatrix test_labels = gather_labels(ds, split.test);

  std::vector<CurveRow> rows;
  rows.reserve(cfg.num_cycles + 1);
  for (std::size_t t = 0;; ++t) {
    pools.cycle = t;
    if (observer) observer(pools);
    const auto head =
        train_head(ds, pools.labeled, cfg.train, derive_seed(cfg.master_seed, std::nullopt, repetition, t, SeedPurpose::Train));
    rows.push_back({strategy, repetition, t, pools.labeled.size(), evaluate(predict_probs(head, test_rows), test_labels)});
    if (t == cfg.num_cycles) break;

    const RowsView pool_rows(ds.embeddings, pools.unlabeled);
    const RowsView labeled_rows(ds.embeddings, pools.labeled);
    const MatrixD pool_probs = predict_probs(head, pool_rows);
    Rng rng(derive_seed(cfg.master_seed, strategy, repetition, t, SeedPurpose::Query));
    QueryContext ctx{pool_rows, pool_probs, labeled_rows, cfg.batch_size, rng};
    const auto picked = query(strategy, ctx);

    std::vector<std::size_t> batch(picked.size());
    for (std::size_t i = 0; i < picked.size(); ++i) batch[i] = pools.unlabeled.at(picked[i]);
    const auto annotated = simulate_annotation(ds, pools, batch);

    // U(t+1) = U(t) \ B(t), L(t+1) = L(t) + B*(t)
    std::vector<std::size_t> added;
    for (const auto& a : annotated) added.push_back(a.index);
    std::sort(added.begin(), added.end());
    if (std::adjacent_find(added.begin(), added.end()) != added.end()) {
      throw Error(Errc::IndexNotInPool, "strategy returned a duplicate index");
    }
    std::vector<std::size_t> remaining;
    remaining.reserve(pools.unlabeled.size() - added.size());
    std::set_difference(pools.unlabeled.begin(), pools.unlabeled.end(), added.begin(), added.end(),
                        std::back_inserter(remaining));
    std::vector<std::size_t> labeled;
    labeled.reserve(pools.labeled.size() + added.size());
    std::merge(pools.labeled.begin(), pools.labeled.end(), added.begin(), added.end(), std::back_inserter(labeled));
    pools.unlabeled = std::move(remaining);
    pools.labeled = std::move(labeled);
  }
  return rows;
}

LearningCurve run_experiment(const EmbeddingDataset& dataset, const ExperimentConfig& cfg, std::size_t jobs,
                             std::vector<double>* run_seconds) {
  cfg.validate();
  EmbeddingDataset normalized;
  const EmbeddingDataset* ds = &dataset;
  if (cfg.normalize) {
    normalized = dataset;
    l2_normalize_rows(normalized);
    ds = &normalized;
  }
  const auto split = split_pool_test(*ds, cfg.split);
  if (cfg.budget() > split.pool.size()) {
    throw Error(Errc::PoolExhausted, "budget " + std::to_string(cfg.budget()) + " exceeds pool of " +
                                         std::to_string(split.pool.size()));
  }

  const std::size_t tasks = cfg.strategies.size() * cfg.repetitions;
  std::vector<std::vector<CurveRow>> results(tasks);
  std::vector<double> seconds(tasks, 0.0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < tasks;) {
      const auto strategy = cfg.strategies[task / cfg.repetitions];
      const auto rep = task % cfg.repetitions;
      try {
        const auto start = std::chrono::steady_clock::now();
        results[task] = run_single(*ds, split, strategy, rep, cfg);
        seconds[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, tasks);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  LearningCurve curve;
  curve.reserve(tasks * (cfg.num_cycles + 1));
  for (auto& r : results) curve.insert(curve.end(), r.begin(), r.end());
  if (run_seconds) *run_seconds = std::move(seconds);
  return curve;
}

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::Cmap: return "cmap";
    case Metric::Auroc: return "auroc";
    case Metric::T1Acc: return "t1acc";
  }
  return "unknown";
}

double metric_value(const MetricRecord& r, Metric m) noexcept {
  switch (m) {
    case Metric::Cmap: return r.cmap;
    case Metric::Auroc: return r.auroc;
    case Metric::T1Acc: return r.t1acc;
  }
  return 0.0;
}

std::vector<ImprovementRow> improvement_curves(const LearningCurve& curve, Strategy baseline) {
  std::vector<Strategy> order;
  // (strategy, cycle) -> repetition -> row
  std::map<std::pair<Strategy, std::size_t>, std::map<std::size_t, const CurveRow*>> cells;
  for (const auto& row : curve) {
    if (std::find(order.begin(), order.end(), row.strategy) == order.end()) order.push_back(row.strategy);
    cells[{row.strategy, row.cycle}][row.repetition] = &row;
  }
  if (std::find(order.begin(), order.end(), baseline) == order.end()) {
    throw Error(Errc::BaselineMissing, "baseline '" + std::string(strategy_name(baseline)) + "' not in curves");
  }

  std::vector<std::size_t> cycles;
  for (const auto& [key, reps] : cells) {
    if (key.first == baseline) cycles.push_back(key.second);
  }

  std::vector<ImprovementRow> out;
  for (auto s : order) {
    if (s == baseline) continue;
    for (auto metric : kAllMetrics) {
      for (auto t : cycles) {
        const auto& base = cells.at({baseline, t});
        const auto it = cells.find({s, t});
        if (it == cells.end()) continue;
        double sum_s = 0.0, sum_b = 0.0;
        std::size_t n = 0;
        for (const auto& [rep, row] : it->second) {
          const auto b = base.find(rep);
          if (b == base.end()) continue;
          sum_s += metric_value(row->metrics, metric);
          sum_b += metric_value(b->second->metrics, metric);
          ++n;
        }
        if (n == 0) continue;
        const double mean_s = sum_s / static_cast<double>(n);
        const double mean_b = sum_b / static_cast<double>(n);
        ImprovementRow r;
        r.strategy = s;
        r.metric = metric;
        r.cycle = t;
        r.labeled_count = base.begin()->second->labeled_count;
        r.abs_delta = mean_s - mean_b;
        if (mean_b != 0.0) r.rel_percent = 100.0 * r.abs_delta / mean_b;
        out.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace albird
