#include <doctest.h>

#include <algorithm>
#include <set>

#include "albird/error.hpp"
#include "albird/loop.hpp"

using namespace albird;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.split = {{1}, {2}};
  cfg.strategies = {Strategy::Random, Strategy::Entropy};
  cfg.initial_size = 5;
  cfg.batch_size = 4;
  cfg.num_cycles = 3;
  cfg.repetitions = 2;
  cfg.master_seed = 17;
  cfg.train.epochs = 15;
  return cfg;
}

const EmbeddingDataset& small_dataset() {
  static const auto ds = synth_dataset({200, 6, 3, 5, 0.6}, 3);
  return ds;
}

CurveRow row(Strategy s, std::size_t rep, std::size_t cycle, double cmap_value, double auroc_value = 0.5,
             double t1 = 0.5) {
  CurveRow r;
  r.strategy = s;
  r.repetition = rep;
  r.cycle = cycle;
  r.labeled_count = 10 + 10 * cycle;
  r.metrics.cmap = cmap_value;
  r.metrics.auroc = auroc_value;
  r.metrics.t1acc = t1;
  return r;
}

}  // namespace

TEST_CASE("simulate_annotation") {
  const auto& ds = small_dataset();
  PoolState pools;
  for (std::size_t i = 0; i < 50; ++i) (i < 10 ? pools.labeled : pools.unlabeled).push_back(i);

  std::vector<std::size_t> batch = {10, 11, 12, 13, 14, 15, 16, 17, 18, 19};
  const auto annotated = simulate_annotation(ds, pools, batch);
  REQUIRE(annotated.size() == 10);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(annotated[k].index == batch[k]);
    CHECK(std::equal(annotated[k].labels.begin(), annotated[k].labels.end(), ds.labels.row(batch[k]).begin()));
  }

  std::vector<std::size_t> bad = {12, 3};
  try {
    simulate_annotation(ds, pools, bad);
    FAIL("expected IndexNotInPool");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IndexNotInPool);
  }

  EmbeddingDataset nobird = ds;
  for (auto& v : nobird.labels.row(20)) v = 0;
  const std::vector<std::size_t> one = {20};
  const auto pair = simulate_annotation(nobird, pools, one);
  CHECK(std::all_of(pair[0].labels.begin(), pair[0].labels.end(), [](auto v) { return v == 0; }));
}

TEST_CASE("run_single keeps the pool bookkeeping consistent") {
  const auto& ds = small_dataset();
  const auto split = split_pool_test(ds, {{1}, {2}});
  auto cfg = small_config();
  cfg.num_cycles = 6;
  for (auto strategy : kAllStrategies) {
    std::vector<PoolState> history;
    const auto rows = run_single(ds, split, strategy, 0, cfg, [&](const PoolState& p) { history.push_back(p); });
    REQUIRE(rows.size() == cfg.num_cycles + 1);
    REQUIRE(history.size() == cfg.num_cycles + 1);
    std::set<std::size_t> ever_queried;
    for (std::size_t t = 0; t < history.size(); ++t) {
      const auto& p = history[t];
      CHECK(p.cycle == t);
      CHECK(p.labeled.size() == cfg.initial_size + t * cfg.batch_size);
      CHECK(rows[t].labeled_count == p.labeled.size());
      std::vector<std::size_t> both;
      std::set_intersection(p.labeled.begin(), p.labeled.end(), p.unlabeled.begin(), p.unlabeled.end(),
                            std::back_inserter(both));
      CHECK(both.empty());
      std::vector<std::size_t> all;
      std::merge(p.labeled.begin(), p.labeled.end(), p.unlabeled.begin(), p.unlabeled.end(), std::back_inserter(all));
      CHECK(all == split.pool);
      if (t > 0) {
        std::vector<std::size_t> added;
        std::set_difference(p.labeled.begin(), p.labeled.end(), history[t - 1].labeled.begin(),
                            history[t - 1].labeled.end(), std::back_inserter(added));
        CHECK(added.size() == cfg.batch_size);
        for (auto i : added) CHECK(ever_queried.insert(i).second);
      }
    }
  }
}

TEST_CASE("run_single edge cases") {
  const auto& ds = small_dataset();
  const auto split = split_pool_test(ds, {{1}, {2}});
  auto cfg = small_config();

  SUBCASE("zero cycles") {
    cfg.num_cycles = 0;
    const auto rows = run_single(ds, split, Strategy::Entropy, 1, cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].labeled_count == cfg.initial_size);
  }
  SUBCASE("deterministic") {
    CHECK(run_single(ds, split, Strategy::TypiClust, 1, cfg) == run_single(ds, split, Strategy::TypiClust, 1, cfg));
  }
  SUBCASE("budget larger than the pool") {
    cfg.num_cycles = 30;
    try {
      run_single(ds, split, Strategy::Random, 0, cfg);
      FAIL("expected PoolExhausted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::PoolExhausted);
    }
  }
}

TEST_CASE("run_experiment") {
  const auto& ds = small_dataset();
  const auto cfg = small_config();
  const auto curve = run_experiment(ds, cfg);
  REQUIRE(curve.size() == 16);

  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& r = curve[i];
    CHECK(r.strategy == cfg.strategies[i / 8]);
    CHECK(r.repetition == (i / 4) % 2);
    CHECK(r.cycle == i % 4);
  }
  for (std::size_t rep = 0; rep < 2; ++rep) CHECK(curve[rep * 4].metrics == curve[8 + rep * 4].metrics);

  CHECK(run_experiment(ds, cfg, 4) == curve);

  auto normalized = cfg;
  normalized.normalize = true;
  CHECK(run_experiment(ds, normalized).size() == 16);
}

TEST_CASE("improvement_curves") {
  SUBCASE("self comparison is zero") {
    LearningCurve curve;
    for (auto s : {Strategy::Random, Strategy::Badge})
      for (std::size_t rep = 0; rep < 2; ++rep)
        for (std::size_t t = 0; t < 3; ++t) curve.push_back(row(s, rep, t, 0.1 * (t + 1) + rep));
    const auto imp = improvement_curves(curve, Strategy::Random);
    CHECK(imp.size() == 3 * 3);
    for (const auto& r : imp) {
      CHECK(r.strategy == Strategy::Badge);
      CHECK(r.abs_delta == 0.0);
      REQUIRE(r.rel_percent.has_value());
      CHECK(*r.rel_percent == 0.0);
    }
  }
  SUBCASE("hand arithmetic") {
    LearningCurve curve = {row(Strategy::Random, 0, 0, 0.38), row(Strategy::Random, 1, 0, 0.42),
                           row(Strategy::Entropy, 0, 0, 0.45), row(Strategy::Entropy, 1, 0, 0.47)};
    const auto imp = improvement_curves(curve, Strategy::Random);
    REQUIRE(imp.size() == 3);
    CHECK(imp[0].metric == Metric::Cmap);
    CHECK(imp[0].abs_delta == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(*imp[0].rel_percent == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(imp[0].labeled_count == 10);
  }
  SUBCASE("single repetition is a raw difference") {
    LearningCurve curve = {row(Strategy::Random, 0, 0, 0.3, 0.6, 0.2), row(Strategy::TypiClust, 0, 0, 0.5, 0.7, 0.1)};
    const auto imp = improvement_curves(curve, Strategy::Random);
    CHECK(imp[0].abs_delta == doctest::Approx(0.2));
    CHECK(imp[1].metric == Metric::Auroc);
    CHECK(imp[1].abs_delta == doctest::Approx(0.1));
    CHECK(imp[2].abs_delta == doctest::Approx(-0.1));
  }
  SUBCASE("zero baseline leaves relative improvement absent") {
    LearningCurve curve = {row(Strategy::Random, 0, 0, 0.0), row(Strategy::Entropy, 0, 0, 0.2)};
    const auto imp = improvement_curves(curve, Strategy::Random);
    CHECK(!imp[0].rel_percent.has_value());
    CHECK(imp[1].rel_percent.has_value());
  }
  SUBCASE("missing baseline") {
    LearningCurve curve = {row(Strategy::Entropy, 0, 0, 0.2)};
    try {
      improvement_curves(curve, Strategy::Random);
      FAIL("expected BaselineMissing");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BaselineMissing);
    }
  }
}

TEST_CASE("derive_seed separates purposes and strategies") {
  std::set<std::uint64_t> seeds;
  for (auto s : kAllStrategies)
    for (auto purpose : {SeedPurpose::Initial, SeedPurpose::Train, SeedPurpose::Query})
      for (std::size_t rep = 0; rep < 3; ++rep)
        for (std::size_t cycle = 0; cycle < 3; ++cycle) seeds.insert(derive_seed(1, s, rep, cycle, purpose));
  CHECK(seeds.size() == 4 * 3 * 3 * 3);
  CHECK(derive_seed(1, std::nullopt, 0, 0, SeedPurpose::Initial) == derive_seed(1, std::nullopt, 0, 0, SeedPurpose::Initial));
}
