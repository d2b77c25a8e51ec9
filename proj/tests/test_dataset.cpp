#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstring>
#include <fstream>
#include <numeric>

#include "albird/dataset.hpp"
#include "albird/error.hpp"
#include "albird/rng.hpp"
#include "test_util.hpp"

using namespace albird;
namespace fs = std::filesystem;

namespace {

void write(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

// Minimal hand-written directory: N=3, D=2, C=2 (or C as given).
void write_tiny(const fs::path& dir, std::size_t embedding_bytes = 24, const std::string& row2_labels = "1",
                int num_classes = 2) {
  std::string names = num_classes == 2 ? R"(["a","b"])" : R"(["a","b","c"])";
  write(dir / "manifest.json", R"({"version":1,"num_instances":3,"dim":2,"num_classes":)" +
                                   std::to_string(num_classes) + R"(,"class_names":)" + names + "}");
  std::string bytes(embedding_bytes, '\0');
  const float values[6] = {1.f, 2.f, 3.f, 4.f, 5.f, 6.f};
  std::memcpy(bytes.data(), values, std::min<std::size_t>(embedding_bytes, sizeof values));
  write(dir / "embeddings.f32le", bytes);
  write(dir / "instances.csv",
        "index,segment_id,recording_id,day,start_s,labels\n"
        "0,s0,r0,1,0,0\n"
        "1,s1,r0,1,5,\n"
        "2,s2,r1,2,0," + row2_labels + "\n");
}

Errc load_error(const fs::path& dir) {
  try {
    load_dataset(dir);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected load_dataset to throw");
  return Errc::Io;
}

}  // namespace

TEST_CASE("load_dataset reads the three-file format") {
  testutil::TempDir dir("tiny");
  write_tiny(dir.path());
  const auto ds = load_dataset(dir.path());
  CHECK(ds.num_instances() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.num_classes() == 2);
  CHECK(ds.embeddings(2, 1) == 6.f);
  CHECK(ds.labels(0, 0) == 1);
  CHECK(ds.labels(1, 0) == 0);
  CHECK(ds.labels(1, 1) == 0);  // no-bird row accepted
  CHECK(ds.labels(2, 1) == 1);
  CHECK(ds.meta[1].start_s == 5.0);
  CHECK(ds.meta[2].day == 2);
}

TEST_CASE("load_dataset error paths") {
  testutil::TempDir dir("errors");
  SUBCASE("size mismatch") {
    write_tiny(dir.path(), 20);
    CHECK(load_error(dir.path()) == Errc::SizeMismatch);
  }
  SUBCASE("label index out of range") {
    write_tiny(dir.path(), 24, "0;5", 3);
    CHECK(load_error(dir.path()) == Errc::BadLabelIndex);
  }
  SUBCASE("missing file") {
    write_tiny(dir.path());
    fs::remove(dir.path() / "instances.csv");
    CHECK(load_error(dir.path()) == Errc::MissingFile);
  }
  SUBCASE("duplicate index") {
    write_tiny(dir.path());
    write(dir.path() / "instances.csv",
          "index,segment_id,recording_id,day,start_s,labels\n0,s0,r0,1,0,\n0,s1,r0,1,5,\n2,s2,r1,2,0,\n");
    CHECK(load_error(dir.path()) == Errc::DuplicateIndex);
  }
  SUBCASE("non-finite embedding") {
    write_tiny(dir.path());
    std::string bytes(24, '\0');
    const float values[6] = {1.f, NAN, 3.f, 4.f, 5.f, 6.f};
    std::memcpy(bytes.data(), values, 24);
    write(dir.path() / "embeddings.f32le", bytes);
    CHECK(load_error(dir.path()) == Errc::NonFiniteEmbedding);
  }
}

TEST_CASE("write_dataset then load_dataset is bit-exact on random datasets") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    SynthConfig cfg;
    cfg.num_instances = 10 + rng.below(40);
    cfg.dim = 1 + rng.below(9);
    cfg.num_classes = 1 + rng.below(5);
    cfg.num_clusters = 1 + rng.below(5);
    cfg.noise = rng.uniform(0.0, 2.0);
    auto ds = synth_dataset(cfg, seed);
    // Odd float payloads and fractional offsets must survive too.
    ds.embeddings(0, 0) = -0.0f;
    ds.embeddings(1, 0) = 1e-38f;
    ds.meta[1].start_s = 0.1 + 0.2;
    testutil::TempDir dir("roundtrip");
    write_dataset(ds, dir.path());
    const auto back = load_dataset(dir.path());
    CHECK(back == ds);
    CHECK(std::signbit(back.embeddings(0, 0)));
  }
}

TEST_CASE("split_pool_test partitions by day") {
  EmbeddingDataset ds;
  ds.class_names = {"x"};
  ds.embeddings = MatrixF(4, 1);
  ds.labels = LabelMatrix(4, 1);
  const int days[4] = {1, 1, 2, 2};
  for (std::size_t i = 0; i < 4; ++i) ds.meta.push_back({i, "s", "r", days[i], 0.0});

  const auto split = split_pool_test(ds, {{1}, {2}});
  CHECK(split.pool == std::vector<std::size_t>{0, 1});
  CHECK(split.test == std::vector<std::size_t>{2, 3});

  CHECK_THROWS_AS(split_pool_test(ds, {{1}, {3}}), Error);
  try {
    split_pool_test(ds, {{1}, {3}});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnassignedDay);
  }
  try {
    split_pool_test(ds, {{1, 2}, {3}});
    FAIL("expected EmptySplit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptySplit);
  }
}

TEST_CASE("split_pool_test output is sorted, disjoint and exhaustive") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    EmbeddingDataset ds;
    ds.class_names = {"x"};
    const std::size_t n = 5 + rng.below(50);
    ds.embeddings = MatrixF(n, 1);
    ds.labels = LabelMatrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) ds.meta.push_back({i, "s", "r", 1 + static_cast<int>(rng.below(5)), 0.0});
    ds.meta[0].day = 1;
    ds.meta[1].day = 5;
    const auto split = split_pool_test(ds, {{1, 2, 3}, {4, 5}});
    CHECK(std::is_sorted(split.pool.begin(), split.pool.end()));
    CHECK(std::is_sorted(split.test.begin(), split.test.end()));
    std::vector<std::size_t> all;
    std::merge(split.pool.begin(), split.pool.end(), split.test.begin(), split.test.end(), std::back_inserter(all));
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    CHECK(all == expected);
  }
}

TEST_CASE("synth_dataset contract") {
  SynthConfig cfg{100, 8, 4, 8, 0.5};
  const auto a = synth_dataset(cfg, 7);
  const auto b = synth_dataset(cfg, 7);
  CHECK(a == b);
  CHECK(!(synth_dataset(cfg, 8).embeddings == a.embeddings));

  for (std::size_t i = 0; i < a.num_instances(); ++i) {
    int ones = 0;
    for (auto v : a.labels.row(i)) ones += v;
    CHECK(ones >= 1);
    CHECK(ones <= 2);
    CHECK(a.meta[i].day == 1 + static_cast<int>(i % 2));
  }
  a.validate();

  SUBCASE("zero noise puts every instance on a center") {
    cfg.noise = 0.0;
    const auto ds = synth_dataset(cfg, 3);
    // Rows with identical labels from the same cluster coincide; at most G distinct rows exist.
    std::vector<std::vector<float>> distinct;
    for (std::size_t i = 0; i < ds.num_instances(); ++i) {
      std::vector<float> row(ds.embeddings.row(i).begin(), ds.embeddings.row(i).end());
      if (std::find(distinct.begin(), distinct.end(), row) == distinct.end()) distinct.push_back(row);
      for (float v : row) CHECK(std::abs(v) <= 1.0f);
    }
    CHECK(distinct.size() <= cfg.num_clusters);
  }

  SUBCASE("invalid configs") {
    cfg.num_clusters = 0;
    CHECK_THROWS_AS(synth_dataset(cfg, 1), Error);
    cfg.num_clusters = 200;
    CHECK_THROWS_AS(synth_dataset(cfg, 1), Error);
    cfg.num_clusters = 8;
    cfg.num_classes = 0;
    CHECK_THROWS_AS(synth_dataset(cfg, 1), Error);
  }
}

TEST_CASE("l2_normalize_rows") {
  auto ds = synth_dataset({20, 5, 2, 3, 1.0}, 1);
  l2_normalize_rows(ds);
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    double n2 = 0;
    for (float v : ds.embeddings.row(i)) n2 += double(v) * v;
    CHECK(n2 == doctest::Approx(1.0).epsilon(1e-6));
  }
}
