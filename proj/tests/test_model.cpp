#include <doctest.h>

#include <cmath>

#include "albird/error.hpp"
#include "albird/model.hpp"
#include "gradcheck.hpp"

using namespace albird;

TEST_CASE("init_head") {
  const auto head = init_head(2, 1280, 42);
  for (std::size_t c = 0; c < 2; ++c) {
    CHECK(head.bias(c) == 0.0);
    for (double w : head.weights(c)) CHECK(std::abs(w) <= std::sqrt(6.0 / 1282.0));
  }
  CHECK(init_head(2, 1280, 42) == head);
  CHECK(!(init_head(2, 1280, 43) == head));
}

TEST_CASE("predict_probs") {
  SUBCASE("zero head gives one half") {
    HeadParams head(3, 4);
    MatrixF x(5, 4, 1.5f);
    const auto probs = predict_probs(head, x);
    for (double p : probs.values()) CHECK(p == 0.5);
  }
  SUBCASE("scalar sigmoid is monotone") {
    HeadParams head(1, 1);
    head.weights(0)[0] = 1.0;
    MatrixF x(1, 1, 0.0f);
    CHECK(predict_probs(head, x)(0, 0) == 0.5);
    double prev = 0.5;
    for (float v : {1.f, 5.f, 20.f, 40.f}) {
      x(0, 0) = v;
      const double p = predict_probs(head, x)(0, 0);
      CHECK(p >= prev);
      CHECK(p <= 1.0);
      prev = p;
    }
  }
  SUBCASE("worked example") {
    HeadParams head(1, 2);
    head.weights(0)[0] = 1.0;
    head.weights(0)[1] = -1.0;
    head.bias(0) = 0.5;
    MatrixF x(1, 2);
    x(0, 0) = 2.f;
    x(0, 1) = 1.f;
    CHECK(predict_probs(head, x)(0, 0) == doctest::Approx(0.8175744761936437).epsilon(1e-12));
  }
  SUBCASE("shape mismatch") {
    HeadParams head(1, 3);
    MatrixF x(1, 2);
    CHECK_THROWS_AS(predict_probs(head, x), Error);
  }
  SUBCASE("rows are independent binary probabilities") {
    const auto head = init_head(4, 3, 1);
    MatrixF x(10, 3);
    Rng rng(5);
    for (auto& v : x.values()) v = static_cast<float>(rng.normal() * 3);
    const auto probs = predict_probs(head, x);
    for (double p : probs.values()) {
      CHECK(p > 0.0);
      CHECK(p < 1.0);
    }
  }
}

TEST_CASE("bce_loss") {
  MatrixD half(3, 2, 0.5);
  LabelMatrix y(3, 2);
  y(0, 1) = 1;
  CHECK(bce_loss(half, y) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  MatrixD exact(3, 2);
  for (std::size_t i = 0; i < 6; ++i) exact.values()[i] = y.values()[i];
  CHECK(bce_loss(exact, y) <= 1e-6);

  MatrixD p(1, 2);
  p(0, 0) = 0.9;
  p(0, 1) = 0.6;
  LabelMatrix t(1, 2);
  t(0, 0) = 1;
  CHECK(bce_loss(p, t) == doctest::Approx(0.5108256237659906).epsilon(1e-12));

  CHECK_THROWS_AS(bce_loss(MatrixD(2, 2), LabelMatrix(2, 3)), Error);
}

TEST_CASE("bce_gradient matches central differences") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = testutil::gradient_check(seed);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_CASE("cosine_lr") {
  CHECK(cosine_lr(0, 200, 0.05, 0.0) == 0.05);
  CHECK(cosine_lr(200, 200, 0.05, 0.0) == 0.0);
  CHECK(cosine_lr(100, 200, 0.05, 0.0) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(cosine_lr(10, 10, 0.3, 0.01) == 0.01);
  double prev = cosine_lr(0, 37, 0.05, 0.001);
  for (std::size_t e = 1; e <= 37; ++e) {
    const double lr = cosine_lr(e, 37, 0.05, 0.001);
    CHECK(lr <= prev);
    prev = lr;
  }
}

TEST_CASE("radam rectification length") {
  CHECK(radam_rho(1, 0.999) == 1.0);
  for (std::uint64_t t = 1; t <= 4; ++t) CHECK(radam_rho(t, 0.999) <= 4.0);
  CHECK(radam_rho(5, 0.999) > 4.0);
}

TEST_CASE("radam_step") {
  TrainConfig cfg;
  SUBCASE("zero gradient without decay leaves params unchanged") {
    cfg.weight_decay = 0.0;
    std::vector<double> params = {0.3, -1.2, 4.0};
    const auto before = params;
    RAdamState state(3);
    for (int i = 0; i < 10; ++i) radam_step(params, std::vector<double>(3, 0.0), state, 0.05, cfg);
    CHECK(params == before);
    CHECK(state.step == 10);
  }
  SUBCASE("first step is plain momentum SGD") {
    cfg.weight_decay = 0.0;
    std::vector<double> params = {1.0};
    RAdamState state(1);
    radam_step(params, std::vector<double>{1.0}, state, 0.05, cfg);
    CHECK(params[0] == doctest::Approx(0.95).epsilon(1e-12));
  }
  SUBCASE("un-rectified steps ignore the second moment") {
    for (std::uint64_t t = 0; t < 4; ++t) {
      std::vector<double> a = {0.7, -0.2}, b = a;
      RAdamState sa(2), sb(2);
      sa.step = sb.step = t;
      sa.m = sb.m = {0.1, -0.3};
      sa.v = {0.0, 0.0};
      sb.v = {5.0, 123.0};
      const std::vector<double> g = {0.4, 0.9};
      radam_step(a, g, sa, 0.05, cfg);
      radam_step(b, g, sb, 0.05, cfg);
      CHECK(a == b);
    }
  }
  SUBCASE("non-finite gradient") {
    std::vector<double> params = {1.0};
    RAdamState state(1);
    CHECK_THROWS_AS(radam_step(params, std::vector<double>{NAN}, state, 0.05, cfg), Error);
  }
}

TEST_CASE("train_head") {
  TrainConfig cfg;
  SUBCASE("single separable instance") {
    EmbeddingDataset ds;
    ds.class_names = {"a"};
    ds.embeddings = MatrixF(1, 2);
    ds.embeddings(0, 0) = 1.f;
    ds.labels = LabelMatrix(1, 1, 1);
    ds.meta = {{0, "s", "r", 1, 0.0}};
    const std::vector<std::size_t> labeled = {0};
    const auto head = train_head(ds, labeled, cfg, 3);
    const double trained = predict_probs(head, ds.embeddings)(0, 0);

    // Oracle: the same 200 full-batch steps written out as a scalar recurrence
    // over (w0, w1, b) from the same initialization.
    const auto init = init_head(1, 2, 3);
    double p[3] = {init.weights(0)[0], init.weights(0)[1], 0.0}, m[3] = {}, v[3] = {};
    const double rho_inf = 2.0 / (1.0 - cfg.beta2) - 1.0;
    for (int t = 1; t <= 200; ++t) {
      const double lr = cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(M_PI * (t - 1) / 200.0));
      const double q = 1.0 / (1.0 + std::exp(-(p[0] + p[2])));
      const double g[3] = {q - 1.0, 0.0, q - 1.0};
      const double b2t = std::pow(cfg.beta2, t);
      const double rho = rho_inf - 2.0 * t * b2t / (1.0 - b2t);
      for (int i = 0; i < 3; ++i) {
        const double gi = g[i] + cfg.weight_decay * p[i];
        m[i] = cfg.beta1 * m[i] + (1 - cfg.beta1) * gi;
        v[i] = cfg.beta2 * v[i] + (1 - cfg.beta2) * gi * gi;
        const double mh = m[i] / (1 - std::pow(cfg.beta1, t));
        if (rho > 4.0) {
          const double r = std::sqrt((rho - 4) * (rho - 2) * rho_inf / ((rho_inf - 4) * (rho_inf - 2) * rho));
          p[i] -= lr * r * mh / (std::sqrt(v[i] / (1 - b2t)) + cfg.epsilon);
        } else {
          p[i] -= lr * mh;
        }
      }
    }
    const double expected = 1.0 / (1.0 + std::exp(-(p[0] + p[2])));
    CHECK(trained == doctest::Approx(expected).epsilon(1e-9));
    CHECK(trained > predict_probs(init, ds.embeddings)(0, 0));

    // With a longer schedule the probe saturates.
    TrainConfig longer = cfg;
    longer.epochs = 2000;
    CHECK(predict_probs(train_head(ds, labeled, longer, 3), ds.embeddings)(0, 0) > 0.95);
  }
  SUBCASE("deterministic and loss-reducing on synthetic data") {
    const auto ds = synth_dataset({100, 8, 4, 8, 0.5}, 7);
    std::vector<std::size_t> all(100);
    for (std::size_t i = 0; i < 100; ++i) all[i] = i;
    const auto a = train_head(ds, all, cfg, 11);
    CHECK(train_head(ds, all, cfg, 11) == a);
    const double before = bce_loss(predict_probs(init_head(4, 8, 11), ds.embeddings), ds.labels);
    const double after = bce_loss(predict_probs(a, ds.embeddings), ds.labels);
    CHECK(after < before);
  }
  SUBCASE("empty labeled set") {
    const auto ds = synth_dataset({10, 2, 2, 2, 0.5}, 1);
    CHECK_THROWS_AS(train_head(ds, {}, cfg, 1), Error);
  }
}
