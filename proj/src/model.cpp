#include "albird/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "albird/error.hpp"
#include "albird/rng.hpp"

namespace albird {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(Errc::InvalidConfig, "train.epochs must be >= 1");
  if (batch_size < 1) throw Error(Errc::InvalidConfig, "train.batch_size must be >= 1");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(Errc::InvalidConfig, "train.beta1 and train.beta2 must lie in (0, 1)");
  }
  if (!(lr_min >= 0.0 && lr_max > lr_min)) throw Error(Errc::InvalidConfig, "train requires lr_max > lr_min >= 0");
  if (!(weight_decay >= 0.0) || !(epsilon > 0.0)) {
    throw Error(Errc::InvalidConfig, "train.weight_decay must be >= 0 and train.epsilon > 0");
  }
}

HeadParams init_head(std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
  HeadParams head(num_classes, dim);
  Rng rng(seed);
  const double a = std::sqrt(6.0 / static_cast<double>(dim + num_classes));
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (auto& w : head.weights(c)) w = rng.uniform(-a, a);
  }
  return head;
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

template <class Rows>
MatrixD predict_rows(const HeadParams& head, const Rows& x, std::size_t rows) {
  if (x.cols() != head.dim()) {
    throw Error(Errc::ShapeMismatch, "input has " + std::to_string(x.cols()) + " columns, head expects " +
                                         std::to_string(head.dim()));
  }
  MatrixD out(rows, head.num_classes());
  for (std::size_t i = 0; i < rows; ++i) {
    const auto xi = x.row(i);
    for (std::size_t c = 0; c < head.num_classes(); ++c) {
      out(i, c) = sigmoid(dot(head.weights(c), xi) + head.bias(c));
    }
  }
  return out;
}

}  // namespace

MatrixD predict_probs(const HeadParams& head, const MatrixF& x) { return predict_rows(head, x, x.rows()); }

MatrixD predict_probs(const HeadParams& head, const RowsView& x) { return predict_rows(head, x, x.size()); }

double bce_loss(const MatrixD& probs, const LabelMatrix& labels) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw Error(Errc::ShapeMismatch, "probabilities and labels differ in shape");
  }
  const auto p = probs.values();
  const auto y = labels.values();
  if (p.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbClamp, 1.0 - kProbClamp);
    total -= y[i] ? std::log(q) : std::log1p(-q);
  }
  return total / static_cast<double>(p.size());
}

std::vector<double> bce_gradient(const HeadParams& head, const RowsView& x, const LabelMatrix& labels) {
  const std::size_t m = x.size(), c = head.num_classes(), d = head.dim();
  if (labels.rows() != m || labels.cols() != c) throw Error(Errc::ShapeMismatch, "labels do not match batch");
  const MatrixD probs = predict_probs(head, x);
  std::vector<double> grad(c * d + c, 0.0);
  const double scale = 1.0 / static_cast<double>(m * c);
  for (std::size_t i = 0; i < m; ++i) {
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < c; ++k) {
      const double delta = (probs(i, k) - static_cast<double>(labels(i, k))) * scale;
      double* gw = grad.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) gw[j] += delta * static_cast<double>(xi[j]);
      grad[c * d + k] += delta;
    }
  }
  return grad;
}

double cosine_lr(std::size_t epoch, std::size_t total_epochs, double lr_max, double lr_min) {
  if (epoch == 0) return lr_max;
  if (epoch >= total_epochs) return lr_min;
  const double phase = std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

double radam_rho(std::uint64_t t, double beta2) {
  const double rho_inf = 2.0 / (1.0 - beta2) - 1.0;
  const double beta2_t = std::pow(beta2, static_cast<double>(t));
  return rho_inf - 2.0 * static_cast<double>(t) * beta2_t / (1.0 - beta2_t);
}

void radam_step(std::span<double> params, std::span<const double> grads, RAdamState& state, double lr,
                const TrainConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(Errc::ShapeMismatch, "parameter, gradient and optimizer state sizes differ");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw Error(Errc::NonFiniteGradient, "gradient has a non-finite entry");
  }
  state.step += 1;
  const auto t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  const double rho_inf = 2.0 / (1.0 - cfg.beta2) - 1.0;
  const double rho_t = radam_rho(state.step, cfg.beta2);
  const bool rectified = rho_t > 4.0;
  double r = 0.0;
  if (rectified) {
    r = std::sqrt(((rho_t - 4.0) * (rho_t - 2.0) * rho_inf) / ((rho_inf - 4.0) * (rho_inf - 2.0) * rho_t));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + cfg.weight_decay * params[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    if (rectified) {
      params[i] -= lr * r * m_hat / (std::sqrt(state.v[i] / bias2) + cfg.epsilon);
    } else {
      params[i] -= lr * m_hat;
    }
  }
}

HeadParams train_head(const EmbeddingDataset& ds, std::span<const std::size_t> labeled, const TrainConfig& cfg,
                      std::uint64_t seed) {
  if (labeled.empty()) throw Error(Errc::EmptyLabeledSet, "cannot train on an empty labeled set");
  cfg.validate();
  HeadParams head = init_head(ds.num_classes(), ds.dim(), seed);
  // Shuffles use a stream separate from the initializer's.
  Rng rng(mix_seed({seed, 0x73687566666c65ULL}));
  RAdamState state(head.values().size());
  std::vector<std::size_t> order(labeled.begin(), labeled.end());
  std::vector<std::size_t> batch;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.lr_max, cfg.lr_min);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                   order.begin() + static_cast<std::ptrdiff_t>(start + len));
      LabelMatrix y(len, ds.num_classes());
      for (std::size_t i = 0; i < len; ++i) {
        std::copy_n(ds.labels.row(batch[i]).begin(), ds.num_classes(), y.row(i).begin());
      }
      const auto grad = bce_gradient(head, RowsView(ds.embeddings, batch), y);
      radam_step(head.values(), grad, state, lr, cfg);
    }
  }
  return head;
}

}  // namespace albird
