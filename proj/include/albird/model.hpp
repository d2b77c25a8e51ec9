#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "albird/dataset.hpp"
#include "albird/matrix.hpp"

namespace albird {

/// Linear head parameters stored flat: C*D weights (row-major, one row per
/// class) followed by C biases.
class HeadParams {
 public:
  HeadParams() = default;
  HeadParams(std::size_t num_classes, std::size_t dim)
      : num_classes_(num_classes), dim_(dim), values_(num_classes * dim + num_classes, 0.0) {}

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t dim() const noexcept { return dim_; }

  std::span<double> weights(std::size_t c) { return {values_.data() + c * dim_, dim_}; }
  std::span<const double> weights(std::size_t c) const { return {values_.data() + c * dim_, dim_}; }
  double& bias(std::size_t c) { return values_[num_classes_ * dim_ + c]; }
  double bias(std::size_t c) const { return values_[num_classes_ * dim_ + c]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const HeadParams&, const HeadParams&) = default;

 private:
  std::size_t num_classes_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 128;
  double lr_max = 0.05;
  double lr_min = 0.0;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct RAdamState {
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit RAdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

inline constexpr double kProbClamp = 1e-7;

/// Glorot-uniform weights in [-a, a], a = sqrt(6 / (D + C)); zero bias.
HeadParams init_head(std::size_t num_classes, std::size_t dim, std::uint64_t seed);

double sigmoid(double z) noexcept;

MatrixD predict_probs(const HeadParams& head, const MatrixF& x);
MatrixD predict_probs(const HeadParams& head, const RowsView& x);

/// Mean binary cross entropy over all M*C entries, probabilities clamped to
/// [kProbClamp, 1 - kProbClamp].
double bce_loss(const MatrixD& probs, const LabelMatrix& labels);

/// Gradient of bce_loss w.r.t. the head parameters (same flat layout as
/// HeadParams), using dL/dlogit = (p - y) / (M * C).
std::vector<double> bce_gradient(const HeadParams& head, const RowsView& x, const LabelMatrix& labels);

double cosine_lr(std::size_t epoch, std::size_t total_epochs, double lr_max, double lr_min);

/// Variance-rectification length rho_t for step t (1-based).
double radam_rho(std::uint64_t t, double beta2);

/// One Rectified Adam update with L2 weight decay folded into the gradient.
void radam_step(std::span<double> params, std::span<const double> grads, RAdamState& state, double lr,
                const TrainConfig& cfg);

HeadParams train_head(const EmbeddingDataset& ds, std::span<const std::size_t> labeled, const TrainConfig& cfg,
                      std::uint64_t seed);

}  // namespace albird
