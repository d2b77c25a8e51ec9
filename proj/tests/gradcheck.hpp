#pragma once

#include <algorithm>
#include <cmath>

#include "albird/model.hpp"
#include "albird/rng.hpp"
#include "oracles.hpp"

namespace testutil {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t params = 0;
};

// Compares bce_gradient with central differences of bce_loss on a random
// M x D problem with C classes.
inline GradCheck gradient_check(std::uint64_t seed, double h = 1e-4) {
  using namespace albird;
  Rng rng(seed);
  const std::size_t m = 1 + rng.below(8), d = 1 + rng.below(8), c = 1 + rng.below(4);
  MatrixF x(m, d);
  for (auto& v : x.values()) v = static_cast<float>(rng.normal());
  LabelMatrix y(m, c);
  for (auto& v : y.values()) v = static_cast<std::uint8_t>(rng.below(2));
  HeadParams head(c, d);
  for (auto& v : head.values()) v = rng.normal() * 0.5;

  std::vector<std::size_t> rows(m);
  for (std::size_t i = 0; i < m; ++i) rows[i] = i;
  const auto grad = bce_gradient(head, RowsView(x, rows), y);

  GradCheck out;
  out.params = grad.size();
  for (std::size_t p = 0; p < grad.size(); ++p) {
    auto loss_at = [&](double value) {
      HeadParams probe = head;
      probe.values()[p] = value;
      return bce_loss(predict_probs(probe, x), y);
    };
    const double numeric = oracle::central_difference(loss_at, head.values()[p], h);
    const double scale = std::max({std::abs(grad[p]), std::abs(numeric), 1e-6});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(grad[p] - numeric) / scale);
  }
  return out;
}

}  // namespace testutil
