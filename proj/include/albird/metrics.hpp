#pragma once

#include <cstddef>
#include <span>

#include "albird/matrix.hpp"

namespace albird {

struct MetricRecord {
  double cmap = 0.0;
  double auroc = 0.0;
  double t1acc = 0.0;
  std::size_t evaluated_instances = 0;  // rows with at least one positive
  std::size_t skipped_classes = 0;      // classes without positives (cmAP)

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

struct MacroScore {
  double value = 0.0;
  std::size_t skipped = 0;
};

/// Mean precision at the rank of each positive, ranking by descending score
/// with ties broken by lower index first.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

MacroScore cmap(const MatrixD& probs, const LabelMatrix& labels);

/// Mann-Whitney AUROC with midranks for one class.
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

MacroScore auroc_macro(const MatrixD& probs, const LabelMatrix& labels);

struct Top1Score {
  double value = 0.0;
  std::size_t evaluated = 0;
};

Top1Score top1_acc(const MatrixD& probs, const LabelMatrix& labels);

MetricRecord evaluate(const MatrixD& probs, const LabelMatrix& labels);

}  // namespace albird
