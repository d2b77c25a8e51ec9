#include "albird/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "albird/error.hpp"

namespace albird {

namespace {

void check_shapes(const MatrixD& probs, const LabelMatrix& labels) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
    throw Error(Errc::ShapeMismatch, "probabilities and labels differ in shape");
  }
}

std::vector<double> column(const MatrixD& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, c);
  return out;
}

std::vector<std::uint8_t> column(const LabelMatrix& m, std::size_t c) {
  std::vector<std::uint8_t> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = m(i, c);
  return out;
}

}  // namespace

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::ShapeMismatch, "scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!labels[order[rank]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
  }
  if (hits == 0) throw Error(Errc::NoPositives, "average precision needs at least one positive");
  return sum / static_cast<double>(hits);
}

MacroScore cmap(const MatrixD& probs, const LabelMatrix& labels) {
  check_shapes(probs, labels);
  MacroScore out;
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t c = 0; c < probs.cols(); ++c) {
    const auto y = column(labels, c);
    if (std::none_of(y.begin(), y.end(), [](auto v) { return v != 0; })) {
      ++out.skipped;
      continue;
    }
    sum += average_precision(column(probs, c), y);
    ++scored;
  }
  if (scored == 0) throw Error(Errc::AllClassesEmpty, "no class has a positive label");
  out.value = sum / static_cast<double>(scored);
  return out;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw Error(Errc::ShapeMismatch, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of (1-based) midranks of the positives.
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && scores[order[end]] == scores[order[start]]) ++end;
    const double midrank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t r = start; r < end; ++r) {
      if (labels[order[r]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    }
    start = end;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error(Errc::NoEligibleClass, "AUROC needs positives and negatives");
  const double pos = static_cast<double>(n_pos);
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * static_cast<double>(n_neg));
}

MacroScore auroc_macro(const MatrixD& probs, const LabelMatrix& labels) {
  check_shapes(probs, labels);
  MacroScore out;
  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t c = 0; c < probs.cols(); ++c) {
    const auto y = column(labels, c);
    const auto pos = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](auto v) { return v != 0; }));
    if (pos == 0 || pos == y.size()) {
      ++out.skipped;
      continue;
    }
    sum += auroc(column(probs, c), y);
    ++scored;
  }
  if (scored == 0) throw Error(Errc::NoEligibleClass, "no class has both positive and negative labels");
  out.value = sum / static_cast<double>(scored);
  return out;
}

Top1Score top1_acc(const MatrixD& probs, const LabelMatrix& labels) {
  check_shapes(probs, labels);
  Top1Score out;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto y = labels.row(i);
    if (std::none_of(y.begin(), y.end(), [](auto v) { return v != 0; })) continue;
    ++out.evaluated;
    const auto p = probs.row(i);
    const auto top = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    if (y[top]) ++correct;
  }
  if (out.evaluated == 0) throw Error(Errc::NoLabeledInstances, "no instance has a positive label");
  out.value = static_cast<double>(correct) / static_cast<double>(out.evaluated);
  return out;
}

MetricRecord evaluate(const MatrixD& probs, const LabelMatrix& labels) {
  MetricRecord r;
  const auto ap = cmap(probs, labels);
  r.cmap = ap.value;
  r.skipped_classes = ap.skipped;
  r.auroc = auroc_macro(probs, labels).value;
  const auto t1 = top1_acc(probs, labels);
  r.t1acc = t1.value;
  r.evaluated_instances = t1.evaluated;
  return r;
}

}  // namespace albird
