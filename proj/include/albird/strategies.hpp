#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "albird/matrix.hpp"
#include "albird/rng.hpp"

namespace albird {

enum class Strategy { Random, Entropy, Badge, TypiClust };

inline constexpr std::array<Strategy, 4> kAllStrategies = {Strategy::Random, Strategy::Entropy, Strategy::Badge,
                                                           Strategy::TypiClust};

std::string_view strategy_name(Strategy s) noexcept;

/// Throws Error(UnknownStrategy) listing the valid identifiers.
Strategy parse_strategy(std::string_view name);

/// Everything a strategy may look at when picking B(t) from U(t). Positions
/// are local to the pool view; the loop maps them back to dataset indices.
struct QueryContext {
  RowsView pool_embeddings;
  const MatrixD& pool_probs;
  RowsView labeled_embeddings;
  std::size_t batch_size;
  Rng& rng;
};

using QueryBatch = std::vector<std::size_t>;

QueryBatch query_random(QueryContext& ctx);

/// Mean binary entropy (nats) over the classes of each row.
std::vector<double> score_entropy(const MatrixD& probs);

QueryBatch query_entropy(QueryContext& ctx);

/// Last-layer gradient embeddings (p - yhat) (x) x with yhat_c = [p_c >= 0.5],
/// flattened to C*D columns, class-major.
MatrixD badge_embeddings(const MatrixD& probs, const RowsView& x);

/// k-means++ seeding over `count` points given a squared-distance function.
/// When every remaining point coincides with a selected one, the next pick is
/// uniform over the unselected points. `first`, when given, replaces the
/// uniform draw of the first center.
std::vector<std::size_t> kmeanspp_select(std::size_t count, std::size_t b, Rng& rng,
                                         const std::function<double(std::size_t, std::size_t)>& dist2,
                                         std::optional<std::size_t> first = std::nullopt);

std::vector<std::size_t> kmeanspp_select(const MatrixD& points, std::size_t b, Rng& rng);

/// k-means++ over the gradient embeddings, starting from the row with the
/// largest gradient norm.
QueryBatch query_badge(QueryContext& ctx);

struct KMeansResult {
  std::vector<std::size_t> assignments;
  MatrixD centroids;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kKMeansMaxIters = 100;
inline constexpr double kKMeansTol = 1e-6;

KMeansResult kmeans(const MatrixD& points, std::size_t k, Rng& rng, std::size_t max_iters = kKMeansMaxIters,
                    double tol = kKMeansTol);

inline constexpr std::size_t kTypicalityNeighbors = 20;

/// Inverse mean distance from point `i` to its nearest neighbours among
/// `cluster` (which contains i). Singletons score +inf.
double typicality(std::size_t i, std::span<const std::size_t> cluster, const MatrixD& points,
                  std::size_t neighbors = kTypicalityNeighbors);

QueryBatch query_typiclust(QueryContext& ctx);

QueryBatch query(Strategy s, QueryContext& ctx);

}  // namespace albird
