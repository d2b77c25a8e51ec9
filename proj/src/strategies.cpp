#include "albird/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "albird/error.hpp"

namespace albird {

std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Entropy: return "entropy";
    case Strategy::Badge: return "badge";
    case Strategy::TypiClust: return "typiclust";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : kAllStrategies) {
    if (strategy_name(s) == name) return s;
  }
  std::string valid;
  for (auto s : kAllStrategies) {
    if (!valid.empty()) valid += ", ";
    valid += strategy_name(s);
  }
  throw Error(Errc::UnknownStrategy, "'" + std::string(name) + "' (valid: " + valid + ")");
}

namespace {

void check_context(const QueryContext& ctx) {
  const std::size_t m = ctx.pool_embeddings.size();
  if (ctx.batch_size < 1 || ctx.batch_size > m) {
    throw Error(Errc::PoolExhausted, "batch size " + std::to_string(ctx.batch_size) + " with " + std::to_string(m) +
                                         " unlabeled instances");
  }
  if (ctx.pool_probs.rows() != m) throw Error(Errc::ShapeMismatch, "pool probabilities do not match pool rows");
}

}  // namespace

QueryBatch query_random(QueryContext& ctx) {
  check_context(ctx);
  std::vector<std::size_t> perm(ctx.pool_embeddings.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // Partial Fisher-Yates: only the first b slots are drawn.
  for (std::size_t i = 0; i < ctx.batch_size; ++i) {
    const auto j = i + static_cast<std::size_t>(ctx.rng.below(perm.size() - i));
    std::swap(perm[i], perm[j]);
  }
  perm.resize(ctx.batch_size);
  return perm;
}

std::vector<double> score_entropy(const MatrixD& probs) {
  std::vector<double> scores(probs.rows(), 0.0);
  if (probs.cols() == 0) return scores;
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    double h = 0.0;
    for (double p : probs.row(i)) {
      if (p > 0.0) h -= p * std::log(p);
      if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    }
    scores[i] = h / static_cast<double>(probs.cols());
  }
  return scores;
}

QueryBatch query_entropy(QueryContext& ctx) {
  check_context(ctx);
  const auto scores = score_entropy(ctx.pool_probs);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ctx.batch_size), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(ctx.batch_size);
  return order;
}

MatrixD badge_embeddings(const MatrixD& probs, const RowsView& x) {
  if (probs.rows() != x.size()) throw Error(Errc::ShapeMismatch, "probabilities and embeddings differ in rows");
  const std::size_t c = probs.cols(), d = x.cols();
  MatrixD out(x.size(), c * d);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto xi = x.row(i);
    for (std::size_t k = 0; k < c; ++k) {
      const double p = probs(i, k);
      const double residual = p - (p >= 0.5 ? 1.0 : 0.0);
      for (std::size_t j = 0; j < d; ++j) out(i, k * d + j) = residual * static_cast<double>(xi[j]);
    }
  }
  return out;
}

std::vector<std::size_t> kmeanspp_select(std::size_t count, std::size_t b, Rng& rng,
                                         const std::function<double(std::size_t, std::size_t)>& dist2,
                                         std::optional<std::size_t> first) {
  if (b > count) throw Error(Errc::InvalidConfig, "cannot select " + std::to_string(b) + " of " + std::to_string(count));
  std::vector<std::size_t> picked;
  if (b == 0) return picked;
  picked.reserve(b);
  std::vector<bool> chosen(count, false);
  std::vector<double> nearest(count, std::numeric_limits<double>::infinity());

  auto take = [&](std::size_t idx) {
    picked.push_back(idx);
    chosen[idx] = true;
    nearest[idx] = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (!chosen[i]) nearest[i] = std::min(nearest[i], std::max(0.0, dist2(i, idx)));
    }
  };

  if (first && *first >= count) throw Error(Errc::InvalidConfig, "first center out of range");
  take(first ? *first : static_cast<std::size_t>(rng.below(count)));
  while (picked.size() < b) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (!chosen[i]) total += nearest[i];
    }
    std::size_t next = count;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        if (chosen[i] || nearest[i] <= 0.0) continue;
        acc += nearest[i];
        next = i;
        if (acc > target) break;
      }
    } else {
      // Everything left coincides with a chosen point.
      auto r = static_cast<std::size_t>(rng.below(count - picked.size()));
      for (std::size_t i = 0; i < count; ++i) {
        if (chosen[i]) continue;
        if (r-- == 0) {
          next = i;
          break;
        }
      }
    }
    take(next);
  }
  return picked;
}

std::vector<std::size_t> kmeanspp_select(const MatrixD& points, std::size_t b, Rng& rng) {
  return kmeanspp_select(points.rows(), b, rng, [&](std::size_t i, std::size_t j) {
    return squared_distance(points.row(i), points.row(j));
  });
}

QueryBatch query_badge(QueryContext& ctx) {
  check_context(ctx);
  const std::size_t m = ctx.pool_embeddings.size(), c = ctx.pool_probs.cols();
  // ||(r_i x x_i) - (r_j x x_j)||^2 expands to norms and inner products of the
  // factors, so the M x (C*D) gradient embedding is never materialized.
  MatrixD residual(m, c);
  std::vector<double> residual_norm2(m), x_norm2(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      const double p = ctx.pool_probs(i, k);
      residual(i, k) = p - (p >= 0.5 ? 1.0 : 0.0);
    }
    residual_norm2[i] = dot(residual.row(i), residual.row(i));
    const auto xi = ctx.pool_embeddings.row(i);
    x_norm2[i] = dot(xi, xi);
  }
  // First center: largest gradient norm (lowest index on ties).
  std::size_t first = 0;
  for (std::size_t i = 1; i < m; ++i) {
    if (residual_norm2[i] * x_norm2[i] > residual_norm2[first] * x_norm2[first]) first = i;
  }
  return kmeanspp_select(m, ctx.batch_size, ctx.rng, [&](std::size_t i, std::size_t j) {
    const double cross = dot(residual.row(i), residual.row(j)) *
                         dot(ctx.pool_embeddings.row(i), ctx.pool_embeddings.row(j));
    return residual_norm2[i] * x_norm2[i] + residual_norm2[j] * x_norm2[j] - 2.0 * cross;
  }, first);
}

namespace {

std::size_t nearest_centroid(std::span<const double> point, const MatrixD& centroids, double& best_d2) {
  std::size_t best = 0;
  best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d2 = squared_distance(point, centroids.row(c));
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans(const MatrixD& points, std::size_t k, Rng& rng, std::size_t max_iters, double tol) {
  const std::size_t m = points.rows(), dim = points.cols();
  if (k < 1 || k > m) throw Error(Errc::InvalidConfig, "kmeans needs 1 <= k <= M (k=" + std::to_string(k) + ")");

  KMeansResult res;
  res.centroids = MatrixD(k, dim);
  const auto seeds = kmeanspp_select(points, k, rng);
  for (std::size_t c = 0; c < k; ++c) std::copy_n(points.row(seeds[c]).begin(), dim, res.centroids.row(c).begin());

  res.assignments.assign(m, 0);
  std::vector<double> d2(m, 0.0);
  std::vector<std::size_t> counts(k);
  MatrixD sums(k, dim);
  for (res.iterations = 0; res.iterations < max_iters;) {
    for (std::size_t i = 0; i < m; ++i) res.assignments[i] = nearest_centroid(points.row(i), res.centroids, d2[i]);
    ++res.iterations;

    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.values().begin(), sums.values().end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto a = res.assignments[i];
      ++counts[a];
      auto s = sums.row(a);
      const auto p = points.row(i);
      for (std::size_t j = 0; j < dim; ++j) s[j] += p[j];
    }
    MatrixD next(k, dim);
    std::vector<bool> reseeded(m, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < dim; ++j) next(c, j) = sums(c, j) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its centroid.
      std::size_t far = m;
      for (std::size_t i = 0; i < m; ++i) {
        if (reseeded[i]) continue;
        if (far == m || d2[i] > d2[far]) far = i;
      }
      if (far == m) far = 0;
      reseeded[far] = true;
      d2[far] = 0.0;
      std::copy_n(points.row(far).begin(), dim, next.row(c).begin());
    }

    double max_shift = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      max_shift = std::max(max_shift, std::sqrt(squared_distance(next.row(c), res.centroids.row(c))));
      scale = std::max(scale, std::sqrt(dot(next.row(c), next.row(c))));
    }
    res.centroids = std::move(next);
    if (max_shift <= tol * scale) break;
  }

  res.inertia = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double best;
    res.assignments[i] = nearest_centroid(points.row(i), res.centroids, best);
    res.inertia += best;
  }
  return res;
}

double typicality(std::size_t i, std::span<const std::size_t> cluster, const MatrixD& points, std::size_t neighbors) {
  if (cluster.size() < 2 || neighbors == 0) return std::numeric_limits<double>::infinity();
  const std::size_t k_eff = std::min(neighbors, cluster.size() - 1);
  std::vector<double> dist;
  dist.reserve(cluster.size() - 1);
  bool skipped_self = false;
  for (auto j : cluster) {
    if (j == i && !skipped_self) {
      skipped_self = true;
      continue;
    }
    dist.push_back(std::sqrt(squared_distance(points.row(i), points.row(j))));
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_eff), dist.end());
  double sum = 0.0;
  for (std::size_t n = 0; n < k_eff; ++n) sum += dist[n];
  const double mean = sum / static_cast<double>(k_eff);
  return mean > 0.0 ? 1.0 / mean : std::numeric_limits<double>::infinity();
}

QueryBatch query_typiclust(QueryContext& ctx) {
  check_context(ctx);
  const std::size_t n_labeled = ctx.labeled_embeddings.size();
  const std::size_t n_pool = ctx.pool_embeddings.size();
  const std::size_t dim = ctx.pool_embeddings.cols();

  // Labeled rows first, then pool rows.
  MatrixD points(n_labeled + n_pool, dim);
  for (std::size_t i = 0; i < n_labeled; ++i) {
    std::copy_n(ctx.labeled_embeddings.row(i).begin(), dim, points.row(i).begin());
  }
  for (std::size_t i = 0; i < n_pool; ++i) {
    std::copy_n(ctx.pool_embeddings.row(i).begin(), dim, points.row(n_labeled + i).begin());
  }

  const std::size_t k = n_labeled + ctx.batch_size;
  const auto clustering = kmeans(points, k, ctx.rng);

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < points.rows(); ++i) members[clustering.assignments[i]].push_back(i);
  std::vector<bool> covered(k, false);
  for (std::size_t i = 0; i < n_labeled; ++i) covered[clustering.assignments[i]] = true;

  // Uncovered clusters first, each group by size descending, then cluster id.
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < k; ++c) {
    if (!members[c].empty()) order.push_back(c);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (covered[a] != covered[b]) return !covered[a];
    if (members[a].size() != members[b].size()) return members[a].size() > members[b].size();
    return a < b;
  });

  std::vector<std::vector<double>> scores(k);
  std::vector<bool> taken(points.rows(), false);
  QueryBatch batch;
  while (batch.size() < ctx.batch_size) {
    const std::size_t before = batch.size();
    for (auto c : order) {
      if (batch.size() == ctx.batch_size) break;
      const auto& cluster = members[c];
      if (scores[c].empty()) {
        scores[c].resize(cluster.size());
        for (std::size_t n = 0; n < cluster.size(); ++n) {
          scores[c][n] = typicality(cluster[n], cluster, points, kTypicalityNeighbors);
        }
      }
      std::size_t best = cluster.size();
      for (std::size_t n = 0; n < cluster.size(); ++n) {
        const auto p = cluster[n];
        if (p < n_labeled || taken[p]) continue;
        if (best == cluster.size() || scores[c][n] > scores[c][best]) best = n;
      }
      if (best == cluster.size()) continue;
      taken[cluster[best]] = true;
      batch.push_back(cluster[best] - n_labeled);
    }
    if (batch.size() == before) break;
  }
  return batch;
}

QueryBatch query(Strategy s, QueryContext& ctx) {
  switch (s) {
    case Strategy::Random: return query_random(ctx);
    case Strategy::Entropy: return query_entropy(ctx);
    case Strategy::Badge: return query_badge(ctx);
    case Strategy::TypiClust: return query_typiclust(ctx);
  }
  throw Error(Errc::UnknownStrategy, "unhandled strategy");
}

}  // namespace albird
