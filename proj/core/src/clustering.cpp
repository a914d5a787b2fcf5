#include "vsp/clustering.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>

#include "vsp/seeding.hpp"

namespace vsp {
namespace {

std::size_t nearest_centroid(const Vector& x, const std::vector<Vector>& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centroids.size(); ++j) {
    const double d = squared_distance(x, centroids[j]);
    if (d < best_dist) {
      best_dist = d;
      best = j;
    }
  }
  if (dist) *dist = best_dist;
  return best;
}

std::vector<Vector> plus_plus_seeding(const std::vector<Vector>& points, std::size_t k,
                                      std::mt19937_64& rng) {
  std::vector<Vector> centroids;
  centroids.reserve(k);
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  centroids.push_back(points[first(rng)]);

  std::vector<double> d2(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) d2[i] = squared_distance(points[i], centroids[0]);

  while (centroids.size() < k) {
    double total = 0.0;
    for (const double v : d2) total += v;
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      // Walk the cumulative mass, never landing on a zero-weight point.
      for (pick = 0; pick < points.size(); ++pick) {
        if (d2[pick] <= 0.0) continue;
        target -= d2[pick];
        if (target < 0.0) break;
      }
      if (pick == points.size()) {
        pick = static_cast<std::size_t>(
            std::distance(d2.begin(), std::max_element(d2.begin(), d2.end())));
      }
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < points.size(); ++i)
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

// Means of the labeled groups. Empty clusters take the point farthest from its
// own centroid among clusters that can spare one.
void update_centroids(const std::vector<Vector>& points, std::vector<std::size_t>& labels,
                      std::vector<Vector>& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points.front().size();

  const auto recompute = [&](std::vector<std::size_t>& counts) {
    counts.assign(k, 0);
    for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[labels[i]];
      for (std::size_t d = 0; d < dim; ++d) centroids[labels[i]][d] += points[i][d];
    }
    for (std::size_t j = 0; j < k; ++j)
      if (counts[j] > 0)
        for (double& v : centroids[j]) v /= static_cast<double>(counts[j]);
  };

  std::vector<std::size_t> counts;
  recompute(counts);
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] > 0) continue;
    std::size_t far = points.size();
    double far_dist = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (counts[labels[i]] < 2) continue;
      const double d = squared_distance(points[i], centroids[labels[i]]);
      if (d > far_dist) {
        far_dist = d;
        far = i;
      }
    }
    if (far == points.size()) break;  // cannot happen with >= k points
    labels[far] = j;
    recompute(counts);
  }
}

double wcss(const std::vector<Vector>& points, const std::vector<std::size_t>& labels,
            const std::vector<Vector>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += squared_distance(points[i], centroids[labels[i]]);
  return total;
}

KMeansModel lloyd(const std::vector<Vector>& points, std::size_t k, std::mt19937_64& rng,
                  std::size_t max_iterations) {
  KMeansModel model;
  model.centroids = plus_plus_seeding(points, k, rng);
  model.labels.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) model.labels[i] = nearest_centroid(points[i], model.centroids);
  model.inertia_history.push_back(wcss(points, model.labels, model.centroids));

  std::vector<std::size_t> next(points.size());
  bool settled = false;
  while (model.iterations < max_iterations) {
    ++model.iterations;
    update_centroids(points, model.labels, model.centroids);
    for (std::size_t i = 0; i < points.size(); ++i) next[i] = nearest_centroid(points[i], model.centroids);
    model.inertia_history.push_back(wcss(points, next, model.centroids));
    if (next == model.labels) {
      settled = true;
      break;
    }
    model.labels.swap(next);
  }
  if (!settled) update_centroids(points, model.labels, model.centroids);
  model.inertia = wcss(points, model.labels, model.centroids);
  return model;
}

}  // namespace

std::size_t count_distinct(const std::vector<Vector>& points) {
  std::vector<const Vector*> sorted;
  sorted.reserve(points.size());
  for (const auto& p : points) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](const Vector* a, const Vector* b) { return *a < *b; });
  return static_cast<std::size_t>(
      std::unique(sorted.begin(), sorted.end(), [](const Vector* a, const Vector* b) { return *a == *b; }) -
      sorted.begin());
}

KMeansModel kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                   const KMeansOptions& options) {
  if (k < 2) throw InvalidArgument("k-means needs k >= 2");
  if (points.empty()) throw InsufficientPoints("k-means on an empty point set");
  const std::size_t dim = points.front().size();
  for (const auto& p : points) require_dim(p, dim, "k-means point");
  if (count_distinct(points) < k)
    throw InsufficientPoints("fewer distinct points than clusters (k=" + std::to_string(k) + ")");

  std::mt19937_64 rng(seed);
  KMeansModel best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, options.restarts); ++r) {
    KMeansModel candidate = lloyd(points, k, rng, options.max_iterations);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

SilhouetteReport silhouette(const std::vector<Vector>& points, const std::vector<std::size_t>& labels) {
  if (points.size() != labels.size()) throw InvalidArgument("silhouette: points and labels differ in length");
  // Compact label ids to 0..c-1.
  std::map<std::size_t, std::size_t> ids;
  for (const std::size_t l : labels) ids.emplace(l, ids.size());
  if (ids.size() < 2) throw InvalidArgument("silhouette needs at least two clusters");
  const std::size_t c = ids.size();
  std::vector<std::size_t> label(points.size());
  std::vector<double> size(c, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    label[i] = ids.at(labels[i]);
    size[label[i]] += 1.0;
  }

  // sums[i * c + j]: total distance from point i to cluster j.
  const std::size_t n = points.size();
  std::vector<double> sums(n * c, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(points[i], points[j]);
      sums[i * c + label[j]] += d;
      sums[j * c + label[i]] += d;
    }
  }

  SilhouetteReport report;
  report.per_point.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = label[i];
    double s = 0.0;
    if (size[own] > 1.0) {
      const double a = sums[i * c + own] / (size[own] - 1.0);
      double b = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < c; ++j)
        if (j != own) b = std::min(b, sums[i * c + j] / size[j]);
      const double denom = std::max(a, b);
      s = denom > 0.0 ? (b - a) / denom : 0.0;
    }
    report.per_point[i] = s;
    total += s;
  }
  report.mean_score = total / static_cast<double>(n);
  return report;
}

std::vector<Vector> find_clusters(const std::vector<Vector>& points, std::size_t max_k,
                                  std::uint64_t seed, const KMeansOptions& options) {
  if (max_k < 2) throw InvalidArgument("max_k must be at least 2");
  if (points.empty()) return {};
  const std::size_t distinct = count_distinct(points);
  if (distinct < 2) return {points.front()};

  const std::size_t upper = std::min(max_k, distinct);
  std::vector<Vector> best_centroids;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 2; m <= upper; ++m) {
    KMeansModel model = kmeans(points, m, derive_seed(seed, {m}), options);
    const double score = silhouette(points, model.labels).mean_score;
    if (score > best_score) {
      best_score = score;
      best_centroids = std::move(model.centroids);
    }
  }
  return best_centroids;
}

}  // namespace vsp
