#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vsp/types.hpp"

namespace vsp {

struct KMeansModel {
  std::vector<Vector> centroids;
  std::vector<std::size_t> labels;
  double inertia = 0.0;  // within-cluster sum of squared distances
  std::size_t iterations = 0;
  // Inertia after every assignment step of the winning restart.
  std::vector<double> inertia_history;
};

struct KMeansOptions {
  std::size_t max_iterations = 300;
  std::size_t restarts = 1;
};

// Lloyd's algorithm with k-means++ seeding. Throws InsufficientPoints when the
// input has fewer than k distinct points.
KMeansModel kmeans(const std::vector<Vector>& points, std::size_t k, std::uint64_t seed,
                   const KMeansOptions& options = {});

struct SilhouetteReport {
  std::vector<double> per_point;
  double mean_score = 0.0;
};

// Silhouette coefficient per point. Labels are arbitrary non-negative ids; at
// least two distinct ids must be present. Points in singleton clusters score 0.
SilhouetteReport silhouette(const std::vector<Vector>& points, const std::vector<std::size_t>& labels);

std::size_t count_distinct(const std::vector<Vector>& points);

// Fits k-means for every k in [2, max_k] (capped at the distinct point count)
// and returns the centroids of the model with the highest mean silhouette.
// Ties go to the smaller k. Fewer than two distinct points yields that single
// point as the only centroid; an empty input yields no centroids.
std::vector<Vector> find_clusters(const std::vector<Vector>& points, std::size_t max_k,
                                  std::uint64_t seed, const KMeansOptions& options = {});

}  // namespace vsp
