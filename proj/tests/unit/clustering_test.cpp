#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vsp/clustering.hpp"
#include "vsp/seeding.hpp"

using vsp::Vector;

namespace {

std::vector<double> sorted_first_coordinates(const std::vector<Vector>& cs) {
  std::vector<double> out;
  for (const auto& c : cs) out.push_back(c[0]);
  std::sort(out.begin(), out.end());
  return out;
}

// Best WCSS over every split of sorted 1-D points into a prefix and suffix.
double best_two_partition_wcss(std::vector<double> xs, double* left_mean, double* right_mean) {
  std::sort(xs.begin(), xs.end());
  double best = INFINITY;
  for (std::size_t cut = 1; cut < xs.size(); ++cut) {
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < cut; ++i) m1 += xs[i];
    for (std::size_t i = cut; i < xs.size(); ++i) m2 += xs[i];
    m1 /= double(cut);
    m2 /= double(xs.size() - cut);
    double w = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) w += std::pow(xs[i] - (i < cut ? m1 : m2), 2);
    if (w < best) {
      best = w;
      *left_mean = m1;
      *right_mean = m2;
    }
  }
  return best;
}

}  // namespace

TEST(KMeans, OneDimensionalTwoClusters) {
  const std::vector<Vector> pts{{0.0}, {0.1}, {10.0}, {10.1}};
  double l = 0, r = 0;
  const double wcss = best_two_partition_wcss({0.0, 0.1, 10.0, 10.1}, &l, &r);
  const auto m = vsp::kmeans(pts, 2, 0);
  const auto c = sorted_first_coordinates(m.centroids);
  EXPECT_NEAR(c[0], l, 1e-12);
  EXPECT_NEAR(c[1], r, 1e-12);
  EXPECT_NEAR(c[0], 0.05, 1e-12);
  EXPECT_NEAR(c[1], 10.05, 1e-12);
  EXPECT_NEAR(m.inertia, wcss, 1e-12);
}

TEST(KMeans, KEqualsDistinctPoints) {
  const std::vector<Vector> pts{{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {0.0, 3.0}};
  const auto m = vsp::kmeans(pts, 3, 4);
  ASSERT_EQ(m.centroids.size(), 3u);
  EXPECT_DOUBLE_EQ(m.inertia, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(m.centroids[m.labels[i]], pts[i]);
}

TEST(KMeans, TwoGaussianBlobs) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<Vector> pts;
  Vector mean_a{0, 0}, mean_b{0, 0};
  for (int i = 0; i < 100; ++i) {
    pts.push_back({g(rng), g(rng)});
    mean_a[0] += pts.back()[0] / 100;
    mean_a[1] += pts.back()[1] / 100;
  }
  for (int i = 0; i < 100; ++i) {
    pts.push_back({5 + g(rng), 5 + g(rng)});
    mean_b[0] += pts.back()[0] / 100;
    mean_b[1] += pts.back()[1] / 100;
  }
  const auto m = vsp::kmeans(pts, 2, 3);
  ASSERT_EQ(m.centroids.size(), 2u);
  auto cs = m.centroids;
  std::sort(cs.begin(), cs.end());
  EXPECT_NEAR(cs[0][0], mean_a[0], 1e-12);
  EXPECT_NEAR(cs[0][1], mean_a[1], 1e-12);
  EXPECT_NEAR(cs[1][0], mean_b[0], 1e-12);
  EXPECT_NEAR(cs[1][1], mean_b[1], 1e-12);
  EXPECT_LT(std::hypot(cs[0][0], cs[0][1]), 0.1);
  EXPECT_LT(std::hypot(cs[1][0] - 5, cs[1][1] - 5), 0.1);
}

TEST(KMeans, CentroidsAreMeansAndNoClusterEmpty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto pts = oracle::uniform_points(60, 3, rng);
    const std::size_t k = 2 + seed % 6;
    const auto m = vsp::kmeans(pts, k, seed);
    ASSERT_EQ(m.centroids.size(), k);
    std::vector<Vector> sum(k, Vector(3, 0.0));
    std::vector<std::size_t> count(k, 0);
    double wcss = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ASSERT_LT(m.labels[i], k);
      ++count[m.labels[i]];
      for (std::size_t d = 0; d < 3; ++d) sum[m.labels[i]][d] += pts[i][d];
      wcss += oracle::sq_dist(pts[i], m.centroids[m.labels[i]]);
      // Converged assignment is to the nearest centroid.
      ASSERT_EQ(m.labels[i], oracle::brute_nearest(m.centroids, pts[i]));
    }
    for (std::size_t c = 0; c < k; ++c) {
      ASSERT_GT(count[c], 0u);
      for (std::size_t d = 0; d < 3; ++d) EXPECT_NEAR(m.centroids[c][d], sum[c][d] / double(count[c]), 1e-12);
    }
    EXPECT_NEAR(m.inertia, wcss, 1e-9);
  }
}

TEST(KMeans, InertiaNeverIncreases) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed + 50);
    const auto pts = oracle::uniform_points(200, 2, rng);
    const auto m = vsp::kmeans(pts, 6, seed);
    const auto& h = m.inertia_history;
    ASSERT_FALSE(h.empty());
    for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] * (1 + 1e-12)) << "seed " << seed;
  }
}

TEST(KMeans, InsufficientDistinctPoints) {
  const std::vector<Vector> pts{{1.0}, {1.0}, {2.0}, {2.0}};
  EXPECT_THROW(vsp::kmeans(pts, 3, 0), vsp::InsufficientPoints);
  EXPECT_NO_THROW(vsp::kmeans(pts, 2, 0));
}

TEST(KMeans, Deterministic) {
  std::mt19937_64 rng(8);
  const auto pts = oracle::uniform_points(150, 4, rng);
  const auto a = vsp::kmeans(pts, 5, 99);
  const auto b = vsp::kmeans(pts, 5, 99);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(Silhouette, HandComputedTwoClusters) {
  const std::vector<Vector> pts{{0.0}, {0.1}, {10.0}, {10.1}};
  const auto rep = vsp::silhouette(pts, {0, 0, 1, 1});
  // a(0) = 0.1, b(0) = (10 + 10.1) / 2
  EXPECT_NEAR(rep.per_point[0], (10.05 - 0.1) / 10.05, 1e-12);
  EXPECT_NEAR(rep.per_point[0], 0.990050, 1e-6);
}

TEST(Silhouette, OverlappingClustersScoreNearZero) {
  std::mt19937_64 rng(4);
  const auto half = oracle::uniform_points(100, 2, rng);
  std::vector<Vector> pts(half);
  pts.insert(pts.end(), half.begin(), half.end());
  std::vector<std::size_t> labels(200, 0);
  std::fill(labels.begin() + 100, labels.end(), 1);
  const auto rep = vsp::silhouette(pts, labels);
  EXPECT_NEAR(rep.mean_score, 0.0, 0.02);
}

TEST(Silhouette, MatchesDirectFormulaOnRandomLabelings) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t n = 5 + seed * 6;
    const auto pts = oracle::uniform_points(n, 3, rng);
    const std::size_t k = 2 + seed % 5;
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = 10 * (i < k ? i : rng() % k);  // sparse ids
    const auto rep = vsp::silhouette(pts, labels);
    const auto want = oracle::silhouette_direct(pts, labels);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(rep.per_point[i], want[i], 1e-9);
      EXPECT_GE(rep.per_point[i], -1.0);
      EXPECT_LE(rep.per_point[i], 1.0);
      mean += rep.per_point[i] / double(n);
    }
    EXPECT_NEAR(rep.mean_score, mean, 1e-12);
  }
}

TEST(Silhouette, SingletonScoresZero) {
  const auto rep = vsp::silhouette({{0.0}, {1.0}, {1.2}}, {0, 1, 1});
  EXPECT_EQ(rep.per_point[0], 0.0);
  EXPECT_GT(rep.per_point[1], 0.0);
}

TEST(Silhouette, RejectsSingleCluster) {
  EXPECT_THROW(vsp::silhouette({{0.0}, {1.0}}, {3, 3}), vsp::InvalidArgument);
  EXPECT_THROW(vsp::silhouette({{0.0}, {1.0}}, {0}), vsp::InvalidArgument);
}

TEST(FindClusters, ThreeSeparatedBlobs) {
  std::mt19937_64 rng(31);
  std::vector<oracle::Vec> centers;
  const auto pts = oracle::blobs(3, 40, 2, 0.1, 10.0, rng, &centers);
  const auto cs = vsp::find_clusters(pts, 8, 0);
  ASSERT_EQ(cs.size(), 3u);
  for (const auto& c : centers) {
    double best = INFINITY;
    for (const auto& got : cs) best = std::min(best, std::sqrt(oracle::sq_dist(c, got)));
    EXPECT_LT(best, 0.1);
  }
}

TEST(FindClusters, ScoreOfChosenKIsMaximal) {
  // Recompute every candidate's mean silhouette with the direct oracle.
  std::mt19937_64 rng(32);
  const auto pts = oracle::blobs(4, 25, 2, 0.1, 10.0, rng);
  const std::size_t max_k = 6;
  const std::uint64_t seed = 5;
  const auto chosen = vsp::find_clusters(pts, max_k, seed);
  double best = -2.0;
  std::size_t best_k = 0;
  for (std::size_t m = 2; m <= max_k; ++m) {
    const auto model = vsp::kmeans(pts, m, vsp::derive_seed(seed, {m}));
    const auto s = oracle::silhouette_direct(pts, model.labels);
    double mean = 0.0;
    for (double v : s) mean += v / double(s.size());
    if (mean > best + 1e-12) {
      best = mean;
      best_k = m;
    }
  }
  EXPECT_EQ(best_k, 4u);
  EXPECT_EQ(chosen.size(), best_k);
}

TEST(FindClusters, ExactlyTwoDistinctPoints) {
  std::vector<Vector> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({1.0, 2.0});
  for (int i = 0; i < 3; ++i) pts.push_back({4.0, -1.0});
  auto cs = vsp::find_clusters(pts, 8, 0);
  std::sort(cs.begin(), cs.end());
  ASSERT_EQ(cs.size(), 2u);
  EXPECT_EQ(cs[0], (Vector{1.0, 2.0}));
  EXPECT_EQ(cs[1], (Vector{4.0, -1.0}));
}

TEST(FindClusters, OnlyCandidateK) {
  std::mt19937_64 rng(33);
  const auto pts = oracle::blobs(2, 30, 3, 0.1, 10.0, rng);
  EXPECT_EQ(vsp::find_clusters(pts, 2, 0).size(), 2u);
}

TEST(FindClusters, DegenerateInputs) {
  EXPECT_TRUE(vsp::find_clusters({}, 8, 0).empty());
  const auto one = vsp::find_clusters({{0.5, 0.5}, {0.5, 0.5}}, 8, 0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (Vector{0.5, 0.5}));
}

TEST(FindClusters, CountWithinBoundsAndDeterministic) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    const auto pts = oracle::uniform_points(80, 2, rng);
    const auto a = vsp::find_clusters(pts, 5, seed);
    EXPECT_GE(a.size(), 2u);
    EXPECT_LE(a.size(), 5u);
    for (const auto& c : a) EXPECT_EQ(c.size(), 2u);
    EXPECT_EQ(a, vsp::find_clusters(pts, 5, seed));
  }
}

TEST(FindClusters, MaxKCappedByDistinctPoints) {
  const std::vector<Vector> pts{{0.0}, {0.0}, {1.0}, {5.0}};
  const auto cs = vsp::find_clusters(pts, 8, 0);
  EXPECT_GE(cs.size(), 2u);
  EXPECT_LE(cs.size(), 3u);
}
