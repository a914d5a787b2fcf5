#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = std::vector<double>;

inline std::vector<Vec> uniform_points(std::size_t n, std::size_t dim, std::mt19937_64& rng, double lo = 0.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Vec> out(n, Vec(dim));
  for (auto& p : out)
    for (auto& x : p) x = u(rng);
  return out;
}

inline double sq_dist(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Exhaustive nearest codeword, first minimum wins.
inline std::size_t brute_nearest(const std::vector<Vec>& codewords, const Vec& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < codewords.size(); ++i) {
    const double d = sq_dist(codewords[i], x);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// s(x) = (b - a) / max(a, b) evaluated literally, one point at a time.
inline std::vector<double> silhouette_direct(const std::vector<Vec>& pts, const std::vector<std::size_t>& labels) {
  const std::size_t n = pts.size();
  std::set<std::size_t> ids(labels.begin(), labels.end());
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t own = 0;
    for (std::size_t j = 0; j < n; ++j) own += labels[j] == labels[i];
    if (own <= 1) continue;
    double a = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) a += std::sqrt(sq_dist(pts[i], pts[j]));
    a /= static_cast<double>(own - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t id : ids) {
      if (id == labels[i]) continue;
      double sum = 0.0;
      std::size_t cnt = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (labels[j] == id) {
          sum += std::sqrt(sq_dist(pts[i], pts[j]));
          ++cnt;
        }
      b = std::min(b, sum / static_cast<double>(cnt));
    }
    const double m = std::max(a, b);
    s[i] = m > 0.0 ? (b - a) / m : 0.0;
  }
  return s;
}

struct Affine {
  std::vector<Vec> W;  // action_dim rows of state_dim
  Vec b;
};

// Ordinary least squares for a = W s + b via QR on the augmented design matrix.
inline Affine least_squares(const std::vector<Vec>& states, const std::vector<Vec>& actions) {
  const auto n = static_cast<Eigen::Index>(states.size());
  const auto d = static_cast<Eigen::Index>(states.front().size());
  const auto k = static_cast<Eigen::Index>(actions.front().size());
  Eigen::MatrixXd X(n, d + 1);
  Eigen::MatrixXd Y(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = states[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    X(i, d) = 1.0;
    for (Eigen::Index j = 0; j < k; ++j) Y(i, j) = actions[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::MatrixXd theta = X.colPivHouseholderQr().solve(Y);
  Affine out;
  out.W.assign(static_cast<std::size_t>(k), Vec(static_cast<std::size_t>(d)));
  out.b.assign(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index r = 0; r < k; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) out.W[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = theta(c, r);
    out.b[static_cast<std::size_t>(r)] = theta(d, r);
  }
  return out;
}

// Central difference of f at x along every coordinate.
inline Vec central_difference(const std::function<double(const Vec&)>& f, Vec x, double h) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double up = f(x);
    x[i] = orig - h;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

struct Layer {
  std::vector<Vec> W;  // out rows of in
  Vec b;
  int act = 0;         // 0 identity, 1 relu, 2 tanh
};

inline Vec mlp_direct(const std::vector<Layer>& layers, Vec x) {
  for (const auto& L : layers) {
    Vec y(L.b);
    for (std::size_t r = 0; r < L.W.size(); ++r)
      for (std::size_t c = 0; c < x.size(); ++c) y[r] += L.W[r][c] * x[c];
    for (auto& v : y) {
      if (L.act == 1) v = v > 0.0 ? v : 0.0;
      if (L.act == 2) v = std::tanh(v);
    }
    x = y;
  }
  return x;
}

// Transcription of Gymnasium's Continuous_MountainCarEnv.step.
struct GymMountainCar {
  double position = 0.0;
  double velocity = 0.0;

  struct Out {
    double reward;
    bool terminated;
  };

  Out step(double action) {
    const double min_action = -1.0, max_action = 1.0;
    const double min_position = -1.2, max_position = 0.6, max_speed = 0.07;
    const double goal_position = 0.45, goal_velocity = 0.0, power = 0.0015;
    const double force = std::min(std::max(action, min_action), max_action);
    velocity += force * power - 0.0025 * std::cos(3 * position);
    if (velocity > max_speed) velocity = max_speed;
    if (velocity < -max_speed) velocity = -max_speed;
    position += velocity;
    if (position > max_position) position = max_position;
    if (position < min_position) position = min_position;
    if (position == min_position && velocity < 0) velocity = 0;
    const bool terminated = position >= goal_position && velocity >= goal_velocity;
    double reward = 0;
    if (terminated) reward = 100.0;
    reward -= std::pow(action, 2) * 0.1;
    return {reward, terminated};
  }
};

// Isotropic Gaussian blobs, `per` points each, centers evenly spaced on a
// circle so that neighboring centers are exactly `sep` * sigma apart.
inline std::vector<Vec> blobs(std::size_t k, std::size_t per, std::size_t dim, double sigma, double sep,
                              std::mt19937_64& rng, std::vector<Vec>* centers = nullptr) {
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<Vec> out;
  std::vector<Vec> cs;
  for (std::size_t c = 0; c < k; ++c) {
    Vec center(dim, 0.0);
    const double ang = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(k);
    const double radius = sep * sigma / (2.0 * std::sin(M_PI / static_cast<double>(k)));
    center[0] = radius * std::cos(ang);
    if (dim > 1) center[1] = radius * std::sin(ang);
    cs.push_back(center);
    for (std::size_t i = 0; i < per; ++i) {
      Vec p(center);
      for (auto& x : p) x += g(rng);
      out.push_back(p);
    }
  }
  if (centers) *centers = cs;
  return out;
}

}  // namespace oracle
