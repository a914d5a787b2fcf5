#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vsp/linear_policy.hpp"

using vsp::LinearSubpolicy;
using vsp::Matrix;
using vsp::TrainConfig;
using vsp::Vector;

namespace {

LinearSubpolicy make_policy(std::size_t rows, std::size_t cols, std::vector<double> w, Vector b, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(rows, cols);
  m.data = std::move(w);
  return LinearSubpolicy(m, std::move(b), Vector(rows, lo), Vector(rows, hi));
}

struct LinearProblem {
  oracle::Affine truth;
  std::vector<Vector> states;
  std::vector<Vector> actions;
};

LinearProblem random_problem(std::size_t n, std::size_t k, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  LinearProblem p;
  p.truth.W.assign(k, Vector(n));
  p.truth.b.assign(k, 0.0);
  for (auto& row : p.truth.W)
    for (auto& w : row) w = coef(rng);
  for (auto& b : p.truth.b) b = coef(rng);
  p.states = oracle::uniform_points(samples, n, rng, -1.0, 1.0);
  for (const auto& s : p.states) {
    Vector a(p.truth.b);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < n; ++c) a[r] += p.truth.W[r][c] * s[c];
    p.actions.push_back(a);
  }
  return p;
}

}  // namespace

TEST(LinearSubpolicy, ZeroWeightsReturnBias) {
  const auto p = make_policy(1, 3, {0, 0, 0}, {0.5});
  EXPECT_EQ(p.predict(Vector{1.0, -2.0, 3.0}), (Vector{0.5}));
  EXPECT_EQ(p.predict(Vector{0.0, 0.0, 0.0}), (Vector{0.5}));
}

TEST(LinearSubpolicy, TableThreeFunctionsByHand) {
  // F = -8.972 x + 30.034 v - 6.660 at (-0.88, 0.002)
  const double raw1 = -8.972 * -0.88 + 30.034 * 0.002 - 6.660;
  EXPECT_NEAR(raw1, 1.295428, 1e-12);
  const auto p1 = make_policy(1, 2, {-8.972, 30.034}, {-6.660});
  EXPECT_NEAR(p1.predict_unclipped(Vector{-0.88, 0.002})[0], raw1, 1e-12);
  EXPECT_EQ(p1.predict(Vector{-0.88, 0.002})[0], 1.0);

  // F = -1.846 x + 39.945 v - 1.567 at (-0.573, 0)
  const auto p2 = make_policy(1, 2, {-1.846, 39.945}, {-1.567});
  EXPECT_NEAR(p2.predict(Vector{-0.573, 0.0})[0], -0.509242, 1e-12);
}

TEST(LinearSubpolicy, ShapeAndBoundValidation) {
  EXPECT_THROW(make_policy(2, 2, {1, 2, 3, 4}, {0.0}), vsp::DimensionMismatch);
  EXPECT_THROW(make_policy(1, 2, {1, 2}, {0.0}, 1.0, 1.0), vsp::InvalidArgument);
  const auto p = make_policy(1, 2, {1, 2}, {0.0});
  EXPECT_THROW(p.predict(Vector{1.0}), vsp::DimensionMismatch);
}

TEST(LinearSubpolicy, PredictStaysWithinBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  Matrix w(3, 4);
  for (auto& x : w.data) x = u(rng);
  const LinearSubpolicy p(w, {u(rng), u(rng), u(rng)}, {-1.0, -0.5, 0.0}, {1.0, 0.5, 2.0});
  for (const auto& s : oracle::uniform_points(1000, 4, rng, -10.0, 10.0)) {
    const Vector a = p.predict(s);
    for (std::size_t k = 0; k < 3; ++k) {
      ASSERT_GE(a[k], p.action_low()[k]);
      ASSERT_LE(a[k], p.action_high()[k]);
    }
  }
}

TEST(LinearSubpolicy, ArbitraryInitialisation) {
  const auto p = LinearSubpolicy::arbitrary(5, {-1.0, -1.0}, {1.0, 1.0}, 42);
  EXPECT_EQ(p.state_dim(), 5u);
  EXPECT_EQ(p.action_dim(), 2u);
  for (double w : p.weights().data) {
    EXPECT_GE(w, -0.01);
    EXPECT_LE(w, 0.01);
  }
  EXPECT_EQ(p.biases(), (Vector{0.0, 0.0}));
  EXPECT_EQ(p, LinearSubpolicy::arbitrary(5, {-1.0, -1.0}, {1.0, 1.0}, 42));
  EXPECT_NE(p, LinearSubpolicy::arbitrary(5, {-1.0, -1.0}, {1.0, 1.0}, 43));
}

TEST(MseGradient, MatchesCentralDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto prob = random_problem(4, 3, 37, seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Matrix w(3, 4);
    for (auto& x : w.data) x = u(rng);
    Vector b{u(rng), u(rng), u(rng)};
    const LinearSubpolicy p(w, b, Vector(3, -1.0), Vector(3, 1.0));
    const auto grad = vsp::mse_gradient(p, prob.states, prob.actions);

    Vector theta(w.data);
    theta.insert(theta.end(), b.begin(), b.end());
    const auto loss_at = [&](const oracle::Vec& t) {
      Matrix wt(3, 4);
      wt.data.assign(t.begin(), t.begin() + 12);
      LinearSubpolicy q(wt, Vector(t.begin() + 12, t.end()), Vector(3, -1.0), Vector(3, 1.0));
      return vsp::mse_loss(q, prob.states, prob.actions);
    };
    const auto numeric = oracle::central_difference(loss_at, theta, 1e-6);
    Vector analytic(grad.weights.data);
    analytic.insert(analytic.end(), grad.biases.begin(), grad.biases.end());
    for (std::size_t i = 0; i < theta.size(); ++i) {
      const double scale = std::max(std::abs(numeric[i]), 1e-3);
      EXPECT_LE(std::abs(analytic[i] - numeric[i]) / scale, 1e-5) << "seed " << seed << " param " << i;
    }
  }
}

TEST(MseLoss, UsesUnclippedOutput) {
  const auto p = make_policy(1, 1, {10.0}, {0.0});
  // Unclipped output is 10, target 1: squared error 81 even though predict clips to 1.
  EXPECT_DOUBLE_EQ(vsp::mse_loss(p, {{1.0}}, {{1.0}}), 81.0);
}

TEST(Train, RecoversOneDimensionalMap) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vector> s, a;
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng);
    s.push_back({x});
    a.push_back({2.0 * x + 1.0});
  }
  const auto ls = oracle::least_squares(s, a);
  EXPECT_NEAR(ls.W[0][0], 2.0, 1e-9);
  EXPECT_NEAR(ls.b[0], 1.0, 1e-9);

  const auto init = LinearSubpolicy::arbitrary(1, {-5.0}, {5.0}, 0);
  TrainConfig cfg;
  cfg.n_epochs = 1000;
  cfg.min_delta = 0.0;
  cfg.patience = 50;
  const auto res = vsp::train(init, s, a, cfg);
  EXPECT_NEAR(res.policy.weights()(0, 0), ls.W[0][0], 1e-3);
  EXPECT_NEAR(res.policy.biases()[0], ls.b[0], 1e-3);
}

TEST(Train, ConstantZeroTargets) {
  std::mt19937_64 rng(2);
  const auto s = oracle::uniform_points(300, 3, rng, -1.0, 1.0);
  const std::vector<Vector> a(s.size(), Vector{0.0});
  const auto init = LinearSubpolicy::arbitrary(3, {-1.0}, {1.0}, 9);
  const auto res = vsp::train(init, s, a, TrainConfig{});
  EXPECT_LT(res.report.final_mean_loss, 1e-6);
  for (double w : res.policy.weights().data) EXPECT_NEAR(w, 0.0, 1e-2);
  EXPECT_NEAR(res.policy.biases()[0], 0.0, 1e-2);
}

TEST(Train, RandomFiveToTwoMap) {
  const auto prob = random_problem(5, 2, 2000, 77);
  const auto init = LinearSubpolicy::arbitrary(5, Vector(2, -10.0), Vector(2, 10.0), 0);
  const auto res = vsp::train(init, prob.states, prob.actions, TrainConfig{});
  EXPECT_LE(res.report.final_mean_loss, 1e-4);
  const auto ls = oracle::least_squares(prob.states, prob.actions);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(res.policy.weights()(r, c), ls.W[r][c], 1e-2);
    EXPECT_NEAR(res.policy.biases()[r], ls.b[r], 1e-2);
  }
}

TEST(Train, ReportIsConsistent) {
  const auto prob = random_problem(3, 1, 256, 5);
  const auto init = LinearSubpolicy::arbitrary(3, {-10.0}, {10.0}, 1);
  TrainConfig cfg;
  cfg.n_epochs = 40;
  const auto res = vsp::train(init, prob.states, prob.actions, cfg);
  EXPECT_LE(res.report.epochs_run, cfg.n_epochs);
  EXPECT_EQ(res.report.loss_history.size(), res.report.epochs_run);
  EXPECT_DOUBLE_EQ(res.report.final_mean_loss, vsp::mse_loss(res.policy, prob.states, prob.actions));
}

TEST(Train, EarlyStoppingTriggersOnPlateau) {
  const auto prob = random_problem(2, 1, 200, 6);
  const auto init = LinearSubpolicy::arbitrary(2, {-10.0}, {10.0}, 1);
  TrainConfig cfg;
  cfg.n_epochs = 5000;
  cfg.patience = 3;
  cfg.min_delta = 1e-3;
  const auto res = vsp::train(init, prob.states, prob.actions, cfg);
  EXPECT_TRUE(res.report.stopped_early);
  EXPECT_LT(res.report.epochs_run, cfg.n_epochs);
  // The last `patience` epochs failed to beat the best loss by min_delta.
  const auto& h = res.report.loss_history;
  ASSERT_GT(h.size(), cfg.patience);
  double best_before = h.front();
  for (std::size_t i = 1; i + cfg.patience < h.size(); ++i) best_before = std::min(best_before, h[i]);
  for (std::size_t i = h.size() - cfg.patience; i < h.size(); ++i) EXPECT_GE(h[i], best_before - cfg.min_delta);
}

TEST(Train, LossNonIncreasingAtSmallLearningRate) {
  const auto prob = random_problem(3, 2, 256, 8);
  const auto init = LinearSubpolicy::arbitrary(3, Vector(2, -10.0), Vector(2, 10.0), 2);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 256;  // full batch
  cfg.n_epochs = 300;
  cfg.min_delta = 0.0;
  cfg.patience = 300;
  const auto res = vsp::train(init, prob.states, prob.actions, cfg);
  const auto& h = res.report.loss_history;
  for (std::size_t i = 1; i < h.size(); ++i) EXPECT_LE(h[i], h[i - 1] + 1e-15) << "epoch " << i;
}

TEST(Train, Deterministic) {
  const auto prob = random_problem(4, 2, 300, 9);
  const auto init = LinearSubpolicy::arbitrary(4, Vector(2, -1.0), Vector(2, 1.0), 3);
  TrainConfig cfg;
  cfg.seed = 123;
  const auto a = vsp::train(init, prob.states, prob.actions, cfg);
  const auto b = vsp::train(init, prob.states, prob.actions, cfg);
  EXPECT_EQ(a.policy, b.policy);
  EXPECT_EQ(a.report.loss_history, b.report.loss_history);
}

TEST(Train, RejectsBadInput) {
  const auto init = LinearSubpolicy::arbitrary(2, {-1.0}, {1.0}, 0);
  EXPECT_THROW(vsp::train(init, {}, {}, TrainConfig{}), vsp::InvalidArgument);
  EXPECT_THROW(vsp::train(init, {{0.0, 0.0}}, {}, TrainConfig{}), vsp::InvalidArgument);
  TrainConfig bad;
  bad.patience = 0;
  EXPECT_THROW(vsp::train(init, {{0.0, 0.0}}, {{0.0}}, bad), vsp::InvalidArgument);
  bad = TrainConfig{};
  bad.min_delta = -1.0;
  EXPECT_THROW(bad.validate(), vsp::InvalidArgument);
}
