#include "vsp/linear_policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace vsp {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (n_epochs == 0) throw InvalidArgument("n_epochs must be positive");
  if (patience == 0) throw InvalidArgument("patience must be at least 1");
  if (!(min_delta >= 0.0)) throw InvalidArgument("min_delta must be non-negative");
}

LinearSubpolicy::LinearSubpolicy(Matrix weights, Vector biases, Vector action_low, Vector action_high)
    : weights_(std::move(weights)),
      biases_(std::move(biases)),
      low_(std::move(action_low)),
      high_(std::move(action_high)) {
  if (weights_.data.size() != weights_.rows * weights_.cols)
    throw InvalidArgument("weight matrix storage does not match its shape");
  if (weights_.rows == 0 || weights_.cols == 0) throw InvalidArgument("empty weight matrix");
  require_dim(biases_, weights_.rows, "subpolicy biases");
  require_dim(low_, weights_.rows, "subpolicy action_low");
  require_dim(high_, weights_.rows, "subpolicy action_high");
  for (std::size_t k = 0; k < low_.size(); ++k)
    if (!(low_[k] < high_[k])) throw InvalidArgument("action_low must be below action_high");
}

LinearSubpolicy LinearSubpolicy::arbitrary(std::size_t state_dim, Vector action_low,
                                           Vector action_high, std::uint64_t seed) {
  const std::size_t action_dim = action_low.size();
  Matrix w(action_dim, state_dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  for (double& v : w.data) v = init(rng);
  return LinearSubpolicy(std::move(w), Vector(action_dim, 0.0), std::move(action_low),
                         std::move(action_high));
}

Vector LinearSubpolicy::predict_unclipped(ConstVectorView state) const {
  require_dim(state, state_dim(), "subpolicy input");
  Vector out(biases_);
  for (std::size_t k = 0; k < weights_.rows; ++k)
    for (std::size_t i = 0; i < weights_.cols; ++i) out[k] += weights_(k, i) * state[i];
  return out;
}

Vector LinearSubpolicy::predict(ConstVectorView state) const {
  Vector out = predict_unclipped(state);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k], low_[k], high_[k]);
  return out;
}

void LinearSubpolicy::set_parameters(Matrix weights, Vector biases) {
  if (weights.rows != weights_.rows || weights.cols != weights_.cols)
    throw DimensionMismatch(weights_.rows * weights_.cols, weights.rows * weights.cols,
                            "subpolicy weights");
  require_dim(biases, weights_.rows, "subpolicy biases");
  weights_ = std::move(weights);
  biases_ = std::move(biases);
}

namespace {

void check_samples(const LinearSubpolicy& p, const std::vector<Vector>& states,
                   const std::vector<Vector>& actions) {
  if (states.empty()) throw InvalidArgument("training set is empty");
  if (states.size() != actions.size())
    throw InvalidArgument("states and actions differ in length");
  for (std::size_t i = 0; i < states.size(); ++i) {
    require_dim(states[i], p.state_dim(), "training state");
    require_dim(actions[i], p.action_dim(), "training action");
  }
}

// Contiguous copy of the samples plus the parameter block being optimized.
struct Problem {
  std::size_t n = 0;
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> x;
  std::vector<double> y;

  Problem(const std::vector<Vector>& states, const std::vector<Vector>& actions)
      : n(states.size()), in(states.front().size()), out(actions.front().size()) {
    x.reserve(n * in);
    y.reserve(n * out);
    for (const auto& s : states) x.insert(x.end(), s.begin(), s.end());
    for (const auto& a : actions) y.insert(y.end(), a.begin(), a.end());
  }

  // Residual r = W x_j + b - y_j for one sample, written into r.
  void residual(const Matrix& w, const Vector& b, std::size_t j, double* r) const {
    const double* xj = x.data() + j * in;
    const double* yj = y.data() + j * out;
    for (std::size_t k = 0; k < out; ++k) {
      double v = b[k];
      const double* wk = w.data.data() + k * in;
      for (std::size_t i = 0; i < in; ++i) v += wk[i] * xj[i];
      r[k] = v - yj[k];
    }
  }

  double loss(const Matrix& w, const Vector& b) const {
    std::vector<double> r(out);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      residual(w, b, j, r.data());
      for (const double v : r) total += v * v;
    }
    return total / static_cast<double>(n * out);
  }

  // Gradient of the mean elementwise squared error over samples[first, last).
  void gradient(const Matrix& w, const Vector& b, const std::uint32_t* idx, std::size_t count,
                Matrix& gw, Vector& gb) const {
    std::fill(gw.data.begin(), gw.data.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    std::vector<double> r(out);
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t j = idx[t];
      residual(w, b, j, r.data());
      const double* xj = x.data() + j * in;
      for (std::size_t k = 0; k < out; ++k) {
        gb[k] += r[k];
        double* gk = gw.data.data() + k * in;
        for (std::size_t i = 0; i < in; ++i) gk[i] += r[k] * xj[i];
      }
    }
    const double scale = 2.0 / static_cast<double>(count * out);
    for (double& v : gw.data) v *= scale;
    for (double& v : gb) v *= scale;
  }
};

}  // namespace

double mse_loss(const LinearSubpolicy& policy, const std::vector<Vector>& states,
                const std::vector<Vector>& actions) {
  check_samples(policy, states, actions);
  return Problem(states, actions).loss(policy.weights(), policy.biases());
}

LossGradient mse_gradient(const LinearSubpolicy& policy, const std::vector<Vector>& states,
                          const std::vector<Vector>& actions) {
  check_samples(policy, states, actions);
  const Problem problem(states, actions);
  std::vector<std::uint32_t> all(problem.n);
  std::iota(all.begin(), all.end(), 0U);
  LossGradient g{Matrix(policy.action_dim(), policy.state_dim()), Vector(policy.action_dim())};
  problem.gradient(policy.weights(), policy.biases(), all.data(), all.size(), g.weights, g.biases);
  return g;
}

TrainResult train(const LinearSubpolicy& initial, const std::vector<Vector>& states,
                  const std::vector<Vector>& actions, const TrainConfig& cfg) {
  cfg.validate();
  check_samples(initial, states, actions);
  const Problem problem(states, actions);

  Matrix w = initial.weights();
  Vector b = initial.biases();
  Matrix gw(w.rows, w.cols);
  Vector gb(b.size());
  std::vector<double> m_w(w.data.size(), 0.0), v_w(w.data.size(), 0.0);
  std::vector<double> m_b(b.size(), 0.0), v_b(b.size(), 0.0);

  std::vector<std::uint32_t> order(problem.n);
  std::iota(order.begin(), order.end(), 0U);
  std::mt19937_64 rng(cfg.seed);

  const auto adam = [&](std::vector<double>& param, const std::vector<double>& grad,
                        std::vector<double>& m, std::vector<double>& v, double lr_t) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      param[i] -= lr_t * m[i] / (std::sqrt(v[i]) + cfg.epsilon);
    }
  };

  TrainingReport report;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::uint64_t step = 0;
  double loss = problem.loss(w, b);

  for (std::size_t epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < problem.n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, problem.n - start);
      problem.gradient(w, b, order.data() + start, count, gw, gb);
      ++step;
      // Bias-corrected step size, folded into the learning rate.
      const double lr_t = cfg.learning_rate *
                          std::sqrt(1.0 - std::pow(cfg.beta2, static_cast<double>(step))) /
                          (1.0 - std::pow(cfg.beta1, static_cast<double>(step)));
      adam(w.data, gw.data, m_w, v_w, lr_t);
      adam(b, gb, m_b, v_b, lr_t);
    }

    loss = problem.loss(w, b);
    report.loss_history.push_back(loss);
    report.epochs_run = epoch + 1;
    if (loss < best - cfg.min_delta) {
      best = loss;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      report.stopped_early = true;
      break;
    }
  }

  report.final_mean_loss = loss;
  LinearSubpolicy trained = initial;
  trained.set_parameters(std::move(w), std::move(b));
  return TrainResult{std::move(trained), std::move(report)};
}

}  // namespace vsp
