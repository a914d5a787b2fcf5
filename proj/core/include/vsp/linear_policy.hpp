#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vsp/types.hpp"

namespace vsp {

// Row-major dense matrix, just enough for affine maps.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t batch_size = 64;
  std::size_t n_epochs = 200;
  std::size_t patience = 10;
  double min_delta = 1e-5;
  std::uint64_t seed = 0;

  // Adam moment constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct TrainingReport {
  double final_mean_loss = 0.0;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
  // Full-dataset loss after each epoch.
  std::vector<double> loss_history;
};

// a = clip(W s + b, low, high), W shaped (action_dim x state_dim).
class LinearSubpolicy {
 public:
  LinearSubpolicy(Matrix weights, Vector biases, Vector action_low, Vector action_high);

  // Weights uniform in [-0.01, 0.01], zero bias.
  static LinearSubpolicy arbitrary(std::size_t state_dim, Vector action_low, Vector action_high,
                                   std::uint64_t seed);

  std::size_t state_dim() const noexcept { return weights_.cols; }
  std::size_t action_dim() const noexcept { return weights_.rows; }
  const Matrix& weights() const noexcept { return weights_; }
  const Vector& biases() const noexcept { return biases_; }
  const Vector& action_low() const noexcept { return low_; }
  const Vector& action_high() const noexcept { return high_; }

  Vector predict(ConstVectorView state) const;
  // Linear output before clipping; this is what training fits.
  Vector predict_unclipped(ConstVectorView state) const;

  void set_parameters(Matrix weights, Vector biases);

  friend bool operator==(const LinearSubpolicy&, const LinearSubpolicy&) = default;

 private:
  Matrix weights_;
  Vector biases_;
  Vector low_;
  Vector high_;
};

// Mean over samples of the squared error summed over action components,
// divided by action_dim (i.e. the elementwise MSE), on the unclipped output.
double mse_loss(const LinearSubpolicy& policy, const std::vector<Vector>& states,
                const std::vector<Vector>& actions);

struct LossGradient {
  Matrix weights;
  Vector biases;
};

// Analytic gradient of mse_loss with respect to (W, b) over the given samples.
LossGradient mse_gradient(const LinearSubpolicy& policy, const std::vector<Vector>& states,
                          const std::vector<Vector>& actions);

struct TrainResult {
  LinearSubpolicy policy;
  TrainingReport report;
};

// Minibatch Adam on the elementwise MSE with early stopping on the
// full-dataset loss.
TrainResult train(const LinearSubpolicy& initial, const std::vector<Vector>& states,
                  const std::vector<Vector>& actions, const TrainConfig& cfg);

}  // namespace vsp
