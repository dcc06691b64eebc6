#pragma once

// Dense feed-forward regressor with a two-headed Gaussian output.
//
// Hidden layers use ReLU. The output has a mean head squashed by a scaled tanh,
// mean = s * tanh(z / s), and a variance head, variance = softplus(z) + floor.
// Training minimizes the Gaussian negative log-likelihood with Adam.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace surge {

struct Architecture {
  int input_dim = 5;
  std::vector<int> hidden_dims = {256, 256, 256};
  double tanh_scale = 3.0;
  double variance_floor = 1e-6;

  bool operator==(const Architecture&) const = default;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;   // out
};

struct GaussianHead {
  Eigen::RowVectorXd mean_weights;
  double mean_bias = 0.0;
  Eigen::RowVectorXd var_weights;
  double var_bias = 0.0;
};

// Weights of one network. Gradients and Adam moments reuse the same layout.
struct NetworkParams {
  Architecture arch;
  std::vector<DenseLayer> layers;
  GaussianHead head;

  std::size_t parameter_count() const;
  bool all_finite() const;
  bool same_shape(const NetworkParams& other) const;
};

// Every parameter block as a flat mutable view, in a fixed order:
// layer weights and biases front to back, then mean_w, mean_b, var_w, var_b.
std::vector<std::span<double>> parameter_blocks(NetworkParams& params);
std::vector<std::span<const double>> parameter_blocks(const NetworkParams& params);

// Same shape as `like`, every value zero.
NetworkParams zeros_like(const NetworkParams& like);

struct GaussianPrediction {
  double mean = 0.0;      // normalized target units
  double variance = 1.0;  // normalized target units squared
};

// Column-major batch of training pairs: x is input_dim x n, one sample per column.
struct Batch {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;

  Eigen::Index size() const { return y.size(); }
};

struct TrainConfig {
  double base_lr = 1e-3;
  double decay_factor = 0.99;
  int decay_start_epoch = 10;
  int epochs = 200;
  int batch_size = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  NetworkParams first_moment;
  NetworkParams second_moment;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_params(const NetworkParams& params);
};

// He initialization: weights ~ N(0, 2 / fan_in), biases zero. Deterministic in `seed`.
NetworkParams init_network(const Architecture& arch, std::uint64_t seed);

GaussianPrediction forward(const NetworkParams& params, std::span<const double> x);

// Batched forward; returns per-sample means and variances.
struct BatchPrediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};
BatchPrediction forward_batch(const NetworkParams& params, const Eigen::MatrixXd& x);

// 0.5 * ln(variance) + (y - mean)^2 / (2 * variance). The 0.5 * ln(2*pi) constant is dropped.
double gaussian_nll(const GaussianPrediction& pred, double y);

// Mean NLL over the batch.
double batch_loss(const NetworkParams& params, const Batch& batch);

// Exact gradient of the mean batch NLL. ReLU'(0) is taken as 0.
NetworkParams backward(const NetworkParams& params, const Batch& batch);

// Same as backward, also returning the batch loss from the shared forward pass.
NetworkParams backward(const NetworkParams& params, const Batch& batch, double& loss);

// Adam with bias correction on flat buffers; `step` is the 1-based step count after incrementing.
void adam_update(std::span<double> params, std::span<double> first_moment, std::span<double> second_moment,
                 std::span<const double> grads, std::uint64_t step, double beta1, double beta2, double epsilon,
                 double lr);

// In-place Adam update of every parameter block; increments state.step_count.
void adam_step(NetworkParams& params, AdamState& state, const NetworkParams& grads, double lr);

// base_lr through decay_start_epoch, then base_lr * decay^(epoch - decay_start_epoch). Epochs are 1-based.
double lr_schedule(int epoch, const TrainConfig& config);

struct TrainResult {
  NetworkParams params;
  std::vector<double> history;  // mean per-sample NLL of each epoch
};

// Mini-batch training from `initial`; a fresh Adam state is created for the run.
TrainResult train(const NetworkParams& initial, const Batch& dataset, const TrainConfig& config);

}  // namespace surge
