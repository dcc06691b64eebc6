#include "surge/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "surge/errors.hpp"
#include "surge/random.hpp"

namespace surge {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void validate_arch(const Architecture& arch) {
  if (arch.input_dim <= 0) throw InvalidArgument("architecture: input_dim must be positive");
  if (arch.hidden_dims.empty()) throw InvalidArgument("architecture: at least one hidden layer is required");
  for (const int width : arch.hidden_dims) {
    if (width <= 0) throw InvalidArgument("architecture: zero-sized hidden layer");
  }
  if (!(arch.tanh_scale > 0.0)) throw InvalidArgument("architecture: tanh_scale must be positive");
  if (!(arch.variance_floor > 0.0)) throw InvalidArgument("architecture: variance_floor must be positive");
}

// Activations kept from the forward pass for reverse-mode differentiation.
struct Trace {
  std::vector<Eigen::MatrixXd> activations;  // activations[0] = input, activations[l+1] = relu(z_l)
  Eigen::RowVectorXd z_mean;
  Eigen::RowVectorXd z_var;
};

Trace run_forward(const NetworkParams& params, const Eigen::MatrixXd& x) {
  if (x.rows() != params.arch.input_dim) {
    throw ShapeError("forward: expected input of dimension " + std::to_string(params.arch.input_dim) + ", got " +
                     std::to_string(x.rows()));
  }
  Trace trace;
  trace.activations.reserve(params.layers.size() + 1);
  trace.activations.push_back(x);
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weights * trace.activations.back();
    z.colwise() += layer.biases;
    trace.activations.push_back(z.cwiseMax(0.0));
  }
  const auto& last = trace.activations.back();
  trace.z_mean = (params.head.mean_weights * last).array() + params.head.mean_bias;
  trace.z_var = (params.head.var_weights * last).array() + params.head.var_bias;
  return trace;
}

double squash_mean(double z, double scale) { return scale * std::tanh(z / scale); }

}  // namespace

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto block : parameter_blocks(*this)) n += block.size();
  return n;
}

bool NetworkParams::all_finite() const {
  for (const auto block : parameter_blocks(*this)) {
    if (!std::all_of(block.begin(), block.end(), [](double v) { return std::isfinite(v); })) return false;
  }
  return true;
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
  const auto a = parameter_blocks(*this);
  const auto b = parameter_blocks(other);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b[i].size()) return false;
  }
  return true;
}

std::vector<std::span<double>> parameter_blocks(NetworkParams& params) {
  std::vector<std::span<double>> blocks;
  blocks.reserve(2 * params.layers.size() + 4);
  for (auto& layer : params.layers) {
    blocks.emplace_back(layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
    blocks.emplace_back(layer.biases.data(), static_cast<std::size_t>(layer.biases.size()));
  }
  auto& head = params.head;
  blocks.emplace_back(head.mean_weights.data(), static_cast<std::size_t>(head.mean_weights.size()));
  blocks.emplace_back(&head.mean_bias, 1);
  blocks.emplace_back(head.var_weights.data(), static_cast<std::size_t>(head.var_weights.size()));
  blocks.emplace_back(&head.var_bias, 1);
  return blocks;
}

std::vector<std::span<const double>> parameter_blocks(const NetworkParams& params) {
  auto mutable_blocks = parameter_blocks(const_cast<NetworkParams&>(params));
  return {mutable_blocks.begin(), mutable_blocks.end()};
}

NetworkParams zeros_like(const NetworkParams& like) {
  NetworkParams out = like;
  for (auto block : parameter_blocks(out)) std::fill(block.begin(), block.end(), 0.0);
  return out;
}

void TrainConfig::validate() const {
  if (!(base_lr > 0.0)) throw InvalidArgument("train config: base_lr must be positive");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) throw InvalidArgument("train config: decay_factor must be in (0, 1]");
  if (decay_start_epoch < 0) throw InvalidArgument("train config: decay_start_epoch must be non-negative");
  if (epochs < 1) throw InvalidArgument("train config: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("train config: batch_size must be >= 1");
}

AdamState AdamState::for_params(const NetworkParams& params) {
  AdamState state;
  state.first_moment = zeros_like(params);
  state.second_moment = zeros_like(params);
  return state;
}

NetworkParams init_network(const Architecture& arch, std::uint64_t seed) {
  validate_arch(arch);
  Rng rng(derive_seed(seed, 0x1417));
  NetworkParams params;
  params.arch = arch;
  int fan_in = arch.input_dim;
  for (const int width : arch.hidden_dims) {
    DenseLayer layer;
    layer.weights.resize(width, fan_in);
    const double scale = std::sqrt(2.0 / fan_in);
    // Column-major fill order is part of the determinism contract.
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = scale * rng.normal();
    layer.biases = Eigen::VectorXd::Zero(width);
    params.layers.push_back(std::move(layer));
    fan_in = width;
  }
  const double head_scale = std::sqrt(2.0 / fan_in);
  params.head.mean_weights.resize(fan_in);
  params.head.var_weights.resize(fan_in);
  for (Eigen::Index i = 0; i < fan_in; ++i) params.head.mean_weights[i] = head_scale * rng.normal();
  for (Eigen::Index i = 0; i < fan_in; ++i) params.head.var_weights[i] = head_scale * rng.normal();
  return params;
}

BatchPrediction forward_batch(const NetworkParams& params, const Eigen::MatrixXd& x) {
  const Trace trace = run_forward(params, x);
  const double scale = params.arch.tanh_scale;
  const double floor = params.arch.variance_floor;
  BatchPrediction out;
  out.mean = trace.z_mean.transpose().unaryExpr([scale](double z) { return squash_mean(z, scale); });
  out.variance = trace.z_var.transpose().unaryExpr([floor](double z) { return softplus(z) + floor; });
  return out;
}

GaussianPrediction forward(const NetworkParams& params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != params.arch.input_dim) {
    throw ShapeError("forward: expected input of dimension " + std::to_string(params.arch.input_dim) + ", got " +
                     std::to_string(x.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> column(x.data(), static_cast<Eigen::Index>(x.size()));
  const BatchPrediction batch = forward_batch(params, Eigen::MatrixXd(column));
  return {batch.mean[0], batch.variance[0]};
}

double gaussian_nll(const GaussianPrediction& pred, double y) {
  if (!(pred.variance > 0.0)) throw DomainError("gaussian_nll: variance must be positive");
  const double r = y - pred.mean;
  return 0.5 * std::log(pred.variance) + r * r / (2.0 * pred.variance);
}

double batch_loss(const NetworkParams& params, const Batch& batch) {
  if (batch.size() == 0) throw InvalidArgument("batch_loss: empty batch");
  const BatchPrediction pred = forward_batch(params, batch.x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch.size(); ++i) total += gaussian_nll({pred.mean[i], pred.variance[i]}, batch.y[i]);
  return total / static_cast<double>(batch.size());
}

NetworkParams backward(const NetworkParams& params, const Batch& batch, double& loss) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw InvalidArgument("backward: empty batch");
  if (batch.x.cols() != n) throw ShapeError("backward: x and y disagree on batch size");

  const Trace trace = run_forward(params, batch.x);
  const double scale = params.arch.tanh_scale;
  const double floor = params.arch.variance_floor;
  const double inv_n = 1.0 / static_cast<double>(n);

  Eigen::RowVectorXd d_zmean(n);
  Eigen::RowVectorXd d_zvar(n);
  loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = std::tanh(trace.z_mean[i] / scale);
    const double mean = scale * t;
    const double var = softplus(trace.z_var[i]) + floor;
    const double r = batch.y[i] - mean;
    loss += 0.5 * std::log(var) + r * r / (2.0 * var);
    // dL/dmean = -r / var, dmean/dz = 1 - t^2
    d_zmean[i] = inv_n * (-r / var) * (1.0 - t * t);
    // dL/dvar = 1/(2 var) - r^2 / (2 var^2), dvar/dz = sigmoid(z)
    d_zvar[i] = inv_n * (0.5 / var - r * r / (2.0 * var * var)) * sigmoid(trace.z_var[i]);
  }
  loss *= inv_n;

  NetworkParams grads;
  grads.arch = params.arch;
  grads.layers.resize(params.layers.size());

  const Eigen::MatrixXd& top = trace.activations.back();
  grads.head.mean_weights = d_zmean * top.transpose();
  grads.head.mean_bias = d_zmean.sum();
  grads.head.var_weights = d_zvar * top.transpose();
  grads.head.var_bias = d_zvar.sum();

  Eigen::MatrixXd d_act = params.head.mean_weights.transpose() * d_zmean + params.head.var_weights.transpose() * d_zvar;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    // activations[l+1] > 0 exactly where z > 0, so it doubles as the ReLU mask (0 at z == 0).
    const Eigen::MatrixXd d_z = (trace.activations[l + 1].array() > 0.0).select(d_act, 0.0);
    grads.layers[l].weights = d_z * trace.activations[l].transpose();
    grads.layers[l].biases = d_z.rowwise().sum();
    if (l > 0) d_act = params.layers[l].weights.transpose() * d_z;
  }
  return grads;
}

NetworkParams backward(const NetworkParams& params, const Batch& batch) {
  double loss = 0.0;
  return backward(params, batch, loss);
}

void adam_update(std::span<double> params, std::span<double> first_moment, std::span<double> second_moment,
                 std::span<const double> grads, std::uint64_t step, double beta1, double beta2, double epsilon,
                 double lr) {
  if (first_moment.size() != params.size() || second_moment.size() != params.size() || grads.size() != params.size()) {
    throw ShapeError("adam_update: buffer sizes differ");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(beta1, t);
  const double correction2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    first_moment[i] = beta1 * first_moment[i] + (1.0 - beta1) * grads[i];
    second_moment[i] = beta2 * second_moment[i] + (1.0 - beta2) * grads[i] * grads[i];
    const double m_hat = first_moment[i] / correction1;
    const double v_hat = second_moment[i] / correction2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + epsilon);
  }
}

void adam_step(NetworkParams& params, AdamState& state, const NetworkParams& grads, double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("adam_step: learning rate must be positive");
  if (!params.same_shape(grads) || !params.same_shape(state.first_moment) || !params.same_shape(state.second_moment)) {
    throw ShapeError("adam_step: parameter, gradient and moment shapes differ");
  }
  state.step_count += 1;
  auto p_blocks = parameter_blocks(params);
  const auto g_blocks = parameter_blocks(grads);
  auto m_blocks = parameter_blocks(state.first_moment);
  auto v_blocks = parameter_blocks(state.second_moment);
  for (std::size_t b = 0; b < p_blocks.size(); ++b) {
    adam_update(p_blocks[b], m_blocks[b], v_blocks[b], g_blocks[b], state.step_count, state.beta1, state.beta2,
                state.epsilon, lr);
  }
}

double lr_schedule(int epoch, const TrainConfig& config) {
  if (epoch <= config.decay_start_epoch) return config.base_lr;
  return config.base_lr * std::pow(config.decay_factor, epoch - config.decay_start_epoch);
}

TrainResult train(const NetworkParams& initial, const Batch& dataset, const TrainConfig& config) {
  config.validate();
  const Eigen::Index n = dataset.size();
  if (n == 0) throw InvalidArgument("train: empty dataset");
  if (dataset.x.rows() != initial.arch.input_dim || dataset.x.cols() != n) {
    throw ShapeError("train: dataset shape does not match the network input");
  }

  TrainResult result{initial, {}};
  result.history.reserve(static_cast<std::size_t>(config.epochs));
  AdamState adam = AdamState::for_params(initial);
  Rng rng(derive_seed(config.seed, 0x5eed));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index batch_size = std::min<Eigen::Index>(config.batch_size, n);

  Batch mini;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    const double lr = lr_schedule(epoch, config);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch_size) {
      const Eigen::Index count = std::min(batch_size, n - start);
      const std::span<const Eigen::Index> idx(order.data() + start, static_cast<std::size_t>(count));
      mini.x = dataset.x(Eigen::all, idx);
      mini.y = dataset.y(idx);
      double loss = 0.0;
      const NetworkParams grads = backward(result.params, mini, loss);
      adam_step(result.params, adam, grads, lr);
      epoch_loss += loss * static_cast<double>(count);
    }
    result.history.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

}  // namespace surge
