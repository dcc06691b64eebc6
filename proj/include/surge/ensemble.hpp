#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surge/nnet.hpp"

namespace surge {

struct Ensemble {
  std::vector<NetworkParams> members;
  std::vector<std::uint64_t> member_seeds;
  std::string scaler_ref;  // identifies the Scaler the targets were normalized with

  std::size_t size() const { return members.size(); }
  const Architecture& arch() const { return members.front().arch; }
};

// Member m is initialized and trained with seed (config.seed XOR m).
// Members train on separate threads when `parallel` is set; the result does not depend on it.
Ensemble train_ensemble(const Batch& dataset, const TrainConfig& config, int n_members,
                        const Architecture& arch = {}, bool parallel = true);

// Warm-started retraining of every member for config.epochs epochs. `round` selects a fresh
// shuffle stream per member so successive retrains do not replay the same batch order.
void retrain_ensemble(Ensemble& ensemble, const Batch& dataset, const TrainConfig& config, std::uint64_t round,
                      bool parallel = true);

std::vector<GaussianPrediction> predict_members(const Ensemble& ensemble, std::span<const double> x);

// Uniform Gaussian-mixture moments:
//   mean     = (1/M) sum mu_m
//   variance = (1/M) sum (sigma_m^2 + mu_m^2) - mean^2
GaussianPrediction pool_predictions(std::span<const GaussianPrediction> members);

GaussianPrediction predict_pooled(const Ensemble& ensemble, std::span<const double> x);

// Pooled prediction for every column of x.
BatchPrediction predict_pooled_batch(const Ensemble& ensemble, const Eigen::MatrixXd& x);

}  // namespace surge
