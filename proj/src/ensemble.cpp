#include "surge/ensemble.hpp"

#include <algorithm>
#include <thread>

#include "surge/errors.hpp"
#include "surge/random.hpp"

namespace surge {

namespace {

template <typename Fn>
void for_each_member(std::size_t count, bool parallel, Fn&& fn) {
  if (!parallel || count < 2 || std::thread::hardware_concurrency() < 2) {
    for (std::size_t m = 0; m < count; ++m) fn(m);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(count);
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t m = 0; m < count; ++m) {
    workers.emplace_back([&, m] {
      try {
        fn(m);
      } catch (...) {
        errors[m] = std::current_exception();
      }
    });
  }
  workers.clear();
  for (const auto& error : errors) {
    if (error) std::rethrow_exception(error);
  }
}

}  // namespace

Ensemble train_ensemble(const Batch& dataset, const TrainConfig& config, int n_members, const Architecture& arch,
                        bool parallel) {
  if (n_members < 1) throw InvalidArgument("train_ensemble: n_members must be >= 1");
  if (dataset.size() == 0) throw InvalidArgument("train_ensemble: empty dataset");
  config.validate();

  Ensemble ensemble;
  ensemble.members.resize(static_cast<std::size_t>(n_members));
  for (int m = 0; m < n_members; ++m) ensemble.member_seeds.push_back(config.seed ^ static_cast<std::uint64_t>(m));

  for_each_member(ensemble.members.size(), parallel, [&](std::size_t m) {
    TrainConfig member_config = config;
    member_config.seed = ensemble.member_seeds[m];
    const NetworkParams init = init_network(arch, member_config.seed);
    ensemble.members[m] = train(init, dataset, member_config).params;
  });
  return ensemble;
}

void retrain_ensemble(Ensemble& ensemble, const Batch& dataset, const TrainConfig& config, std::uint64_t round,
                      bool parallel) {
  if (ensemble.members.empty()) throw InvalidArgument("retrain_ensemble: empty ensemble");
  for_each_member(ensemble.members.size(), parallel, [&](std::size_t m) {
    TrainConfig member_config = config;
    member_config.seed = derive_seed(ensemble.member_seeds[m], round);
    ensemble.members[m] = train(ensemble.members[m], dataset, member_config).params;
  });
}

std::vector<GaussianPrediction> predict_members(const Ensemble& ensemble, std::span<const double> x) {
  std::vector<GaussianPrediction> out;
  out.reserve(ensemble.members.size());
  for (const auto& member : ensemble.members) out.push_back(forward(member, x));
  return out;
}

GaussianPrediction pool_predictions(std::span<const GaussianPrediction> members) {
  if (members.empty()) throw InvalidArgument("pool_predictions: no members");
  const double inv_m = 1.0 / static_cast<double>(members.size());
  double mean = 0.0;
  double second = 0.0;
  for (const auto& p : members) {
    mean += p.mean;
    second += p.variance + p.mean * p.mean;
  }
  mean *= inv_m;
  second *= inv_m;
  return {mean, second - mean * mean};
}

GaussianPrediction predict_pooled(const Ensemble& ensemble, std::span<const double> x) {
  if (ensemble.members.empty()) throw InvalidArgument("predict_pooled: empty ensemble");
  const auto members = predict_members(ensemble, x);
  return pool_predictions(members);
}

BatchPrediction predict_pooled_batch(const Ensemble& ensemble, const Eigen::MatrixXd& x) {
  if (ensemble.members.empty()) throw InvalidArgument("predict_pooled_batch: empty ensemble");
  const Eigen::Index n = x.cols();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(n);
  for (const auto& member : ensemble.members) {
    const BatchPrediction p = forward_batch(member, x);
    mean += p.mean;
    second += p.variance + p.mean.cwiseProduct(p.mean);
  }
  const double inv_m = 1.0 / static_cast<double>(ensemble.members.size());
  mean *= inv_m;
  second *= inv_m;
  return {mean, second - mean.cwiseProduct(mean)};
}

}  // namespace surge
