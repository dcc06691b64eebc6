#include "surge/active_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "surge/errors.hpp"

namespace surge {

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::TopVariance:
      return "top_variance";
    case Strategy::Random:
      return "random";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "top_variance") return Strategy::TopVariance;
  if (name == "random") return Strategy::Random;
  throw InvalidArgument("unknown strategy '" + std::string(name) + "' (expected top_variance or random)");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Iterations:
      return "iterations";
    case StopReason::Budget:
      return "budget";
    case StopReason::PoolExhausted:
      return "pool_exhausted";
  }
  return "unknown";
}

namespace {

std::size_t test_count(std::size_t n, double test_fraction) {
  return static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
}

}  // namespace

PoolState partition(std::size_t n, double test_fraction, std::size_t initial_train_size, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("partition: test_fraction must be in (0, 1)");
  if (initial_train_size < 1) throw InvalidArgument("partition: initial_train_size must be >= 1");
  const std::size_t n_test = test_count(n, test_fraction);
  if (n_test < 1 || n_test >= n || initial_train_size >= n - n_test) {
    throw InvalidArgument("partition: " + std::to_string(n) + " samples cannot hold a test fraction of " +
                          std::to_string(test_fraction) + " and an initial training set of " +
                          std::to_string(initial_train_size) + " with a non-empty pool");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0xda7a));
  rng.shuffle(order);

  PoolState state;
  const auto test_end = order.begin() + static_cast<std::ptrdiff_t>(n_test);
  const auto train_end = test_end + static_cast<std::ptrdiff_t>(initial_train_size);
  state.test_idx.assign(order.begin(), test_end);
  state.train_idx.assign(test_end, train_end);
  state.pool_idx.assign(train_end, order.end());
  std::sort(state.test_idx.begin(), state.test_idx.end());
  std::sort(state.train_idx.begin(), state.train_idx.end());
  std::sort(state.pool_idx.begin(), state.pool_idx.end());
  return state;
}

std::vector<std::size_t> sample_candidates(std::span<const std::size_t> pool_idx, std::size_t multiplier,
                                           std::size_t k, Rng& rng) {
  if (pool_idx.empty()) throw PoolExhausted();
  if (multiplier < 1 || k < 1) throw InvalidArgument("sample_candidates: M and K must be >= 1");
  std::vector<std::size_t> pool(pool_idx.begin(), pool_idx.end());
  const std::size_t count = std::min(multiplier * k, pool.size());
  // Partial Fisher-Yates: the first `count` slots end up a uniform sample without replacement.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<std::size_t> select_top_k(std::span<const std::size_t> candidates, std::span<const double> scores,
                                      std::size_t k) {
  if (candidates.size() != scores.size()) throw ShapeError("select_top_k: candidates and scores differ in length");
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t count = std::min(k, order.size());
  const auto better = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), better);
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(candidates[order[i]]);
  return out;
}

std::vector<std::size_t> acquire_top_variance(const Ensemble& ensemble, const Scaler& scaler,
                                              std::span<const PumpSample> samples,
                                              std::span<const std::size_t> candidates, std::size_t k) {
  if (candidates.empty()) throw InvalidArgument("acquire_top_variance: no candidates");
  const BatchPrediction pred = predict_pooled_batch(ensemble, feature_matrix(scaler, samples, candidates));
  return select_top_k(candidates, std::span<const double>(pred.variance.data(), candidates.size()), k);
}

std::vector<double> predict_sd(const Ensemble& ensemble, const Scaler& scaler, std::span<const PumpSample> samples,
                               std::span<const std::size_t> idx) {
  const BatchPrediction pred = predict_pooled_batch(ensemble, feature_matrix(scaler, samples, idx));
  std::vector<double> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = scaler.invert_target(pred.mean[static_cast<Eigen::Index>(i)]);
  return out;
}

void ALConfig::validate(std::size_t n_samples) const {
  if (candidate_multiplier < 1) throw InvalidArgument("al config: candidate multiplier M must be >= 1");
  if (batch_k < 1) throw InvalidArgument("al config: batch size K must be >= 1");
  if (initial_train_size < 2) throw InvalidArgument("al config: initial_train_size must be >= 2");
  if (n_members < 1) throw InvalidArgument("al config: n_members must be >= 1");
  if (total_budget < initial_train_size) throw InvalidArgument("al config: total_budget is below initial_train_size");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw InvalidArgument("al config: test_fraction must be in (0, 1)");
  train_config.validate();
  const std::size_t n_test = test_count(n_samples, test_fraction);
  if (n_test < 1 || n_test >= n_samples) {
    throw InvalidArgument("al config: dataset of " + std::to_string(n_samples) + " rows leaves no test or pool data");
  }
  const std::size_t available = n_samples - n_test;
  if (initial_train_size >= available) {
    throw InvalidArgument("al config: initial_train_size " + std::to_string(initial_train_size) +
                          " leaves an empty pool (" + std::to_string(available) + " non-test rows)");
  }
  if (!allow_pool_exhaustion && initial_train_size + iterations * batch_k > available) {
    throw InvalidArgument("al config: initial_train_size + iterations*K = " +
                          std::to_string(initial_train_size + iterations * batch_k) + " exceeds the " +
                          std::to_string(available) + " non-test rows");
  }
}

namespace {

IterationRecord evaluate(const Ensemble& ensemble, const Scaler& scaler, std::span<const PumpSample> samples,
                         const PoolState& state, const MetricsOptions& options) {
  IterationRecord record;
  record.train_size = state.train_idx.size();
  const std::vector<double> pred = predict_sd(ensemble, scaler, samples, state.test_idx);
  std::vector<double> truth(state.test_idx.size());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = samples[state.test_idx[i]].sd;
  const MetricsReport report = metrics_report(pred, truth, options);
  record.test_rmse = report.rmse;
  record.test_r2 = report.r2;
  record.test_mape = report.mape_pct;
  record.test_max_error = report.max_error;
  record.acceptance_accuracy = report.acceptance_accuracy_pct;
  if (!state.pool_idx.empty()) {
    const BatchPrediction pool = predict_pooled_batch(ensemble, feature_matrix(scaler, samples, state.pool_idx));
    record.mean_pool_variance = pool.variance.mean();
  }
  return record;
}

Batch training_batch(const Scaler& scaler, std::span<const PumpSample> samples, const PoolState& state) {
  return {feature_matrix(scaler, samples, state.train_idx), target_vector(scaler, samples, state.train_idx)};
}

void move_to_train(PoolState& state, std::span<const std::size_t> selected) {
  std::vector<std::size_t> chosen(selected.begin(), selected.end());
  std::sort(chosen.begin(), chosen.end());
  std::vector<std::size_t> remaining;
  remaining.reserve(state.pool_idx.size());
  std::set_difference(state.pool_idx.begin(), state.pool_idx.end(), chosen.begin(), chosen.end(),
                      std::back_inserter(remaining));
  if (remaining.size() + chosen.size() != state.pool_idx.size()) {
    throw std::logic_error("active learning: selected index is not in the pool");
  }
  state.pool_idx = std::move(remaining);
  std::vector<std::size_t> train;
  train.reserve(state.train_idx.size() + chosen.size());
  std::merge(state.train_idx.begin(), state.train_idx.end(), chosen.begin(), chosen.end(), std::back_inserter(train));
  state.train_idx = std::move(train);
}

}  // namespace

CampaignResult run_campaign(std::span<const PumpSample> samples, const ALConfig& config, Strategy strategy,
                            const CampaignObserver& observer) {
  config.validate(samples.size());

  CampaignResult result;
  result.curve.strategy = strategy;
  result.curve.config = config;
  result.state = partition(samples.size(), config.test_fraction, config.initial_train_size, config.seed);
  PoolState& state = result.state;

  // Inputs and targets are normalized with statistics of the initial training set only,
  // and the scaler stays fixed for the whole campaign.
  result.scaler = fit_scaler(samples, state.train_idx);

  TrainConfig train_config = config.train_config;
  train_config.seed = config.seed;
  result.ensemble = train_ensemble(training_batch(result.scaler, samples, state), train_config, config.n_members,
                                   config.arch, config.parallel_members);
  result.ensemble.scaler_ref = result.scaler.fingerprint();

  IterationRecord initial = evaluate(result.ensemble, result.scaler, samples, state, config.metrics);
  result.curve.records.push_back(initial);
  if (observer) observer(state, result.curve.records.back());

  Rng rng(derive_seed(config.seed, 0xac9));
  result.curve.stop_reason = StopReason::Iterations;
  for (std::size_t iteration = 1; iteration <= config.iterations; ++iteration) {
    if (state.pool_idx.empty()) {
      result.curve.stop_reason = StopReason::PoolExhausted;
      break;
    }
    if (state.train_idx.size() >= config.total_budget) {
      result.curve.stop_reason = StopReason::Budget;
      break;
    }
    const std::size_t k = std::min(config.batch_k, config.total_budget - state.train_idx.size());

    std::vector<std::size_t> selected;
    if (strategy == Strategy::TopVariance) {
      const auto candidates = sample_candidates(state.pool_idx, config.candidate_multiplier, k, rng);
      selected = acquire_top_variance(result.ensemble, result.scaler, samples, candidates, k);
    } else {
      selected = sample_candidates(state.pool_idx, 1, k, rng);
    }
    move_to_train(state, selected);

    const Batch batch = training_batch(result.scaler, samples, state);
    if (config.warm_start) {
      retrain_ensemble(result.ensemble, batch, train_config, iteration, config.parallel_members);
    } else {
      TrainConfig fresh = train_config;
      fresh.seed = derive_seed(config.seed, iteration);
      result.ensemble = train_ensemble(batch, fresh, config.n_members, config.arch, config.parallel_members);
      result.ensemble.scaler_ref = result.scaler.fingerprint();
    }

    IterationRecord record = evaluate(result.ensemble, result.scaler, samples, state, config.metrics);
    record.iteration = iteration;
    record.selected_idx = std::move(selected);
    result.curve.records.push_back(std::move(record));
    if (observer) observer(state, result.curve.records.back());
  }
  return result;
}

CampaignResult al_loop(std::span<const PumpSample> samples, const ALConfig& config, const CampaignObserver& observer) {
  return run_campaign(samples, config, Strategy::TopVariance, observer);
}

CampaignResult random_baseline_loop(std::span<const PumpSample> samples, const ALConfig& config,
                                    const CampaignObserver& observer) {
  return run_campaign(samples, config, Strategy::Random, observer);
}

}  // namespace surge
