#pragma once

// Pool-based active learning with an ensemble surrogate.
//
// A campaign partitions the data into test / initial train / pool, trains the ensemble on
// the initial set, then repeatedly draws M*K random pool candidates, moves the K with the
// highest pooled predictive variance into the training set and retrains. The random
// baseline runs the same loop but moves K uniformly drawn pool points instead.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "surge/ensemble.hpp"
#include "surge/metrics.hpp"
#include "surge/pump_data.hpp"
#include "surge/random.hpp"

namespace surge {

enum class Strategy { TopVariance, Random };

std::string_view to_string(Strategy strategy);
Strategy parse_strategy(std::string_view name);

struct PoolState {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> pool_idx;
  std::vector<std::size_t> test_idx;
};

class PoolExhausted : public std::runtime_error {
 public:
  PoolExhausted() : std::runtime_error("pool exhausted") {}
};

// Seeded shuffle of 0..n-1: the first round(test_fraction*n) indices become the test set,
// the next initial_train_size the training set, the rest the pool. Each set is returned sorted.
PoolState partition(std::size_t n, double test_fraction, std::size_t initial_train_size, std::uint64_t seed);

// min(M*K, |pool|) distinct pool entries, uniformly without replacement. Throws PoolExhausted on an empty pool.
std::vector<std::size_t> sample_candidates(std::span<const std::size_t> pool_idx, std::size_t multiplier,
                                           std::size_t k, Rng& rng);

// The k candidates with the largest score; ties go to the smaller dataset index.
// scores[i] belongs to candidates[i].
std::vector<std::size_t> select_top_k(std::span<const std::size_t> candidates, std::span<const double> scores,
                                      std::size_t k);

// Scores candidates by pooled predictive variance and returns the top k.
std::vector<std::size_t> acquire_top_variance(const Ensemble& ensemble, const Scaler& scaler,
                                              std::span<const PumpSample> samples,
                                              std::span<const std::size_t> candidates, std::size_t k);

struct ALConfig {
  std::size_t initial_train_size = 50;
  std::size_t candidate_multiplier = 5;  // M
  std::size_t batch_k = 50;              // K
  std::size_t iterations = 43;
  std::size_t total_budget = 2200;  // cap on the training-set size
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  int n_members = 5;
  Architecture arch;
  TrainConfig train_config;
  bool warm_start = true;
  // When false, validation rejects configs whose iterations would drain the pool.
  // When true, the loop runs until the pool is empty and records the early stop.
  bool allow_pool_exhaustion = false;
  bool parallel_members = true;
  MetricsOptions metrics;

  // Throws InvalidArgument when the config cannot run on a dataset of n_samples rows.
  void validate(std::size_t n_samples) const;
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t train_size = 0;
  std::vector<std::size_t> selected_idx;
  double test_rmse = 0.0;
  double test_r2 = 0.0;
  double test_mape = 0.0;
  double test_max_error = 0.0;
  double acceptance_accuracy = 0.0;
  double mean_pool_variance = std::numeric_limits<double>::quiet_NaN();  // normalized units
};

enum class StopReason { Iterations, Budget, PoolExhausted };
std::string_view to_string(StopReason reason);

struct LearningCurve {
  Strategy strategy = Strategy::TopVariance;
  std::vector<IterationRecord> records;
  ALConfig config;
  StopReason stop_reason = StopReason::Iterations;
};

struct CampaignResult {
  LearningCurve curve;
  Ensemble ensemble;
  Scaler scaler;
  PoolState state;  // final partition
};

// Called after every record is appended, with the partition at that moment.
using CampaignObserver = std::function<void(const PoolState&, const IterationRecord&)>;

CampaignResult run_campaign(std::span<const PumpSample> samples, const ALConfig& config, Strategy strategy,
                            const CampaignObserver& observer = {});

CampaignResult al_loop(std::span<const PumpSample> samples, const ALConfig& config,
                       const CampaignObserver& observer = {});

CampaignResult random_baseline_loop(std::span<const PumpSample> samples, const ALConfig& config,
                                    const CampaignObserver& observer = {});

// Pooled predictions for the given rows, mapped back to surge distance in percent.
std::vector<double> predict_sd(const Ensemble& ensemble, const Scaler& scaler, std::span<const PumpSample> samples,
                               std::span<const std::size_t> idx);

}  // namespace surge
