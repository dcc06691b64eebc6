#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "surge/active_learning.hpp"
#include "surge/errors.hpp"

using namespace surge;

namespace {

std::vector<PumpSample> small_dataset(std::size_t n = 300, std::uint64_t seed = 0) {
  GeneratorConfig config;
  config.n_samples = n;
  config.seed = seed;
  return generate_synthetic(config);
}

ALConfig small_config(std::uint64_t seed = 0) {
  ALConfig c;
  c.initial_train_size = 20;
  c.candidate_multiplier = 3;
  c.batch_k = 10;
  c.iterations = 3;
  c.total_budget = 1000;
  c.seed = seed;
  c.n_members = 3;
  c.arch.hidden_dims = {8, 8};
  c.train_config.epochs = 5;
  c.train_config.batch_size = 8;
  return c;
}

bool is_sorted_unique(const std::vector<std::size_t>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

void check_partition(const PoolState& s, std::size_t n) {
  CHECK(is_sorted_unique(s.train_idx));
  CHECK(is_sorted_unique(s.pool_idx));
  CHECK(is_sorted_unique(s.test_idx));
  std::vector<std::size_t> all;
  all.insert(all.end(), s.train_idx.begin(), s.train_idx.end());
  all.insert(all.end(), s.pool_idx.begin(), s.pool_idx.end());
  all.insert(all.end(), s.test_idx.begin(), s.test_idx.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(n);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(all == expected);
}

}  // namespace

TEST_CASE("strategy names round trip") {
  CHECK(parse_strategy("top_variance") == Strategy::TopVariance);
  CHECK(parse_strategy("random") == Strategy::Random);
  CHECK(parse_strategy(to_string(Strategy::Random)) == Strategy::Random);
  CHECK_THROWS_AS(parse_strategy("greedy"), InvalidArgument);
}

TEST_CASE("partition sizes and determinism") {
  const PoolState s = partition(1000, 0.2, 50, 7);
  CHECK(s.test_idx.size() == 200);
  CHECK(s.train_idx.size() == 50);
  CHECK(s.pool_idx.size() == 750);
  check_partition(s, 1000);
  const PoolState again = partition(1000, 0.2, 50, 7);
  CHECK(again.train_idx == s.train_idx);
  CHECK(again.test_idx == s.test_idx);
  CHECK(partition(1000, 0.2, 50, 8).train_idx != s.train_idx);
}

TEST_CASE("partition is a disjoint cover for many configurations") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.index(500);
    const double tf = rng.uniform(0.05, 0.5);
    const auto n_test = static_cast<std::size_t>(std::llround(tf * static_cast<double>(n)));
    const std::size_t initial = 1 + rng.index(n - n_test - 1);
    const PoolState s = partition(n, tf, initial, rng.next_u64());
    CHECK(s.test_idx.size() == n_test);
    CHECK(s.train_idx.size() == initial);
    check_partition(s, n);
  }
}

TEST_CASE("sample_candidates") {
  std::vector<std::size_t> pool(40);
  std::iota(pool.begin(), pool.end(), 100);
  Rng rng(3);
  const auto c = sample_candidates(pool, 5, 4, rng);
  CHECK(c.size() == 20);
  CHECK(std::set<std::size_t>(c.begin(), c.end()).size() == 20);
  for (auto i : c) CHECK(std::binary_search(pool.begin(), pool.end(), i));

  const auto clamped = sample_candidates(pool, 5, 50, rng);
  CHECK(clamped.size() == 40);

  const std::vector<std::size_t> empty;
  CHECK_THROWS_AS(sample_candidates(empty, 5, 5, rng), PoolExhausted);
}

TEST_CASE("sample_candidates is uniform over the pool") {
  std::vector<std::size_t> pool(10);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> counts(10, 0);
  Rng rng(21);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    for (auto i : sample_candidates(pool, 1, 3, rng)) ++counts[i];
  }
  // Each index is included with probability 0.3.
  const double expected = draws * 0.3;
  const double sigma = std::sqrt(draws * 0.3 * 0.7);
  for (int c : counts) CHECK(std::abs(c - expected) < 3.0 * sigma);
}

TEST_CASE("select_top_k ordering and ties") {
  const std::vector<std::size_t> cand = {7, 3, 9, 1};
  const std::vector<double> scores = {0.5, 0.9, 0.5, 0.1};
  CHECK(select_top_k(cand, scores, 2) == std::vector<std::size_t>{3, 7});
  CHECK(select_top_k(cand, scores, 10).size() == 4);
  const std::vector<double> flat = {1.0, 1.0, 1.0, 1.0};
  CHECK(select_top_k(cand, flat, 2) == std::vector<std::size_t>{1, 3});
  CHECK_THROWS_AS(select_top_k(cand, std::vector<double>{1.0}, 1), ShapeError);
}

TEST_CASE("select_top_k agrees with a full sort") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.index(60);
    std::vector<std::size_t> cand(n);
    std::iota(cand.begin(), cand.end(), 0);
    rng.shuffle(cand);
    std::vector<double> scores(n);
    for (auto& s : scores) s = std::round(rng.uniform(0.0, 5.0));  // frequent ties
    const std::size_t k = 1 + rng.index(n);

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.emplace_back(-scores[i], cand[i]);
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < k; ++i) expected.push_back(ranked[i].second);

    std::vector<std::size_t> got = select_top_k(cand, scores, k);
    CHECK(std::set<std::size_t>(got.begin(), got.end()) == std::set<std::size_t>(expected.begin(), expected.end()));
  }
}

TEST_CASE("acquire_top_variance matches brute-force scoring") {
  const auto samples = small_dataset();
  const PoolState s = partition(samples.size(), 0.2, 30, 1);
  const Scaler scaler = fit_scaler(samples, s.train_idx);
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 8;
  Architecture arch;
  arch.hidden_dims = {8};
  const Ensemble e = train_ensemble({feature_matrix(scaler, samples, s.train_idx),
                                     target_vector(scaler, samples, s.train_idx)},
                                    tc, 3, arch);
  const std::vector<std::size_t> cand(s.pool_idx.begin(), s.pool_idx.begin() + 25);
  const auto picked = acquire_top_variance(e, scaler, samples, cand, 5);

  std::vector<std::pair<double, std::size_t>> brute;
  for (auto i : cand) {
    const auto f = scaler.apply_features(samples[i]);
    const std::vector<double> x(f.begin(), f.end());
    brute.emplace_back(-predict_pooled(e, x).variance, i);
  }
  std::sort(brute.begin(), brute.end());
  std::set<std::size_t> expected;
  for (int i = 0; i < 5; ++i) expected.insert(brute[i].second);
  CHECK(std::set<std::size_t>(picked.begin(), picked.end()) == expected);
}

TEST_CASE("campaign bookkeeping and invariants") {
  const auto samples = small_dataset();
  const ALConfig config = small_config(5);
  std::size_t calls = 0;
  std::set<std::size_t> test_set;
  std::size_t last_train = 0;
  const auto observer = [&](const PoolState& state, const IterationRecord& record) {
    if (calls == 0) test_set = {state.test_idx.begin(), state.test_idx.end()};
    check_partition(state, samples.size());
    CHECK(std::set<std::size_t>(state.test_idx.begin(), state.test_idx.end()) == test_set);
    CHECK(record.iteration == calls);
    CHECK(record.train_size == state.train_idx.size());
    CHECK(record.train_size == config.initial_train_size + calls * config.batch_k);
    CHECK(record.train_size <= config.total_budget);
    if (calls > 0) {
      CHECK(record.train_size == last_train + record.selected_idx.size());
      for (auto i : record.selected_idx) {
        CHECK(std::binary_search(state.train_idx.begin(), state.train_idx.end(), i));
        CHECK(test_set.count(i) == 0);
      }
    }
    last_train = record.train_size;
    ++calls;
  };
  const CampaignResult r = al_loop(samples, config, observer);
  CHECK(calls == config.iterations + 1);
  CHECK(r.curve.records.size() == config.iterations + 1);
  CHECK(r.curve.stop_reason == StopReason::Iterations);
  CHECK(r.ensemble.scaler_ref == r.scaler.fingerprint());
  for (const auto& rec : r.curve.records) {
    CHECK(std::isfinite(rec.test_rmse));
    CHECK(rec.mean_pool_variance > 0.0);
  }
}

TEST_CASE("random baseline shares the initial state with active learning") {
  const auto samples = small_dataset();
  const ALConfig config = small_config(2);
  const CampaignResult al = al_loop(samples, config);
  const CampaignResult rnd = random_baseline_loop(samples, config);
  CHECK(rnd.curve.strategy == Strategy::Random);
  CHECK(al.curve.records[0].test_rmse == rnd.curve.records[0].test_rmse);
  CHECK(al.curve.records[0].mean_pool_variance == rnd.curve.records[0].mean_pool_variance);
  CHECK(al.state.test_idx == rnd.state.test_idx);
  CHECK(al.curve.records.back().train_size == rnd.curve.records.back().train_size);
}

TEST_CASE("zero iterations yields only the initial record") {
  const auto samples = small_dataset();
  ALConfig config = small_config();
  config.iterations = 0;
  const CampaignResult r = al_loop(samples, config);
  REQUIRE(r.curve.records.size() == 1);
  CHECK(r.curve.records[0].train_size == config.initial_train_size);
  CHECK(r.curve.records[0].selected_idx.empty());
}

TEST_CASE("campaigns are deterministic") {
  const auto samples = small_dataset();
  const ALConfig config = small_config(9);
  const CampaignResult a = al_loop(samples, config);
  const CampaignResult b = al_loop(samples, config);
  REQUIRE(a.curve.records.size() == b.curve.records.size());
  for (std::size_t i = 0; i < a.curve.records.size(); ++i) {
    CHECK(a.curve.records[i].test_rmse == b.curve.records[i].test_rmse);
    CHECK(a.curve.records[i].selected_idx == b.curve.records[i].selected_idx);
  }
  ALConfig cold = config;
  cold.warm_start = false;
  const CampaignResult c1 = al_loop(samples, cold);
  const CampaignResult c2 = al_loop(samples, cold);
  CHECK(c1.curve.records.back().test_rmse == c2.curve.records.back().test_rmse);
}

TEST_CASE("budget caps the final acquisition") {
  const auto samples = small_dataset();
  ALConfig config = small_config();
  config.total_budget = 45;
  config.iterations = 5;
  const CampaignResult r = al_loop(samples, config);
  CHECK(r.curve.records.back().train_size == 45);
  CHECK(r.curve.records.back().selected_idx.size() == 5);
  CHECK(r.curve.stop_reason == StopReason::Budget);
}

TEST_CASE("pool exhaustion is rejected or handled by an early stop") {
  const auto samples = small_dataset(100);
  ALConfig config = small_config();
  config.iterations = 20;  // 20 + 20*10 > 80 non-test rows
  CHECK_THROWS_AS(config.validate(samples.size()), InvalidArgument);
  CHECK_THROWS_AS(al_loop(samples, config), InvalidArgument);

  config.allow_pool_exhaustion = true;
  const CampaignResult r = al_loop(samples, config);
  CHECK(r.curve.stop_reason == StopReason::PoolExhausted);
  CHECK(r.state.pool_idx.empty());
  CHECK(r.curve.records.back().train_size == 80);
  CHECK(std::isnan(r.curve.records.back().mean_pool_variance));
}

TEST_CASE("invalid configurations") {
  const auto samples = small_dataset(100);
  ALConfig config = small_config();
  config.batch_k = 0;
  CHECK_THROWS_AS(config.validate(100), InvalidArgument);
  config = small_config();
  config.candidate_multiplier = 0;
  CHECK_THROWS_AS(config.validate(100), InvalidArgument);
  config = small_config();
  config.test_fraction = 1.0;
  CHECK_THROWS_AS(config.validate(100), InvalidArgument);
  config = small_config();
  config.initial_train_size = 80;
  CHECK_THROWS_AS(config.validate(100), InvalidArgument);
  config = small_config();
  config.total_budget = 10;
  CHECK_THROWS_AS(config.validate(100), InvalidArgument);
}
