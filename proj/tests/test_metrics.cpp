#include "doctest.h"

#include <algorithm>
#include <vector>

#include "surge/errors.hpp"
#include "surge/metrics.hpp"
#include "surge/random.hpp"

using namespace surge;
using V = std::vector<double>;

TEST_CASE("r_squared") {
  const V truth = {1, 2, 3};
  CHECK(r_squared(truth, truth) == 1.0);
  CHECK(r_squared(V{2, 2, 2}, truth) == 0.0);
  CHECK(r_squared(V{1, 2, 4}, truth) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(r_squared(V{1, 2}, V{3, 3}), DegenerateError);
  CHECK_THROWS_AS(r_squared(V{1, 2}, V{1, 2, 3}), ShapeError);
}

TEST_CASE("rmse") {
  CHECK(rmse(V{1, 2}, V{1, 2}) == 0.0);
  CHECK(rmse(V{3, 4}, V{0, 0}) == doctest::Approx(3.5355339059327378).epsilon(1e-15));
  CHECK(rmse(V{4, 3}, V{0, 0}) == rmse(V{3, 4}, V{0, 0}));
  CHECK_THROWS_AS(rmse(V{1}, V{1, 2}), ShapeError);
  CHECK_THROWS_AS(rmse(V{}, V{}), InvalidArgument);
}

TEST_CASE("max_error") {
  CHECK(max_error(V{1, 5}, V{1, 5}) == 0.0);
  CHECK(max_error(V{2, 3}, V{1, 5}) == 2.0);
  CHECK_THROWS_AS(max_error(V{}, V{}), InvalidArgument);
}

TEST_CASE("mape") {
  CHECK(mape(V{7, 8}, V{7, 8}) == 0.0);
  CHECK(mape(V{96}, V{100}) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(mape(V{0.5}, V{0}, 1.0) == 50.0);
  CHECK_THROWS_AS(mape(V{1}, V{1}, 0.0), InvalidArgument);
}

TEST_CASE("acceptance_accuracy") {
  CHECK(acceptance_accuracy(V{3, 4}, V{3, 4}) == 100.0);
  CHECK(acceptance_accuracy(V{103, 110}, V{100, 100}, 4.0) == 50.0);
  CHECK(acceptance_accuracy(V{100.001}, V{100}, 0.0) == 0.0);
}

TEST_CASE("metrics_report on a perfect prediction") {
  const V truth = {1, -4, 9, 16};
  const MetricsReport r = metrics_report(truth, truth);
  CHECK(r.r2 == 1.0);
  CHECK(r.rmse == 0.0);
  CHECK(r.max_error == 0.0);
  CHECK(r.mape_pct == 0.0);
  CHECK(r.acceptance_accuracy_pct == 100.0);
  CHECK(r.n == 4);
  CHECK(r.threshold_pct == 4.0);
  CHECK(r.mape_floor == 1.0);
}

TEST_CASE("metrics_report on a hand-computed five-point case") {
  // Residuals y - p: -1, -2, 0.5, -1.2, 0; squares sum to 6.69.
  // mean(y) = 7.1, SS_tot = 1873.2, so R^2 = 1 - 6.69/1873.2 = 279/280.
  // Relative errors with floor 1: 10%, 10%, 50%, 3%, 0%.
  const V truth = {10, -20, 0.5, 40, 5};
  const V pred = {11, -18, 0, 41.2, 5};
  const MetricsReport r = metrics_report(pred, truth);
  CHECK(std::abs(r.rmse - 1.1567194992737004) < 1e-12);
  CHECK(std::abs(r.r2 - 279.0 / 280.0) < 1e-12);
  CHECK(std::abs(r.max_error - 2.0) < 1e-12);
  CHECK(std::abs(r.mape_pct - 14.6) < 1e-12);
  CHECK(std::abs(r.acceptance_accuracy_pct - 40.0) < 1e-12);

  CHECK(r.rmse == rmse(pred, truth));
  CHECK(r.r2 == r_squared(pred, truth));
  CHECK(r.max_error == max_error(pred, truth));
  CHECK(r.mape_pct == mape(pred, truth));
  CHECK(r.acceptance_accuracy_pct == acceptance_accuracy(pred, truth));
}

TEST_CASE("metric properties on random data") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    V truth(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      truth[i] = rng.uniform(-50.0, 150.0);
      pred[i] = truth[i] + rng.normal() * 5.0;
    }
    const MetricsReport base = metrics_report(pred, truth);
    CHECK(base.max_error >= base.rmse);
    CHECK(base.r2 <= 1.0);

    // Permutation invariance.
    V pt = truth, pp = pred;
    std::reverse(pt.begin(), pt.end());
    std::reverse(pp.begin(), pp.end());
    const MetricsReport perm = metrics_report(pp, pt);
    CHECK(perm.rmse == doctest::Approx(base.rmse).epsilon(1e-12));
    CHECK(perm.r2 == doctest::Approx(base.r2).epsilon(1e-12));
    CHECK(perm.mape_pct == doctest::Approx(base.mape_pct).epsilon(1e-12));
    CHECK(perm.acceptance_accuracy_pct == base.acceptance_accuracy_pct);

    // Translation covariance of absolute errors.
    const double shift = rng.uniform(-10.0, 10.0);
    V st = truth, sp = pred;
    for (std::size_t i = 0; i < n; ++i) {
      st[i] += shift;
      sp[i] += shift;
    }
    CHECK(rmse(sp, st) == doctest::Approx(base.rmse).epsilon(1e-9));
    CHECK(max_error(sp, st) == doctest::Approx(base.max_error).epsilon(1e-9));

    // Monotone in the threshold.
    double prev = 0.0;
    for (double t = 0.0; t <= 50.0; t += 2.5) {
      const double acc = acceptance_accuracy(pred, truth, t);
      CHECK(acc >= prev);
      CHECK(acc <= 100.0);
      prev = acc;
    }
  }
}
