#include "surge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "surge/errors.hpp"

namespace surge {

namespace {

void check_pairs(std::span<const double> pred, std::span<const double> truth, const char* what) {
  if (pred.size() != truth.size()) {
    throw ShapeError(std::string(what) + ": prediction and truth lengths differ (" + std::to_string(pred.size()) +
                     " vs " + std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw InvalidArgument(std::string(what) + ": empty input");
}

void check_floor(double floor) {
  if (!(floor > 0.0)) throw InvalidArgument("relative error floor must be positive");
}

double relative_error_pct(double p, double y, double floor) { return 100.0 * std::abs(y - p) / std::max(std::abs(y), floor); }

}  // namespace

double r_squared(std::span<const double> pred, std::span<const double> truth) {
  check_pairs(pred, truth, "r_squared");
  double mean = 0.0;
  for (const double y : truth) mean += y;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (!(ss_tot > 0.0)) throw DegenerateError("r_squared: truth is constant");
  return 1.0 - ss_res / ss_tot;
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pairs(pred, truth, "rmse");
  double ss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) ss += (truth[i] - pred[i]) * (truth[i] - pred[i]);
  return std::sqrt(ss / static_cast<double>(truth.size()));
}

double max_error(std::span<const double> pred, std::span<const double> truth) {
  check_pairs(pred, truth, "max_error");
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) worst = std::max(worst, std::abs(truth[i] - pred[i]));
  return worst;
}

double mape(std::span<const double> pred, std::span<const double> truth, double floor) {
  check_pairs(pred, truth, "mape");
  check_floor(floor);
  double total = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) total += relative_error_pct(pred[i], truth[i], floor);
  return total / static_cast<double>(truth.size());
}

double acceptance_accuracy(std::span<const double> pred, std::span<const double> truth, double threshold_pct,
                           double floor) {
  check_pairs(pred, truth, "acceptance_accuracy");
  check_floor(floor);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (relative_error_pct(pred[i], truth[i], floor) <= threshold_pct) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

MetricsReport metrics_report(std::span<const double> pred, std::span<const double> truth,
                             const MetricsOptions& options) {
  MetricsReport report;
  report.r2 = r_squared(pred, truth);
  report.rmse = rmse(pred, truth);
  report.max_error = max_error(pred, truth);
  report.mape_pct = mape(pred, truth, options.mape_floor);
  report.acceptance_accuracy_pct = acceptance_accuracy(pred, truth, options.threshold_pct, options.mape_floor);
  report.n = truth.size();
  report.threshold_pct = options.threshold_pct;
  report.mape_floor = options.mape_floor;
  return report;
}

}  // namespace surge
