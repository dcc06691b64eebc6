#pragma once

// Regression error metrics on surge distance, in physical units (percent).

#include <span>

namespace surge {

struct MetricsOptions {
  double threshold_pct = 4.0;  // acceptance band, relative error in percent
  double mape_floor = 1.0;     // lower bound of the relative-error denominator
};

struct MetricsReport {
  double r2 = 0.0;
  double rmse = 0.0;
  double max_error = 0.0;
  double mape_pct = 0.0;
  double acceptance_accuracy_pct = 0.0;
  std::size_t n = 0;
  double threshold_pct = 4.0;
  double mape_floor = 1.0;
};

double r_squared(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);
double max_error(std::span<const double> pred, std::span<const double> truth);

// 100 * mean(|y - p| / max(|y|, floor))
double mape(std::span<const double> pred, std::span<const double> truth, double floor = 1.0);

// Share of samples (percent) whose relative error 100*|y - p| / max(|y|, floor) is within threshold_pct.
double acceptance_accuracy(std::span<const double> pred, std::span<const double> truth, double threshold_pct = 4.0,
                           double floor = 1.0);

MetricsReport metrics_report(std::span<const double> pred, std::span<const double> truth,
                             const MetricsOptions& options = {});

}  // namespace surge
