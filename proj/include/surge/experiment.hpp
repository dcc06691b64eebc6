#pragma once

// Experiment runner: dataset generation, campaigns, checkpoints, learning-curve files,
// evaluation reports and strategy comparison. The command-line tool is a thin wrapper.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "surge/active_learning.hpp"
#include "surge/ensemble.hpp"
#include "surge/metrics.hpp"
#include "surge/pump_data.hpp"

namespace surge {

std::string_view version();

// ---------------------------------------------------------------------------
// Learning-curve files

inline constexpr const char* kCurveHeader =
    "iteration,train_size,rmse,r2,mape_pct,max_error,acceptance_pct,mean_pool_variance";

struct CurveRow {
  std::size_t iteration = 0;
  std::size_t train_size = 0;
  double rmse = 0.0;
  double r2 = 0.0;
  double mape_pct = 0.0;
  double max_error = 0.0;
  double acceptance_pct = 0.0;
  double mean_pool_variance = 0.0;

  double metric(std::string_view name) const;
};

std::string curve_to_csv(const LearningCurve& curve);
void write_curve_csv(const LearningCurve& curve, const std::filesystem::path& path);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Checkpoints
//
// Binary layout, all integers and doubles little-endian:
//   "SURGECKP" | u32 format version | u64 header length | header JSON
//   | every member's parameters as f64 in parameter_blocks() order | u64 FNV-1a of the payload
// The header carries architecture, member seeds, scaler and scaler_ref.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Ensemble ensemble;
  Scaler scaler;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Commands

struct ExperimentConfig {
  std::optional<GeneratorConfig> generate;  // used when data_csv is empty
  std::filesystem::path data_csv;
  ALConfig al;
  std::vector<Strategy> strategies = {Strategy::TopVariance, Strategy::Random};
  std::vector<std::uint64_t> seeds = {0};
  std::filesystem::path out_dir = "surge_out";

  void validate() const;
};

std::string experiment_config_to_json(const ExperimentConfig& config, int indent = 2);
ExperimentConfig experiment_config_from_json(const std::string& text);

// Reads `config` back out of a manifest written by run_experiment.
ExperimentConfig load_manifest_config(const std::filesystem::path& manifest);

std::vector<PumpSample> load_experiment_data(const ExperimentConfig& config);

std::string curve_file_name(Strategy strategy, std::uint64_t seed);
std::string checkpoint_file_name(Strategy strategy, std::uint64_t seed);

struct RunRecord {
  Strategy strategy = Strategy::TopVariance;
  std::uint64_t seed = 0;
  std::filesystem::path curve;
  std::filesystem::path selected;
  std::filesystem::path checkpoint;
  double seconds = 0.0;
  StopReason stop_reason = StopReason::Iterations;
};

struct RunSummary {
  std::vector<RunRecord> runs;
  std::filesystem::path manifest;
};

// Validates everything, including AL feasibility against the dataset, before training anything.
RunSummary run_experiment(const ExperimentConfig& config);

std::size_t generate_dataset(const GeneratorConfig& config, const std::filesystem::path& out);

MetricsReport evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::filesystem::path& data_csv,
                                  const MetricsOptions& options = {});
std::string report_to_json(const MetricsReport& report);
std::string format_report(const MetricsReport& report);

struct ComparisonRow {
  std::size_t train_size = 0;
  double al_mean = 0.0;
  double al_std = 0.0;
  std::size_t al_runs = 0;
  double baseline_mean = 0.0;
  double baseline_std = 0.0;
  std::size_t baseline_runs = 0;
  double delta = 0.0;  // al_mean - baseline_mean
};

struct Comparison {
  std::string metric;
  std::vector<ComparisonRow> rows;
};

// Aligns all curves on the intersection of their train_size grids (ascending) and reports
// per-budget mean and sample standard deviation across files of each group.
Comparison compare_curves(const std::vector<std::filesystem::path>& al_files,
                          const std::vector<std::filesystem::path>& baseline_files, const std::string& metric = "rmse");

// Splits curve files into (top_variance, random) groups by their file names.
std::pair<std::vector<std::filesystem::path>, std::vector<std::filesystem::path>> group_curve_files(
    const std::vector<std::filesystem::path>& files);

std::string comparison_to_csv(const Comparison& comparison);
std::string format_comparison(const Comparison& comparison);

}  // namespace surge
