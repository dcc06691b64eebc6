// surge_al: active-learning surrogate campaigns for pump surge distance.
//
// Exit codes: 0 success, 2 usage or validation error (nothing was trained), 1 runtime failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surge/errors.hpp"
#include "surge/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

constexpr const char* kOutDirEnv = "SURGE_AL_OUT_DIR";

struct GenerateArgs {
  surge::GeneratorConfig gen;
  std::string out = "data.csv";
  bool homoscedastic = false;
};

struct RunArgs {
  std::string data;
  int n_samples = 5000;
  std::uint64_t data_seed = 0;
  double noise_scale = surge::GeneratorConfig{}.noise_scale;
  bool homoscedastic = false;
  std::vector<std::string> strategies = {"top_variance", "random"};
  std::vector<std::uint64_t> seeds = {0};
  std::string out_dir = "surge_out";
  std::string replay;
  surge::ALConfig al;
  std::vector<int> hidden = {256, 256, 256};
};

struct EvaluateArgs {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string out_dir = "surge_out";
  surge::MetricsOptions metrics;
};

struct CompareArgs {
  std::vector<std::string> files;
  std::vector<std::string> al;
  std::vector<std::string> baseline;
  std::string metric = "rmse";
  std::string out;
  std::string out_dir = "surge_out";
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

int cmd_generate(const GenerateArgs& args) {
  surge::GeneratorConfig gen = args.gen;
  gen.heteroscedastic = !args.homoscedastic;
  gen.validate();
  const fs::path out(args.out);
  const std::size_t n = surge::generate_dataset(gen, out);
  std::cout << "wrote " << n << " samples (seed " << gen.seed << ") to " << out.string() << "\n";
  return 0;
}

int cmd_run(const RunArgs& args, bool out_dir_given) {
  surge::ExperimentConfig config;
  if (!args.replay.empty()) {
    config = surge::load_manifest_config(args.replay);
    if (out_dir_given) config.out_dir = args.out_dir;
  } else {
    if (!args.data.empty()) {
      config.data_csv = args.data;
    } else {
      surge::GeneratorConfig gen;
      gen.n_samples = args.n_samples;
      gen.seed = args.data_seed;
      gen.noise_scale = args.noise_scale;
      gen.heteroscedastic = !args.homoscedastic;
      config.generate = gen;
    }
    config.al = args.al;
    config.al.arch.hidden_dims = args.hidden;
    config.strategies.clear();
    for (const auto& s : args.strategies) config.strategies.push_back(surge::parse_strategy(s));
    config.seeds = args.seeds;
    config.out_dir = args.out_dir;
  }

  // Everything that can be checked without training is checked here.
  config.validate();
  const auto samples = surge::load_experiment_data(config);
  config.al.validate(samples.size());

  const surge::RunSummary summary = surge::run_experiment(config);
  for (const auto& r : summary.runs) {
    std::cout << surge::to_string(r.strategy) << " seed " << r.seed << ": " << r.curve.string() << " ("
              << r.seconds << " s, stop: " << surge::to_string(r.stop_reason) << ")\n";
  }
  std::cout << "manifest: " << summary.manifest.string() << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
  const surge::MetricsReport report = surge::evaluate_checkpoint(args.checkpoint, args.data, args.metrics);
  std::cout << surge::format_report(report);
  const fs::path out = args.out.empty() ? fs::path(args.out_dir) / "report.json" : fs::path(args.out);
  write_text(out, surge::report_to_json(report));
  std::cout << "report: " << out.string() << "\n";
  return 0;
}

int cmd_compare(const CompareArgs& args) {
  std::vector<fs::path> al(args.al.begin(), args.al.end());
  std::vector<fs::path> baseline(args.baseline.begin(), args.baseline.end());
  if (!args.files.empty()) {
    auto [inferred_al, inferred_baseline] =
        surge::group_curve_files(std::vector<fs::path>(args.files.begin(), args.files.end()));
    al.insert(al.end(), inferred_al.begin(), inferred_al.end());
    baseline.insert(baseline.end(), inferred_baseline.begin(), inferred_baseline.end());
  }
  if (al.size() + baseline.size() < 2) throw surge::InvalidArgument("compare: need at least two curve files");
  const surge::Comparison comparison = surge::compare_curves(al, baseline, args.metric);
  std::cout << surge::format_comparison(comparison);
  const fs::path out = args.out.empty() ? fs::path(args.out_dir) / "comparison.csv" : fs::path(args.out);
  write_text(out, surge::comparison_to_csv(comparison));
  std::cout << "comparison: " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-learning surrogate for pump surge distance.\n"
               "Default output directory may be set with the " +
               std::string(kOutDirEnv) + " environment variable."};
  app.set_config("--config", "", "Read options from a TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(surge::version()));

  GenerateArgs gen_args;
  auto* gen = app.add_subcommand("generate", "Write a synthetic pump design-of-experiment CSV");
  gen->add_option("--n", gen_args.gen.n_samples, "Number of samples")->check(CLI::Range(1, 100000000));
  gen->add_option("--seed", gen_args.gen.seed, "Generator seed");
  gen->add_option("--out", gen_args.out, "Output CSV path");
  gen->add_option("--noise-scale", gen_args.gen.noise_scale, "Relative noise on delta_p and power");
  gen->add_flag("--homoscedastic", gen_args.homoscedastic, "Use constant noise instead of surge-dependent noise");
  gen->add_option("--phi-lo", gen_args.gen.phi.lo, "Lower flow coefficient bound");
  gen->add_option("--phi-hi", gen_args.gen.phi.hi, "Upper flow coefficient bound");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run active-learning and baseline campaigns");
  run->add_option("--data", run_args.data, "Dataset CSV; a synthetic set is generated when omitted")
      ->check(CLI::ExistingFile);
  run->add_option("--n", run_args.n_samples, "Synthetic dataset size")->check(CLI::Range(1, 100000000));
  run->add_option("--data-seed", run_args.data_seed, "Synthetic dataset seed");
  run->add_option("--noise-scale", run_args.noise_scale, "Synthetic dataset noise scale");
  run->add_flag("--homoscedastic", run_args.homoscedastic, "Synthetic dataset with constant noise");
  run->add_option("--strategy", run_args.strategies, "top_variance and/or random")->delimiter(',');
  run->add_option("--seed", run_args.seeds, "Campaign seeds, comma separated")->delimiter(',');
  auto* run_out = run->add_option("--out-dir", run_args.out_dir, "Output directory")->envname(kOutDirEnv);
  run->add_option("--replay", run_args.replay, "Re-run the configuration recorded in a manifest.json")
      ->check(CLI::ExistingFile);
  run->add_option("--initial", run_args.al.initial_train_size, "Initial training set size");
  run->add_option("--m", run_args.al.candidate_multiplier, "Candidate multiplier M (M*K candidates per step)");
  run->add_option("--k", run_args.al.batch_k, "Points acquired per iteration");
  run->add_option("--iterations", run_args.al.iterations, "Acquisition iterations");
  run->add_option("--budget", run_args.al.total_budget, "Maximum training set size");
  run->add_option("--test-fraction", run_args.al.test_fraction, "Held-out test fraction");
  run->add_option("--members", run_args.al.n_members, "Ensemble size");
  run->add_option("--hidden", run_args.hidden, "Hidden layer widths, comma separated")->delimiter(',');
  run->add_option("--tanh-scale", run_args.al.arch.tanh_scale, "Mean head saturation bound (normalized units)");
  run->add_option("--variance-floor", run_args.al.arch.variance_floor, "Variance head floor");
  run->add_option("--epochs", run_args.al.train_config.epochs, "Epochs per (re)training");
  run->add_option("--batch-size", run_args.al.train_config.batch_size, "Mini-batch size");
  run->add_option("--lr", run_args.al.train_config.base_lr, "Base learning rate");
  run->add_option("--lr-decay", run_args.al.train_config.decay_factor, "Per-epoch decay factor");
  run->add_option("--decay-start", run_args.al.train_config.decay_start_epoch, "Last epoch at the base rate");
  run->add_flag("!--cold-start", run_args.al.warm_start, "Retrain from scratch every iteration");
  run->add_flag("--allow-pool-exhaustion", run_args.al.allow_pool_exhaustion,
                "Run until the pool is empty instead of rejecting the config");
  run->add_option("--threshold", run_args.al.metrics.threshold_pct, "Acceptance band in percent");
  run->add_option("--floor", run_args.al.metrics.mape_floor, "Relative-error denominator floor");

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate", "Evaluate an ensemble checkpoint on a dataset CSV");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint file")->required();
  eval->add_option("--data", eval_args.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", eval_args.out, "Report JSON path (default <out-dir>/report.json)");
  eval->add_option("--out-dir", eval_args.out_dir, "Output directory")->envname(kOutDirEnv);
  eval->add_option("--threshold", eval_args.metrics.threshold_pct, "Acceptance band in percent");
  eval->add_option("--floor", eval_args.metrics.mape_floor, "Relative-error denominator floor");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Compare learning curves across strategies and seeds");
  cmp->add_option("files", cmp_args.files, "Curve files; strategy inferred from the file name");
  cmp->add_option("--al", cmp_args.al, "Active-learning curve files")->delimiter(',');
  cmp->add_option("--baseline", cmp_args.baseline, "Baseline curve files")->delimiter(',');
  cmp->add_option("--metric", cmp_args.metric, "rmse, r2, mape_pct, max_error or acceptance_pct");
  cmp->add_option("--out", cmp_args.out, "Comparison CSV path (default <out-dir>/comparison.csv)");
  cmp->add_option("--out-dir", cmp_args.out_dir, "Output directory")->envname(kOutDirEnv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_args);
    if (run->parsed()) return cmd_run(run_args, run_out->count() > 0 || std::getenv(kOutDirEnv) != nullptr);
    if (eval->parsed()) return cmd_evaluate(eval_args);
    if (cmp->parsed()) return cmd_compare(cmp_args);
  } catch (const surge::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const surge::DegenerateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
