#include "surge/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "surge/errors.hpp"

#ifndef SURGE_VERSION
#define SURGE_VERSION "0.0.0"
#endif

namespace surge {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view version() { return SURGE_VERSION; }

namespace {

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Curves

double CurveRow::metric(std::string_view name) const {
  if (name == "rmse") return rmse;
  if (name == "r2") return r2;
  if (name == "mape_pct" || name == "mape") return mape_pct;
  if (name == "max_error") return max_error;
  if (name == "acceptance_pct" || name == "acceptance") return acceptance_pct;
  if (name == "mean_pool_variance") return mean_pool_variance;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

std::string curve_to_csv(const LearningCurve& curve) {
  std::string out = kCurveHeader;
  out += '\n';
  for (const auto& r : curve.records) {
    out += std::to_string(r.iteration);
    out += ',';
    out += std::to_string(r.train_size);
    for (const double v : {r.test_rmse, r.test_r2, r.test_mape, r.test_max_error, r.acceptance_accuracy,
                           r.mean_pool_variance}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

void write_curve_csv(const LearningCurve& curve, const fs::path& path) { write_file(path, curve_to_csv(curve)); }

std::vector<CurveRow> read_curve_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<CurveRow> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto parse_double = [&](std::string_view cell) {
    double v = 0.0;
    const std::string s(cell);
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
  };
  auto parse_count = [&](std::string_view cell) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad count '" + std::string(cell) + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCurveHeader) throw ParseError(path.string() + ": not a learning-curve file (header mismatch)");
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != 8) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 8 cells");
    CurveRow row;
    row.iteration = parse_count(cells[0]);
    row.train_size = parse_count(cells[1]);
    row.rmse = parse_double(cells[2]);
    row.r2 = parse_double(cells[3]);
    row.mape_pct = parse_double(cells[4]);
    row.max_error = parse_double(cells[5]);
    row.acceptance_pct = parse_double(cells[6]);
    row.mean_pool_variance = parse_double(cells[7]);
    rows.push_back(row);
  }
  if (line_no == 0) throw ParseError(path.string() + ": empty curve file");
  return rows;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kMagic = "SURGECKP";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xffU);
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xffU);
}

std::uint64_t get_u64(std::string_view bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  return v;
}

json arch_to_json(const Architecture& arch) {
  return {{"input_dim", arch.input_dim},
          {"hidden_dims", arch.hidden_dims},
          {"tanh_scale", arch.tanh_scale},
          {"variance_floor", arch.variance_floor}};
}

Architecture arch_from_json(const json& j) {
  Architecture arch;
  arch.input_dim = j.at("input_dim").get<int>();
  arch.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
  arch.tanh_scale = j.at("tanh_scale").get<double>();
  arch.variance_floor = j.at("variance_floor").get<double>();
  return arch;
}

json scaler_to_json(const Scaler& s) {
  return {{"feature_mean", s.feature_mean},
          {"feature_std", s.feature_std},
          {"target_mean", s.target_mean},
          {"target_std", s.target_std}};
}

Scaler scaler_from_json(const json& j) {
  Scaler s;
  const auto mean = j.at("feature_mean").get<std::vector<double>>();
  const auto stdev = j.at("feature_std").get<std::vector<double>>();
  if (mean.size() != kNumFeatures || stdev.size() != kNumFeatures) {
    throw CheckpointError("checkpoint: scaler has " + std::to_string(mean.size()) + " features, expected " +
                          std::to_string(kNumFeatures));
  }
  std::copy(mean.begin(), mean.end(), s.feature_mean.begin());
  std::copy(stdev.begin(), stdev.end(), s.feature_std.begin());
  s.target_mean = j.at("target_mean").get<double>();
  s.target_std = j.at("target_std").get<double>();
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const fs::path& path) {
  const Ensemble& ensemble = checkpoint.ensemble;
  if (ensemble.members.empty()) throw InvalidArgument("save_checkpoint: empty ensemble");
  json header = {{"format", "surge-ensemble"},
                 {"tool_version", std::string(version())},
                 {"architecture", arch_to_json(ensemble.arch())},
                 {"n_members", ensemble.members.size()},
                 {"member_seeds", ensemble.member_seeds},
                 {"parameters_per_member", ensemble.members.front().parameter_count()},
                 {"scaler", scaler_to_json(checkpoint.scaler)},
                 {"scaler_ref", ensemble.scaler_ref}};
  const std::string header_text = header.dump();

  std::string payload;
  for (const auto& member : ensemble.members) {
    if (!(member.arch == ensemble.arch())) throw InvalidArgument("save_checkpoint: members differ in architecture");
    for (const auto block : parameter_blocks(member)) {
      for (const double v : block) put_u64(payload, std::bit_cast<std::uint64_t>(v));
    }
  }

  std::string out(kMagic);
  put_u32(out, kCheckpointVersion);
  put_u64(out, header_text.size());
  out += header_text;
  out += payload;
  put_u64(out, fnv1a(payload));
  write_file(path, out);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  const std::string where = "checkpoint " + path.string() + ": ";
  const std::size_t prefix = kMagic.size() + 4 + 8;
  if (bytes.size() < prefix || std::string_view(bytes).substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError(where + "not a checkpoint file (bad magic or truncated)");
  }
  const std::uint32_t file_version = get_u32(bytes, kMagic.size());
  if (file_version != kCheckpointVersion) {
    throw CheckpointError(where + "unsupported format version " + std::to_string(file_version));
  }
  const std::uint64_t header_len = get_u64(bytes, kMagic.size() + 4);
  if (header_len > bytes.size() - prefix) throw CheckpointError(where + "truncated header");

  json header;
  try {
    header = json::parse(std::string_view(bytes).substr(prefix, header_len));
  } catch (const json::exception& e) {
    throw CheckpointError(where + "corrupt header: " + e.what());
  }

  Checkpoint checkpoint;
  std::size_t n_members = 0;
  std::size_t per_member = 0;
  Architecture arch;
  try {
    arch = arch_from_json(header.at("architecture"));
    n_members = header.at("n_members").get<std::size_t>();
    per_member = header.at("parameters_per_member").get<std::size_t>();
    checkpoint.ensemble.member_seeds = header.at("member_seeds").get<std::vector<std::uint64_t>>();
    checkpoint.ensemble.scaler_ref = header.at("scaler_ref").get<std::string>();
    checkpoint.scaler = scaler_from_json(header.at("scaler"));
  } catch (const json::exception& e) {
    throw CheckpointError(where + "incomplete header: " + e.what());
  }
  if (n_members == 0 || checkpoint.ensemble.member_seeds.size() != n_members) {
    throw CheckpointError(where + "member count and seed list disagree");
  }

  NetworkParams shape;
  try {
    shape = init_network(arch, 0);
  } catch (const std::exception& e) {
    throw CheckpointError(where + "invalid architecture: " + e.what());
  }
  if (shape.parameter_count() != per_member) {
    throw CheckpointError(where + "architecture implies " + std::to_string(shape.parameter_count()) +
                          " parameters per member but the header records " + std::to_string(per_member));
  }
  if (checkpoint.scaler.fingerprint() != checkpoint.ensemble.scaler_ref) {
    throw CheckpointError(where + "scaler does not match scaler_ref " + checkpoint.ensemble.scaler_ref);
  }

  const std::size_t payload_offset = prefix + header_len;
  const std::size_t payload_len = n_members * per_member * 8;
  if (bytes.size() != payload_offset + payload_len + 8) {
    throw CheckpointError(where + "truncated or oversized parameter payload (expected " +
                          std::to_string(payload_offset + payload_len + 8) + " bytes, found " +
                          std::to_string(bytes.size()) + ")");
  }
  const std::string_view payload = std::string_view(bytes).substr(payload_offset, payload_len);
  if (fnv1a(payload) != get_u64(bytes, payload_offset + payload_len)) {
    throw CheckpointError(where + "parameter checksum mismatch");
  }

  std::size_t offset = 0;
  for (std::size_t m = 0; m < n_members; ++m) {
    NetworkParams member = shape;
    for (auto block : parameter_blocks(member)) {
      for (double& v : block) {
        v = std::bit_cast<double>(get_u64(payload, offset));
        offset += 8;
      }
    }
    checkpoint.ensemble.members.push_back(std::move(member));
  }
  return checkpoint;
}

// ---------------------------------------------------------------------------
// Config serialization

namespace {

json generator_to_json(const GeneratorConfig& g) {
  auto range = [](const Range& r) { return json::array({r.lo, r.hi}); };
  return {{"n_samples", g.n_samples},     {"seed", g.seed},
          {"tin", range(g.tin)},          {"pin", range(g.pin)},
          {"n_speed", range(g.n_speed)},  {"phi", range(g.phi)},
          {"noise_scale", g.noise_scale}, {"heteroscedastic", g.heteroscedastic},
          {"n_ref", g.n_ref},             {"dp_coeff", g.dp_coeff},
          {"power_coeff", g.power_coeff}};
}

GeneratorConfig generator_from_json(const json& j) {
  auto range = [](const json& r) { return Range{r.at(0).get<double>(), r.at(1).get<double>()}; };
  GeneratorConfig g;
  g.n_samples = j.at("n_samples").get<int>();
  g.seed = j.at("seed").get<std::uint64_t>();
  g.tin = range(j.at("tin"));
  g.pin = range(j.at("pin"));
  g.n_speed = range(j.at("n_speed"));
  g.phi = range(j.at("phi"));
  g.noise_scale = j.at("noise_scale").get<double>();
  g.heteroscedastic = j.at("heteroscedastic").get<bool>();
  g.n_ref = j.at("n_ref").get<double>();
  g.dp_coeff = j.at("dp_coeff").get<double>();
  g.power_coeff = j.at("power_coeff").get<double>();
  return g;
}

json al_to_json(const ALConfig& c) {
  const TrainConfig& t = c.train_config;
  return {{"initial_train_size", c.initial_train_size},
          {"candidate_multiplier", c.candidate_multiplier},
          {"batch_k", c.batch_k},
          {"iterations", c.iterations},
          {"total_budget", c.total_budget},
          {"test_fraction", c.test_fraction},
          {"n_members", c.n_members},
          {"warm_start", c.warm_start},
          {"allow_pool_exhaustion", c.allow_pool_exhaustion},
          {"architecture", arch_to_json(c.arch)},
          {"train",
           {{"base_lr", t.base_lr},
            {"decay_factor", t.decay_factor},
            {"decay_start_epoch", t.decay_start_epoch},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size}}},
          {"metrics", {{"threshold_pct", c.metrics.threshold_pct}, {"mape_floor", c.metrics.mape_floor}}}};
}

ALConfig al_from_json(const json& j) {
  ALConfig c;
  c.initial_train_size = j.at("initial_train_size").get<std::size_t>();
  c.candidate_multiplier = j.at("candidate_multiplier").get<std::size_t>();
  c.batch_k = j.at("batch_k").get<std::size_t>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.total_budget = j.at("total_budget").get<std::size_t>();
  c.test_fraction = j.at("test_fraction").get<double>();
  c.n_members = j.at("n_members").get<int>();
  c.warm_start = j.at("warm_start").get<bool>();
  c.allow_pool_exhaustion = j.at("allow_pool_exhaustion").get<bool>();
  c.arch = arch_from_json(j.at("architecture"));
  const json& t = j.at("train");
  c.train_config.base_lr = t.at("base_lr").get<double>();
  c.train_config.decay_factor = t.at("decay_factor").get<double>();
  c.train_config.decay_start_epoch = t.at("decay_start_epoch").get<int>();
  c.train_config.epochs = t.at("epochs").get<int>();
  c.train_config.batch_size = t.at("batch_size").get<int>();
  c.metrics.threshold_pct = j.at("metrics").at("threshold_pct").get<double>();
  c.metrics.mape_floor = j.at("metrics").at("mape_floor").get<double>();
  return c;
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  if (!config.data_csv.empty()) {
    j["data"] = {{"csv", config.data_csv.string()}};
  } else {
    j["data"] = {{"generate", generator_to_json(config.generate.value_or(GeneratorConfig{}))}};
  }
  j["active_learning"] = al_to_json(config.al);
  std::vector<std::string> strategies;
  for (const auto s : config.strategies) strategies.emplace_back(to_string(s));
  j["strategies"] = strategies;
  j["seeds"] = config.seeds;
  j["out_dir"] = config.out_dir.string();
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;
  const json& data = j.at("data");
  if (data.contains("csv")) {
    config.data_csv = data.at("csv").get<std::string>();
  } else {
    config.generate = generator_from_json(data.at("generate"));
  }
  config.al = al_from_json(j.at("active_learning"));
  config.strategies.clear();
  for (const auto& s : j.at("strategies")) config.strategies.push_back(parse_strategy(s.get<std::string>()));
  config.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  config.out_dir = j.at("out_dir").get<std::string>();
  return config;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& config, int indent) {
  return config_to_json(config).dump(indent);
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  try {
    return config_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("experiment config: ") + e.what());
  }
}

ExperimentConfig load_manifest_config(const fs::path& manifest) {
  try {
    return config_from_json(json::parse(read_file(manifest)).at("config"));
  } catch (const json::exception& e) {
    throw InvalidArgument("manifest " + manifest.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw InvalidArgument("experiment: at least one strategy is required");
  if (seeds.empty()) throw InvalidArgument("experiment: at least one seed is required");
  if (out_dir.empty()) throw InvalidArgument("experiment: output directory is required");
  if (data_csv.empty()) generate.value_or(GeneratorConfig{}).validate();
  const std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw InvalidArgument("experiment: duplicate seeds");
}

std::vector<PumpSample> load_experiment_data(const ExperimentConfig& config) {
  if (!config.data_csv.empty()) return load_csv(config.data_csv);
  return generate_synthetic(config.generate.value_or(GeneratorConfig{}));
}

std::string curve_file_name(Strategy strategy, std::uint64_t seed) {
  return "curve_" + std::string(to_string(strategy)) + "_seed" + std::to_string(seed) + ".csv";
}

std::string checkpoint_file_name(Strategy strategy, std::uint64_t seed) {
  return "ensemble_" + std::string(to_string(strategy)) + "_seed" + std::to_string(seed) + ".ckpt";
}

namespace {

std::string selected_to_csv(const LearningCurve& curve) {
  std::string out = "iteration,dataset_index\n";
  for (const auto& r : curve.records) {
    for (const auto idx : r.selected_idx) out += std::to_string(r.iteration) + "," + std::to_string(idx) + "\n";
  }
  return out;
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::vector<PumpSample> samples = load_experiment_data(config);
  config.al.validate(samples.size());

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir)) {
    throw std::runtime_error("cannot create output directory " + config.out_dir.string());
  }

  RunSummary summary;
  for (const auto strategy : config.strategies) {
    for (const auto seed : config.seeds) {
      ALConfig al = config.al;
      al.seed = seed;
      const auto start = std::chrono::steady_clock::now();
      const CampaignResult result = run_campaign(samples, al, strategy);
      RunRecord record;
      record.strategy = strategy;
      record.seed = seed;
      record.stop_reason = result.curve.stop_reason;
      record.curve = config.out_dir / curve_file_name(strategy, seed);
      record.selected =
          config.out_dir / ("selected_" + std::string(to_string(strategy)) + "_seed" + std::to_string(seed) + ".csv");
      record.checkpoint = config.out_dir / checkpoint_file_name(strategy, seed);
      write_curve_csv(result.curve, record.curve);
      write_file(record.selected, selected_to_csv(result.curve));
      save_checkpoint({result.ensemble, result.scaler}, record.checkpoint);
      record.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      summary.runs.push_back(record);
    }
  }

  std::string dataset_bytes = to_csv(samples);
  json runs = json::array();
  for (const auto& r : summary.runs) {
    runs.push_back({{"strategy", to_string(r.strategy)},
                    {"seed", r.seed},
                    {"curve", r.curve.filename().string()},
                    {"selected", r.selected.filename().string()},
                    {"checkpoint", r.checkpoint.filename().string()},
                    {"stop_reason", to_string(r.stop_reason)},
                    {"seconds", r.seconds}});
  }
  const json manifest = {{"tool", "surge_al"},
                         {"version", std::string(version())},
                         {"config", config_to_json(config)},
                         {"dataset", {{"rows", samples.size()}, {"fnv1a", hex64(fnv1a(dataset_bytes))}}},
                         {"runs", runs}};
  summary.manifest = config.out_dir / "manifest.json";
  write_file(summary.manifest, manifest.dump(2) + "\n");
  return summary;
}

std::size_t generate_dataset(const GeneratorConfig& config, const fs::path& out) {
  const auto samples = generate_synthetic(config);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_csv(samples, out);
  return samples.size();
}

MetricsReport evaluate_checkpoint(const fs::path& checkpoint_path, const fs::path& data_csv,
                                  const MetricsOptions& options) {
  const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
  if (checkpoint.ensemble.arch().input_dim != kNumFeatures) {
    throw CheckpointError("checkpoint " + checkpoint_path.string() + ": network expects " +
                          std::to_string(checkpoint.ensemble.arch().input_dim) + " inputs, data has " +
                          std::to_string(kNumFeatures) + " features");
  }
  const auto samples = load_csv(data_csv);
  if (samples.empty()) throw InvalidArgument("evaluate: " + data_csv.string() + " has no rows");
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const std::vector<double> pred = predict_sd(checkpoint.ensemble, checkpoint.scaler, samples, idx);
  std::vector<double> truth(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) truth[i] = samples[i].sd;
  return metrics_report(pred, truth, options);
}

std::string report_to_json(const MetricsReport& report) {
  const json j = {{"r2", report.r2},
                  {"rmse", report.rmse},
                  {"max_error", report.max_error},
                  {"mape_pct", report.mape_pct},
                  {"acceptance_accuracy_pct", report.acceptance_accuracy_pct},
                  {"n", report.n},
                  {"threshold_pct", report.threshold_pct},
                  {"mape_floor", report.mape_floor}};
  return j.dump(2) + "\n";
}

std::string format_report(const MetricsReport& report) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "samples              %zu\n"
                "R^2                  %.6f\n"
                "RMSE                 %.6f\n"
                "Max Error            %.6f\n"
                "MAPE (%%)             %.6f\n"
                "Acceptance (+/-%g%%)  %.2f%%\n",
                report.n, report.r2, report.rmse, report.max_error, report.mape_pct, report.threshold_pct,
                report.acceptance_accuracy_pct);
  return buf;
}

std::pair<std::vector<fs::path>, std::vector<fs::path>> group_curve_files(const std::vector<fs::path>& files) {
  std::vector<fs::path> al;
  std::vector<fs::path> baseline;
  for (const auto& f : files) {
    const std::string name = f.filename().string();
    if (name.find("top_variance") != std::string::npos) {
      al.push_back(f);
    } else if (name.find("random") != std::string::npos) {
      baseline.push_back(f);
    } else {
      throw InvalidArgument("compare: cannot infer the strategy of " + f.string() +
                            " (name must contain top_variance or random; use --al/--baseline)");
    }
  }
  return {al, baseline};
}

Comparison compare_curves(const std::vector<fs::path>& al_files, const std::vector<fs::path>& baseline_files,
                          const std::string& metric) {
  if (al_files.empty() || baseline_files.empty()) {
    throw InvalidArgument("compare: need at least one active-learning and one baseline curve");
  }
  (void)CurveRow{}.metric(metric);

  struct Loaded {
    fs::path path;
    std::map<std::size_t, double> by_budget;
  };
  auto load_group = [&](const std::vector<fs::path>& files) {
    std::vector<Loaded> group;
    for (const auto& f : files) {
      Loaded l{f, {}};
      for (const auto& row : read_curve_csv(f)) l.by_budget.emplace(row.train_size, row.metric(metric));
      group.push_back(std::move(l));
    }
    return group;
  };
  const auto al = load_group(al_files);
  const auto baseline = load_group(baseline_files);

  std::set<std::size_t> common;
  bool first = true;
  for (const auto* group : {&al, &baseline}) {
    for (const auto& l : *group) {
      std::set<std::size_t> budgets;
      for (const auto& [b, v] : l.by_budget) budgets.insert(b);
      if (first) {
        common = budgets;
        first = false;
      } else {
        std::set<std::size_t> both;
        std::set_intersection(common.begin(), common.end(), budgets.begin(), budgets.end(),
                              std::inserter(both, both.begin()));
        common = std::move(both);
      }
    }
  }
  if (common.empty()) {
    std::string msg = "compare: curves share no train_size budgets;";
    for (const auto* group : {&al, &baseline}) {
      for (const auto& l : *group) {
        msg += " " + l.path.filename().string() + ": [";
        bool sep = false;
        for (const auto& [b, v] : l.by_budget) {
          msg += (sep ? "," : "") + std::to_string(b);
          sep = true;
        }
        msg += "]";
      }
    }
    throw InvalidArgument(msg);
  }

  auto stats = [](const std::vector<Loaded>& group, std::size_t budget) {
    double mean = 0.0;
    for (const auto& l : group) mean += l.by_budget.at(budget);
    mean /= static_cast<double>(group.size());
    double ss = 0.0;
    for (const auto& l : group) ss += (l.by_budget.at(budget) - mean) * (l.by_budget.at(budget) - mean);
    const double sd = group.size() > 1 ? std::sqrt(ss / static_cast<double>(group.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };

  Comparison comparison;
  comparison.metric = metric;
  for (const auto budget : common) {
    ComparisonRow row;
    row.train_size = budget;
    std::tie(row.al_mean, row.al_std) = stats(al, budget);
    std::tie(row.baseline_mean, row.baseline_std) = stats(baseline, budget);
    row.al_runs = al.size();
    row.baseline_runs = baseline.size();
    row.delta = row.al_mean - row.baseline_mean;
    comparison.rows.push_back(row);
  }
  return comparison;
}

std::string comparison_to_csv(const Comparison& comparison) {
  std::string out = "train_size,al_mean,al_std,al_runs,baseline_mean,baseline_std,baseline_runs,delta\n";
  for (const auto& r : comparison.rows) {
    out += std::to_string(r.train_size);
    for (const double v : {r.al_mean, r.al_std}) {
      out += ',';
      append_number(out, v);
    }
    out += ',' + std::to_string(r.al_runs);
    for (const double v : {r.baseline_mean, r.baseline_std}) {
      out += ',';
      append_number(out, v);
    }
    out += ',' + std::to_string(r.baseline_runs) + ',';
    append_number(out, r.delta);
    out += '\n';
  }
  return out;
}

std::string format_comparison(const Comparison& comparison) {
  std::string out = "metric: " + comparison.metric + "\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%10s  %22s  %22s  %12s\n", "budget", "top_variance", "random", "delta");
  out += buf;
  for (const auto& r : comparison.rows) {
    std::snprintf(buf, sizeof(buf), "%10zu  %10.4f +- %8.4f  %10.4f +- %8.4f  %12.4f\n", r.train_size, r.al_mean,
                  r.al_std, r.baseline_mean, r.baseline_std, r.delta);
    out += buf;
  }
  return out;
}

}  // namespace surge
