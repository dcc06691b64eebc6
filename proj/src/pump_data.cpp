#include "surge/pump_data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "surge/errors.hpp"
#include "surge/random.hpp"

namespace surge {

double flow_coefficient(double qin, double n_speed) {
  if (!(n_speed > 0.0)) throw DomainError("flow_coefficient: n_speed must be positive");
  return qin / (kFlowConstant * n_speed);
}

double surge_distance(double qin, double n_speed) {
  const double phi = flow_coefficient(qin, n_speed);
  return 100.0 * (phi - kPhiSurge) / kPhiSurge;
}

void GeneratorConfig::validate() const {
  if (n_samples < 1) throw InvalidArgument("generator: n_samples must be >= 1");
  auto check = [](const Range& r, const char* name) {
    if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo < r.hi)) {
      throw InvalidArgument(std::string("generator: degenerate range for ") + name);
    }
  };
  check(tin, "tin");
  check(pin, "pin");
  check(n_speed, "n_speed");
  check(phi, "phi");
  if (!(n_speed.lo > 0.0)) throw InvalidArgument("generator: n_speed range must be positive");
  if (!(phi.lo > 0.0)) throw InvalidArgument("generator: phi range must be positive");
  if (!(noise_scale >= 0.0)) throw InvalidArgument("generator: noise_scale must be non-negative");
  if (!(n_ref > 0.0 && dp_coeff > 0.0 && power_coeff > 0.0)) {
    throw InvalidArgument("generator: map constants must be positive");
  }
}

PumpSample generate_sample(const GeneratorConfig& config, std::uint64_t index) {
  Rng rng(derive_seed(config.seed, index));
  PumpSample s;
  s.tin = rng.uniform(config.tin.lo, config.tin.hi);
  s.pin = rng.uniform(config.pin.lo, config.pin.hi);
  s.n_speed = rng.uniform(config.n_speed.lo, config.n_speed.hi);
  const double phi = rng.uniform(config.phi.lo, config.phi.hi);

  const double qin = kFlowConstant * s.n_speed * phi;
  s.qin = qin;
  s.sd = surge_distance(qin, s.n_speed);

  const double closeness = 1.0 - phi / config.phi.hi;
  const double noise_std = config.heteroscedastic ? config.noise_scale * (1.0 + 2.0 * closeness) : config.noise_scale;
  const double e1 = noise_std * rng.normal();
  const double e2 = noise_std * rng.normal();
  const double speed_ratio = s.n_speed / config.n_ref;
  s.delta_p = config.dp_coeff * speed_ratio * speed_ratio * closeness * (1.0 + e1);
  s.power = config.power_coeff * speed_ratio * speed_ratio * speed_ratio * phi * (1.0 + e2);
  return s;
}

std::vector<PumpSample> generate_synthetic(const GeneratorConfig& config) {
  config.validate();
  std::vector<PumpSample> samples;
  samples.reserve(static_cast<std::size_t>(config.n_samples));
  for (int i = 0; i < config.n_samples; ++i) samples.push_back(generate_sample(config, static_cast<std::uint64_t>(i)));
  return samples;
}

namespace {

constexpr std::array<std::string_view, 7> kColumns = {"tin_K", "pin_bar", "n_rpm", "dp_bar", "power_kW", "qin", "sd_pct"};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(std::string_view cell, std::size_t line_no, std::string_view column) {
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError("csv line " + std::to_string(line_no) + ", column " + std::string(column) +
                     ": not a finite number: '" + std::string(cell) + "'");
  }
  return value;
}

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

}  // namespace

std::vector<PumpSample> parse_csv(std::string_view text) {
  std::vector<PumpSample> samples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!have_header) {
      if (line != kCsvHeader) {
        const auto cells = split_commas(line);
        for (const auto column : kColumns) {
          if (std::find(cells.begin(), cells.end(), column) == cells.end()) {
            throw ParseError("csv line 1: missing column '" + std::string(column) + "' (expected header '" +
                             kCsvHeader + "')");
          }
        }
        throw ParseError(std::string("csv line 1: columns out of order, expected '") + kCsvHeader + "'");
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != kColumns.size()) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(kColumns.size()) +
                       " cells, found " + std::to_string(cells.size()));
    }
    PumpSample s;
    s.tin = parse_cell(cells[0], line_no, kColumns[0]);
    s.pin = parse_cell(cells[1], line_no, kColumns[1]);
    s.n_speed = parse_cell(cells[2], line_no, kColumns[2]);
    s.delta_p = parse_cell(cells[3], line_no, kColumns[3]);
    s.power = parse_cell(cells[4], line_no, kColumns[4]);
    if (!cells[5].empty()) s.qin = parse_cell(cells[5], line_no, kColumns[5]);
    s.sd = parse_cell(cells[6], line_no, kColumns[6]);
    samples.push_back(s);
  }
  if (!have_header) throw ParseError("csv: empty file, header missing");
  return samples;
}

std::vector<PumpSample> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("csv: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str());
}

std::string to_csv(std::span<const PumpSample> samples) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& s : samples) {
    append_number(out, s.tin);
    out += ',';
    append_number(out, s.pin);
    out += ',';
    append_number(out, s.n_speed);
    out += ',';
    append_number(out, s.delta_p);
    out += ',';
    append_number(out, s.power);
    out += ',';
    if (s.qin) append_number(out, *s.qin);
    out += ',';
    append_number(out, s.sd);
    out += '\n';
  }
  return out;
}

void save_csv(std::span<const PumpSample> samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("csv: cannot write " + path.string());
  const std::string text = to_csv(samples);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

std::array<double, kNumFeatures> Scaler::apply_features(const PumpSample& sample) const {
  auto f = sample.features();
  for (int j = 0; j < kNumFeatures; ++j) f[j] = (f[j] - feature_mean[j]) / feature_std[j];
  return f;
}

std::string Scaler::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const double v : feature_mean) feed(v);
  for (const double v : feature_std) feed(v);
  feed(target_mean);
  feed(target_std);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "scaler-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scaler fit_scaler(std::span<const PumpSample> samples, std::span<const std::size_t> train_idx) {
  if (train_idx.size() < 2) throw InvalidArgument("fit_scaler: need at least two training samples");
  const double n = static_cast<double>(train_idx.size());
  std::array<double, kNumFeatures + 1> mean{};
  for (const auto i : train_idx) {
    if (i >= samples.size()) throw InvalidArgument("fit_scaler: index out of range");
    const auto f = samples[i].features();
    for (int j = 0; j < kNumFeatures; ++j) mean[j] += f[j];
    mean[kNumFeatures] += samples[i].sd;
  }
  for (auto& m : mean) m /= n;
  std::array<double, kNumFeatures + 1> var{};
  for (const auto i : train_idx) {
    const auto f = samples[i].features();
    for (int j = 0; j < kNumFeatures; ++j) var[j] += (f[j] - mean[j]) * (f[j] - mean[j]);
    const double d = samples[i].sd - mean[kNumFeatures];
    var[kNumFeatures] += d * d;
  }
  static constexpr std::array<std::string_view, kNumFeatures + 1> names = {"tin", "pin", "n_speed",
                                                                            "delta_p", "power", "sd"};
  Scaler scaler;
  for (int j = 0; j <= kNumFeatures; ++j) {
    const double sd = std::sqrt(var[j] / n);
    if (!(sd > 0.0)) throw DegenerateError("fit_scaler: column '" + std::string(names[j]) + "' is constant");
    if (j < kNumFeatures) {
      scaler.feature_mean[j] = mean[j];
      scaler.feature_std[j] = sd;
    } else {
      scaler.target_mean = mean[j];
      scaler.target_std = sd;
    }
  }
  return scaler;
}

Eigen::MatrixXd feature_matrix(const Scaler& scaler, std::span<const PumpSample> samples,
                               std::span<const std::size_t> idx) {
  Eigen::MatrixXd x(kNumFeatures, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const auto f = scaler.apply_features(samples[idx[c]]);
    for (int j = 0; j < kNumFeatures; ++j) x(j, static_cast<Eigen::Index>(c)) = f[j];
  }
  return x;
}

Eigen::VectorXd target_vector(const Scaler& scaler, std::span<const PumpSample> samples,
                              std::span<const std::size_t> idx) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) y[static_cast<Eigen::Index>(c)] = scaler.apply_target(samples[idx[c]].sd);
  return y;
}

}  // namespace surge
