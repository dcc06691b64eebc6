#pragma once

// Pump operating-point data: surge-distance physics, a synthetic design-of-experiment
// generator, CSV persistence, and z-score scaling.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace surge {

inline constexpr double kPhiSurge = 0.076;
inline constexpr double kFlowConstant = 2.93e-3;
inline constexpr int kNumFeatures = 5;

struct PumpSample {
  double tin = 0.0;      // inlet temperature, K
  double pin = 0.0;      // inlet pressure, bar
  double n_speed = 0.0;  // rotational speed, rpm
  double delta_p = 0.0;  // Pin - Pout, bar
  double power = 0.0;    // kW
  double sd = 0.0;       // surge distance, %
  std::optional<double> qin;

  // Model inputs in canonical order (tin, pin, n_speed, delta_p, power).
  std::array<double, kNumFeatures> features() const { return {tin, pin, n_speed, delta_p, power}; }
};

// phi = qin / (2.93e-3 * n_speed)
double flow_coefficient(double qin, double n_speed);

// SD = 100 * (phi - 0.076) / 0.076, in percent
double surge_distance(double qin, double n_speed);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

/// Synthetic operating map.
///
/// Latent draws per sample: tin, pin, n_speed and phi uniform on their ranges. Then
///   qin     = 2.93e-3 * n_speed * phi
///   sd      = surge_distance(qin, n_speed)
///   delta_p = dp_coeff    * (n/n_ref)^2 * (1 - phi/phi_hi) * (1 + e1)
///   power   = power_coeff * (n/n_ref)^3 * phi               * (1 + e2)
/// with e1, e2 ~ N(0, s^2). s = noise_scale when homoscedastic, otherwise
/// s = noise_scale * (1 + 2 * (1 - phi/phi_hi)), so readings are noisier near surge.
///
/// Units: qin is expressed in the unit implied by the 2.93e-3 flow constant with n in rpm,
/// so that phi is dimensionless. Tin and Pin do not enter the map.
struct GeneratorConfig {
  int n_samples = 5000;
  std::uint64_t seed = 0;
  Range tin{293.15, 353.15};
  Range pin{10.0, 100.0};
  Range n_speed{1500.0, 6000.0};
  Range phi{0.04, 0.20};
  double noise_scale = 0.01;
  bool heteroscedastic = true;
  double n_ref = 3600.0;
  double dp_coeff = 40.0;      // bar at n_ref and zero flow
  double power_coeff = 8000.0;  // kW per unit phi at n_ref

  void validate() const;
};

// Sample i depends only on (seed, i), so any sharding of the index range yields the same rows.
PumpSample generate_sample(const GeneratorConfig& config, std::uint64_t index);
std::vector<PumpSample> generate_synthetic(const GeneratorConfig& config);

inline constexpr const char* kCsvHeader = "tin_K,pin_bar,n_rpm,dp_bar,power_kW,qin,sd_pct";

std::vector<PumpSample> load_csv(const std::filesystem::path& path);
std::vector<PumpSample> parse_csv(std::string_view text);
void save_csv(std::span<const PumpSample> samples, const std::filesystem::path& path);
std::string to_csv(std::span<const PumpSample> samples);

// Per-column z-score statistics (population standard deviation).
struct Scaler {
  std::array<double, kNumFeatures> feature_mean{};
  std::array<double, kNumFeatures> feature_std{};
  double target_mean = 0.0;
  double target_std = 1.0;

  std::array<double, kNumFeatures> apply_features(const PumpSample& sample) const;
  double apply_target(double sd) const { return (sd - target_mean) / target_std; }
  double invert_target(double value) const { return value * target_std + target_mean; }
  // Variance in normalized units to variance in SD units (%^2).
  double invert_variance(double variance) const { return variance * target_std * target_std; }

  // Stable identifier derived from the exact bit patterns of the statistics.
  std::string fingerprint() const;

  bool operator==(const Scaler&) const = default;
};

Scaler fit_scaler(std::span<const PumpSample> samples, std::span<const std::size_t> train_idx);

// Normalized design matrix (kNumFeatures x |idx|) and targets for the selected rows.
Eigen::MatrixXd feature_matrix(const Scaler& scaler, std::span<const PumpSample> samples,
                               std::span<const std::size_t> idx);
Eigen::VectorXd target_vector(const Scaler& scaler, std::span<const PumpSample> samples,
                              std::span<const std::size_t> idx);

}  // namespace surge
