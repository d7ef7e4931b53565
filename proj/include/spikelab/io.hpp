#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spikelab/fluctuations.hpp"
#include "spikelab/model.hpp"
#include "spikelab/quadrature.hpp"
#include "spikelab/stats.hpp"

namespace spikelab::io {

// Shortest round-trippable decimal rendering (printf %.17g trimmed via %g
// promotion), '.' decimal point regardless of locale.
std::string format_double(double x);

// FNV-1a 64-bit content hash as a 16-digit lowercase hex string; used to pin
// config files inside run manifests.
std::string fnv1a_hex(const std::string& text);

// ---- config files -------------------------------------------------------
// JSON schema (version 1):
//   {
//     "schema_version": 1,
//     "gamma_sq": 4.0, "n": 2000, "seed": 1,
//     "spikes": [{"alpha": 4.0, "multiplicity": 2}, ...],
//     "family": {"kind": "gaussian"}
//   }
// Families: gaussian | rademacher | uniform_sym | scale_mixture_gaussian.
// The mixture family takes "r_sq_values": [a, b] and "r_sq_weights": [wa, wb]
// with wa + wb = 1. "seed" is optional (default 1). Parse or schema problems
// throw std::invalid_argument.
struct LoadedConfig {
  ModelConfig config;
  std::uint64_t seed = 1;
  int schema_version = 1;
};
LoadedConfig parse_config(const std::string& text);
LoadedConfig load_config(const std::string& path);
std::string config_to_json(const ModelConfig& config, std::uint64_t seed);

// ---- reports ------------------------------------------------------------
// CSV dialect everywhere: comma separators, '.' decimals, mandatory header,
// LF line endings.
std::string ensemble_csv(const fluctuations::Ensemble& ensemble);
std::string moment_report_csv(const quadrature::MomentReport& report);
std::string moment_report_json(const quadrature::MomentReport& report);
std::string comparison_csv(const stats::ComparisonReport& report);
std::string comparison_json(const stats::ComparisonReport& report);

// Limit predictions for a config: per-pack rho/scaling/variances, angle
// limits, and the full eigenvalue (and, when defined, eigenvector) covariance
// tensors.
std::string theory_json(const ModelConfig& config);
std::string theory_csv(const ModelConfig& config);

// ---- run manifest -------------------------------------------------------
struct RunManifest {
  std::string command;
  std::string config_path;  // empty if no file was involved
  std::string config_hash;  // fnv1a of the config file bytes
  std::uint64_t master_seed = 0;
  int replicates = 0;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
  std::string version;
};
std::string manifest_json(const RunManifest& manifest);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

inline constexpr const char* kVersion = "spikelab 1.0.0";

}  // namespace spikelab::io
