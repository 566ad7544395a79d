#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "qunit/analysis.hpp"
#include "qunit/counting.hpp"
#include "qunit/phaselock.hpp"
#include "qunit/sourcesim.hpp"

namespace qunit {

enum class Experiment { kFringe, kChsh, kTomography, kEpr, kPhaselock, kFull };

std::string experiment_name(Experiment e);

struct FringeConfig {
  int points = 200;
  double integration_time_s = 10.0;
  int outcome_a = 0;
  int outcome_b = 0;
  bool two_point = false;
};

struct ChshConfig {
  double integration_time_s = 10.0;
  ChshMode mode = ChshMode::kProjector;
  ChshSettings settings;
};

struct TomographyConfig {
  double integration_time_s = 10.0;
  int mc_samples = 100;
  Likelihood likelihood = Likelihood::kGaussian;
};

struct EprConfig {
  std::optional<int> dim;  ///< defaults to source.dim
  double integration_time_s = 10.0;
};

struct PhaselockConfig {
  LockConfig lock;
  DriftModel drift;
  bool drift_seed_given = false;
  double duration_s = 60.0;
  double setpoint_rad = 0.0;
  double characterization_s = 60.0;
};

struct AnalysisConfig {
  bool subtract = true;  ///< "corrected" (true) or "raw"
  /// Fidelity target phase; unset means the source's ideal state.
  std::optional<double> target_theta;
};

struct RunConfig {
  Experiment experiment = Experiment::kFull;
  std::uint64_t seed = 0;
  SourceConfig source;
  RatesConfig rates;
  FringeConfig fringe;
  ChshConfig chsh;
  TomographyConfig tomography;
  EprConfig epr;
  PhaselockConfig phaselock;
  AnalysisConfig analysis;
  std::string output_dir = "out";
  /// The parsed document, used for the manifest hash.
  nlohmann::json document;
};

/// Parses and validates a run configuration. Unknown or mistyped fields
/// and missing required fields ("experiment", "seed") throw InputError
/// naming the field path.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

/// FNV-1a 64 over the canonical (sorted-key, compact) JSON dump, as hex.
std::string config_hash(const nlohmann::json& doc);

/// Re-checks every section after command-line overrides.
void validate(const RunConfig& config);

/// Sets the source dimension, resetting split and phases to the balanced
/// zero-phase state when their lengths no longer fit.
void override_dim(RunConfig& config, int dim);

}  // namespace qunit
