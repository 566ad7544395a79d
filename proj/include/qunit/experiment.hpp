#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qunit/config.hpp"

namespace qunit {

// Setting labels used in count CSVs:
//   fringe:<phase>            analyzer-A phase of one fringe point
//   chsh:<role>               projector-mode CHSH setting pair
//   chsh16:<role>:<x><y>      16-pair CHSH mode
//   tomo:<A><B>               tomography basis pair
//   epr:k=<k>                 EPR input phase setting
std::string fringe_label(double phase);
std::string epr_label(int k);

struct AnalysisOptions {
  bool subtract = true;
  ChshSettings chsh_settings;
  QuNitPair target = bell_target();
  Likelihood likelihood = Likelihood::kGaussian;
  int mc_samples = 100;  ///< 0 disables Monte Carlo errors
  std::uint64_t mc_seed = 0;
  int fringe_outcome_a = 0;
  int fringe_outcome_b = 0;
  bool fringe_two_point = false;
};

/// Analysis settings implied by a run configuration.
AnalysisOptions analysis_options(const RunConfig& config);

struct AnalysisOutput {
  nlohmann::json report;
  std::optional<std::string> fringe_fit_csv;  ///< "phase,counts,fit"
};

/// Runs every analysis whose settings are present in `records`, keyed by
/// label prefix. Throws InputError when records exist but none is
/// recognized, or when a recognized group is incomplete.
AnalysisOutput analyze_records(const std::vector<CountRecord>& records,
                               const AnalysisOptions& options);

// Count generation for each experiment; seeds derive from config.seed.
std::vector<CountRecord> simulate_fringe(const RunConfig& config);
std::vector<CountRecord> simulate_chsh(const RunConfig& config);
std::vector<CountRecord> simulate_tomography(const RunConfig& config);
std::vector<CountRecord> simulate_epr(const RunConfig& config);

struct PhaselockOutcome {
  LockRun locked;
  LockRun unlocked;
  double offset_estimate = 0.0;
  nlohmann::json summary;
};

PhaselockOutcome simulate_phaselock(const RunConfig& config);

struct RunOutput {
  std::vector<CountRecord> records;
  nlohmann::json report;
  /// File name -> contents, all written to the output directory.
  std::map<std::string, std::string> files;
};

/// Simulates and analyzes one configured experiment. The report holds the
/// analysis of the generated counts (identical to analyze_records on
/// counts.csv) plus a "simulation" block.
RunOutput run_experiment(const RunConfig& config);

void write_outputs(const std::string& dir, const RunOutput& output);

/// Two-space indented dump with trailing newline.
std::string dump_json(const nlohmann::json& value);

}  // namespace qunit
