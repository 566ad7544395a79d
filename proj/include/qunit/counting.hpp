#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qunit/types.hpp"

namespace qunit {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Detection-side rates. true_cc_rate_hz is the detected true-coincidence
/// rate summed over all detector pairs.
struct RatesConfig {
  double true_cc_rate_hz = 150.0;
  double accidental_rate_hz = 1.47;
  double coincidence_window_ns = 2.5;
  /// When both singles rates are given the accidental rate is derived as
  /// singles_a * singles_b * window instead of accidental_rate_hz.
  std::optional<double> singles_a_hz;
  std::optional<double> singles_b_hz;
  /// Per-detector efficiency relative to the one at which true_cc_rate_hz
  /// was measured; the true rate scales with its square.
  double detector_efficiency = 1.0;
};

void validate(const RatesConfig& rates);

/// Total accidental coincidence rate (Hz), from singles when available.
double accidental_rate(const RatesConfig& rates);

/// Detected pair rate for a source emitting pair_rate_hz at its output,
/// with arm_loss_db per arm and the given detector efficiency per arm.
double detected_pair_rate(double pair_rate_hz, double arm_loss_db, double detector_efficiency);

struct ExpectedRates {
  RMatrix total;       ///< Hz per detector pair, true + accidental
  RMatrix accidental;  ///< Hz per detector pair
};

/// Spreads the total accidental rate uniformly over the N^2 detector pairs.
/// This is the only place that encodes the per-pair accidental split.
RMatrix accidental_split(double accidental_rate_hz, int n);

/// r(i,j) = true_rate * eta^2 * P(i,j) + accidental_split(i,j).
ExpectedRates expected_rates(const RMatrix& probs, const RatesConfig& rates);

/// Coincidences recorded at one measurement setting.
struct CountRecord {
  std::string setting_label;
  CountMatrix outcome_counts;
  double integration_time_s = 0.0;
  RMatrix accidental_estimate;

  int dim() const { return static_cast<int>(outcome_counts.rows()); }
};

void validate(const CountRecord& record);

/// Independent Poisson(r T) draw per detector pair from an Rng seeded with
/// `seed`. accidental_estimate = accidental rate * T per pair.
CountRecord sample_counts(const ExpectedRates& rates, double integration_time_s,
                          std::uint64_t seed, std::string setting_label = {});

/// Mean counts r T per detector pair (infinite-statistics limit).
RMatrix expected_counts(const ExpectedRates& rates, double integration_time_s);

/// counts - accidental_estimate, unclamped.
RMatrix subtract_accidentals(const CountRecord& record);

/// (total counts - total accidentals) / total accidentals.
double car(const CountRecord& record);

// CSV with header "setting,i,j,counts,acc_estimate,T", one row per detector
// pair, records in order, pairs row-major.
inline constexpr const char* kCountCsvHeader = "setting,i,j,counts,acc_estimate,T";
void write_count_csv(std::ostream& out, const std::vector<CountRecord>& records);
std::vector<CountRecord> read_count_csv(std::istream& in);

}  // namespace qunit
