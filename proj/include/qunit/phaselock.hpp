#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace qunit {

/// Fiber phase drift: Wiener process plus linear ramp.
struct DriftModel {
  double random_walk_sigma_rad_per_sqrt_s = 0.0;
  double linear_drift_rad_per_s = 0.0;
  double initial_phase_rad = 0.0;
  std::uint64_t seed = 0;
};

struct LockConfig {
  double kp = 0.3;
  double ki = 20.0;  ///< 1/s
  double kd = 0.0;   ///< s
  double sample_interval_s = 0.01;
  double actuator_range_rad = 4.0 * 3.14159265358979323846;  ///< symmetric about 0
  double pump_phase_factor = 2.0;
  /// Pump/signal phase relation; unknown to the controller, recovered by
  /// characterize().
  double calibration_offset_rad = 0.7;
  /// Additive Gaussian noise on the normalized pump photodiode signal.
  double intensity_noise = 0.002;
  /// Actuator sweep speed during characterization.
  double sweep_rate_rad_per_s = 0.5;
};

void validate(const DriftModel& drift);
void validate(const LockConfig& cfg);

/// Normalized 775 nm intensity (1 + cos(factor * phase + offset)) / 2.
double pump_signal(double signal_phase, const LockConfig& cfg);

/// Drift phase at t_k = k * dt for k = 0..steps-1.
std::vector<double> drift_series(const DriftModel& drift, double dt, std::size_t steps);

/// Sweeps the actuator from -range/2 upward at sweep_rate for duration_s
/// (capped at the actuator range), with the fiber phase held as reference,
/// and fits the pump fringe. Returns the estimated calibration offset in
/// (-pi, pi]. Throws NumericalError when the sweep covers less than one
/// pump fringe or the modulation is not resolved.
double characterize(const LockConfig& cfg, double duration_s, std::uint64_t seed);

struct LockSample {
  double t = 0.0;
  double true_error = 0.0;  ///< signal phase - setpoint, wrapped to (-pi, pi]
  double actuator = 0.0;
  bool wrapped = false;     ///< the actuator was shifted by 2pi after this sample
  double drift = 0.0;
};

struct LockRun {
  std::vector<LockSample> samples;
  int wrap_events = 0;
};

/// Discrete PID loop on the phase recovered from the pump signal.
///
/// Each sample: read the pump photodiode, invert it with the characterized
/// offset choosing the branch closest to the tracked estimate, compute the
/// PID output (positional form, integral clamped to the actuator range) and
/// apply it at the next sample. An output beyond +-range/2 is shifted by
/// 2pi and logged as a wrap. With all gains zero the actuator stays at 0
/// and true_error is the raw drift. Throws NumericalError when the
/// unwrapped tracking error exceeds 10 rad with any gain nonzero.
LockRun run_lock(const LockConfig& cfg, const DriftModel& drift, double duration_s,
                 double setpoint_rad, double offset_estimate, std::uint64_t seed);

inline constexpr const char* kLockCsvHeader = "t,true_error,actuator,wrapped";
void write_lock_csv(std::ostream& out, const LockRun& run);

/// Root-mean-square of true_error over samples with t >= t_from.
double rms_error(const LockRun& run, double t_from = 0.0);

}  // namespace qunit
