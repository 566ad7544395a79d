#include "qunit/phaselock.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qunit/matrix_io.hpp"
#include "qunit/random.hpp"
#include "qunit/types.hpp"

namespace qunit {

void validate(const DriftModel& drift) {
  if (!(drift.random_walk_sigma_rad_per_sqrt_s >= 0.0)) {
    throw InputError("drift.random_walk_sigma_rad_per_sqrt_s must be >= 0");
  }
  if (!std::isfinite(drift.linear_drift_rad_per_s) || !std::isfinite(drift.initial_phase_rad)) {
    throw InputError("drift parameters must be finite");
  }
}

void validate(const LockConfig& cfg) {
  if (!(cfg.sample_interval_s > 0.0)) {
    throw InputError("lock.sample_interval_s must be > 0");
  }
  if (!(cfg.actuator_range_rad > kTwoPi)) {
    throw InputError("lock.actuator_range_rad must exceed 2pi");
  }
  if (!(cfg.pump_phase_factor > 0.0)) {
    throw InputError("lock.pump_phase_factor must be > 0");
  }
  if (!(cfg.intensity_noise >= 0.0)) {
    throw InputError("lock.intensity_noise must be >= 0");
  }
  if (!(cfg.sweep_rate_rad_per_s > 0.0)) {
    throw InputError("lock.sweep_rate_rad_per_s must be > 0");
  }
  if (!std::isfinite(cfg.kp) || !std::isfinite(cfg.ki) || !std::isfinite(cfg.kd)) {
    throw InputError("lock gains must be finite");
  }
}

double pump_signal(double signal_phase, const LockConfig& cfg) {
  return 0.5 * (1.0 + std::cos(cfg.pump_phase_factor * signal_phase + cfg.calibration_offset_rad));
}

std::vector<double> drift_series(const DriftModel& drift, double dt, std::size_t steps) {
  validate(drift);
  std::vector<double> out(steps);
  Rng rng(derive_seed(drift.seed, "drift"));
  const double step_sigma = drift.random_walk_sigma_rad_per_sqrt_s * std::sqrt(dt);
  double phase = drift.initial_phase_rad;
  for (std::size_t k = 0; k < steps; ++k) {
    out[k] = phase;
    phase += drift.linear_drift_rad_per_s * dt + step_sigma * rng.normal();
  }
  return out;
}

double characterize(const LockConfig& cfg, double duration_s, std::uint64_t seed) {
  validate(cfg);
  const double span = std::min(cfg.sweep_rate_rad_per_s * duration_s, cfg.actuator_range_rad);
  const double fringe = kTwoPi / cfg.pump_phase_factor;
  if (!(span >= fringe)) {
    throw NumericalError("characterization sweep of " + format_double(span) +
                         " rad covers less than one pump fringe (" + format_double(fringe) + " rad)");
  }
  const auto steps = static_cast<Eigen::Index>(std::floor(duration_s / cfg.sample_interval_s)) + 1;
  Rng rng(derive_seed(seed, "characterize"));
  RMatrix x(steps, 3);
  RVector y(steps);
  for (Eigen::Index k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.sample_interval_s;
    const double actuator =
        -0.5 * cfg.actuator_range_rad + std::min(cfg.sweep_rate_rad_per_s * t, span);
    const double arg = cfg.pump_phase_factor * actuator;
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(arg);
    x(k, 2) = std::sin(arg);
    y(k) = pump_signal(actuator, cfg) + cfg.intensity_noise * rng.normal();
  }
  const RVector beta = x.colPivHouseholderQr().solve(y);
  const double amplitude = std::hypot(beta(1), beta(2));
  // Expected amplitude is 1/2; anything far below means no usable fringe.
  if (!(amplitude > 0.1 && amplitude > 10.0 * cfg.intensity_noise / std::sqrt(static_cast<double>(steps)))) {
    throw NumericalError("characterization fringe not resolved (amplitude " +
                         format_double(amplitude) + ")");
  }
  return wrap_pi(std::atan2(-beta(2), beta(1)));
}

namespace {

// Signal phase consistent with a pump reading, on the branch closest to
// `prediction`.
double invert_pump(double intensity, double offset_estimate, double factor, double prediction) {
  const double x = std::acos(std::clamp(2.0 * intensity - 1.0, -1.0, 1.0));
  const double period = kTwoPi / factor;
  double best = 0.0;
  double best_dist = 1e300;
  for (const double sign : {1.0, -1.0}) {
    const double base = (sign * x - offset_estimate) / factor;
    const double candidate = base + period * std::round((prediction - base) / period);
    const double dist = std::abs(candidate - prediction);
    if (dist < best_dist) {
      best_dist = dist;
      best = candidate;
    }
  }
  return best;
}

}  // namespace

LockRun run_lock(const LockConfig& cfg, const DriftModel& drift, double duration_s,
                 double setpoint_rad, double offset_estimate, std::uint64_t seed) {
  validate(cfg);
  if (!(duration_s >= 0.0)) {
    throw InputError("lock duration must be >= 0");
  }
  const double dt = cfg.sample_interval_s;
  const auto steps = static_cast<std::size_t>(std::floor(duration_s / dt + 1e-9)) + 1;
  const std::vector<double> drift_phase = drift_series(drift, dt, steps);
  Rng rng(derive_seed(seed, "lock-detector"));

  const bool active = cfg.kp != 0.0 || cfg.ki != 0.0 || cfg.kd != 0.0;
  const double half_range = 0.5 * cfg.actuator_range_rad;

  LockRun run;
  run.samples.reserve(steps);
  double actuator = 0.0;
  double previous_actuator = 0.0;
  double bias = 0.0;  // accumulated 2pi wrap shifts
  double integral = 0.0;
  double previous_error = 0.0;
  double estimate = setpoint_rad;
  int net_wraps = 0;
  double reference = 0.0;

  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double phase = drift_phase[k] + actuator;
    if (k == 0) {
      reference = setpoint_rad + kTwoPi * std::round((phase - setpoint_rad) / kTwoPi);
    }

    LockSample sample;
    sample.t = t;
    sample.actuator = actuator;
    sample.drift = drift_phase[k];
    sample.true_error = wrap_pi(phase - setpoint_rad);

    if (active) {
      const double unwrapped = phase + kTwoPi * net_wraps - reference;
      if (std::abs(unwrapped) > 10.0) {
        throw NumericalError("phase lock unstable: tracking error " + format_double(unwrapped) +
                             " rad at t = " + format_double(t) + " s");
      }
      const double intensity = pump_signal(phase, cfg) + cfg.intensity_noise * rng.normal();
      const double prediction = (k == 0) ? setpoint_rad : estimate + (actuator - previous_actuator);
      estimate = invert_pump(intensity, offset_estimate, cfg.pump_phase_factor, prediction);
      const double error = wrap_pi(setpoint_rad - estimate);

      const double derivative = (k == 0) ? 0.0 : (error - previous_error) / dt;
      const double trial_integral = integral + error * dt;
      double command = cfg.kp * error + cfg.ki * trial_integral + cfg.kd * derivative + bias;
      if (command > half_range) {
        bias -= kTwoPi;
        command -= kTwoPi;
        ++net_wraps;
        sample.wrapped = true;
      } else if (command < -half_range) {
        bias += kTwoPi;
        command += kTwoPi;
        --net_wraps;
        sample.wrapped = true;
      }
      if (std::abs(command) <= half_range) {
        integral = trial_integral;
      } else {
        // Still saturated after the wrap: hold the integrator.
        command = std::clamp(command, -half_range, half_range);
      }
      previous_error = error;
      previous_actuator = actuator;
      actuator = command;
      if (sample.wrapped) {
        ++run.wrap_events;
      }
    }
    run.samples.push_back(sample);
  }
  return run;
}

void write_lock_csv(std::ostream& out, const LockRun& run) {
  out << kLockCsvHeader << '\n';
  for (const auto& s : run.samples) {
    out << format_double(s.t) << ',' << format_double(s.true_error) << ','
        << format_double(s.actuator) << ',' << (s.wrapped ? 1 : 0) << '\n';
  }
}

double rms_error(const LockRun& run, double t_from) {
  double ss = 0.0;
  std::size_t count = 0;
  for (const auto& s : run.samples) {
    if (s.t >= t_from) {
      ss += s.true_error * s.true_error;
      ++count;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(count));
}

}  // namespace qunit
