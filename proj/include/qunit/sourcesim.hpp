#pragma once

#include <variant>
#include <vector>

#include "qunit/statecore.hpp"

namespace qunit {

enum class FilterShape { kGaussian };

/// Spectral/temporal mismatch between the N down-conversion events.
struct SpectralModel {
  double filter_bandwidth_ghz = 100.0;  ///< intensity FWHM
  double center_offset_nm = 0.0;        ///< filter centre mismatch
  double delay_mismatch_um = 0.0;       ///< optical path difference
  FilterShape filter_shape = FilterShape::kGaussian;
};

inline constexpr double kSpeedOfLight = 299792458.0;   // m/s
inline constexpr double kSignalWavelengthNm = 1550.0;

/// Frequency detuning (Hz) equivalent to a wavelength offset at 1550 nm.
double detuning_hz(const SpectralModel& model);
/// Delay (s) equivalent to the path mismatch, delay_mismatch / c.
double delay_s(const SpectralModel& model);
/// 1 / bandwidth.
double coherence_time_s(const SpectralModel& model);

/// |<f_A| e^{2 pi i nu tau} |f_B>| for unit-norm amplitude spectra with the
/// configured FWHM, detuned by detuning_hz(). Closed form for the Gaussian
/// shape: exp(-dnu^2 / (8 sigma^2)) * exp(-2 pi^2 sigma^2 tau^2).
double overlap_visibility(const SpectralModel& model);

/// Physical description of the N-crystal source.
struct SourceConfig {
  int dim = 2;
  std::vector<Complex> pump_split{Complex(1.0), Complex(1.0)};
  std::vector<double> set_phases{0.0};              ///< N-1 entries
  std::variant<double, SpectralModel> distinguishability = 0.956;
  double arm_loss_db = 1.9;
  double pair_rate_hz = 150.0;
};

void validate(const SourceConfig& config);

/// Dephasing parameter p, either given directly or from the spectral model.
double coherence_parameter(const SourceConfig& config);

/// amps_i = pump_split_i * e^{-i set_phases_{i-1}} (no phase on i = 0).
QuNitPair ideal_state(const SourceConfig& config);

/// dephase(ideal_state(config), coherence_parameter(config)).
DensityMatrix effective_density(const SourceConfig& config);

/// P(i,j) = <i,j| (U_A (x) U_B) rho (U_A (x) U_B)^dagger |i,j>.
RMatrix coincidence_probs(const DensityMatrix& rho, const CMatrix& u_a, const CMatrix& u_b);

/// Balanced state with relative phases 2 pi j k / N, measured through
/// Fourier multiports on both sides. The N nonzero entries (each 1/N) sit
/// at a + b = k (mod N).
RMatrix epr_correlation_table(int n, int k);

/// True when exactly n entries equal 1/n within 1e-10 and every other
/// entry is below 1e-12.
bool is_perfect_correlation(const RMatrix& table);

}  // namespace qunit
