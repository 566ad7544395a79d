#include "qunit/sourcesim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qunit/multiport.hpp"

namespace qunit {

double detuning_hz(const SpectralModel& model) {
  const double lambda = kSignalWavelengthNm * 1e-9;
  return kSpeedOfLight * (model.center_offset_nm * 1e-9) / (lambda * lambda);
}

double delay_s(const SpectralModel& model) {
  return model.delay_mismatch_um * 1e-6 / kSpeedOfLight;
}

double coherence_time_s(const SpectralModel& model) {
  return 1.0 / (model.filter_bandwidth_ghz * 1e9);
}

double overlap_visibility(const SpectralModel& model) {
  if (!(model.filter_bandwidth_ghz > 0.0)) {
    throw InputError("filter bandwidth must be positive");
  }
  if (!std::isfinite(model.center_offset_nm) || !std::isfinite(model.delay_mismatch_um)) {
    throw InputError("spectral offsets must be finite");
  }
  switch (model.filter_shape) {
    case FilterShape::kGaussian: {
      // Amplitude spectrum exp(-nu^2 / (4 sigma^2)), intensity FWHM
      // = 2 sqrt(2 ln 2) sigma.
      const double sigma = model.filter_bandwidth_ghz * 1e9 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
      const double dnu = detuning_hz(model);
      const double tau = delay_s(model);
      return std::exp(-dnu * dnu / (8.0 * sigma * sigma) -
                      2.0 * kPi * kPi * sigma * sigma * tau * tau);
    }
  }
  throw InputError("unknown filter shape");
}

void validate(const SourceConfig& config) {
  if (config.dim < 2) {
    throw InputError("source.dim must be >= 2");
  }
  if (config.pump_split.size() != static_cast<std::size_t>(config.dim)) {
    throw InputError("source.pump_split needs " + std::to_string(config.dim) + " entries");
  }
  if (config.set_phases.size() != static_cast<std::size_t>(config.dim - 1)) {
    throw InputError("source.set_phases needs " + std::to_string(config.dim - 1) + " entries");
  }
  if (!(config.arm_loss_db >= 0.0)) {
    throw InputError("source.arm_loss_db must be >= 0");
  }
  if (!(config.pair_rate_hz >= 0.0)) {
    throw InputError("source.pair_rate_hz must be >= 0");
  }
  if (const double* p = std::get_if<double>(&config.distinguishability)) {
    if (!(*p >= 0.0 && *p <= 1.0)) {
      throw InputError("source.distinguishability must lie in [0, 1]");
    }
  }
}

double coherence_parameter(const SourceConfig& config) {
  if (const double* p = std::get_if<double>(&config.distinguishability)) {
    return *p;
  }
  return overlap_visibility(std::get<SpectralModel>(config.distinguishability));
}

QuNitPair ideal_state(const SourceConfig& config) {
  validate(config);
  std::vector<Complex> amps(config.dim);
  for (int i = 0; i < config.dim; ++i) {
    const double phase = (i == 0) ? 0.0 : config.set_phases[i - 1];
    amps[i] = config.pump_split[i] * std::polar(1.0, -phase);
  }
  return make_pair_state(amps);
}

DensityMatrix effective_density(const SourceConfig& config) {
  return dephase(ideal_state(config), coherence_parameter(config));
}

RMatrix coincidence_probs(const DensityMatrix& rho, const CMatrix& u_a, const CMatrix& u_b) {
  const int n = rho.local_dim();
  if (u_a.rows() != n || u_a.cols() != n || u_b.rows() != n || u_b.cols() != n) {
    throw InputError("coincidence_probs: unitaries must be " + std::to_string(n) + "x" +
                     std::to_string(n));
  }
  const CMatrix rho_p = rho.product_basis();
  // Amplitude map of outcome (i, j) is row i of U_A times row j of U_B.
  RMatrix probs(n, n);
  CVector w(n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          w(k * n + l) = u_a(i, k) * u_b(j, l);
        }
      }
      const Complex p = w.transpose() * rho_p * w.conjugate();
      probs(i, j) = std::max(0.0, p.real());
    }
  }
  return probs;
}

RMatrix epr_correlation_table(int n, int k) {
  if (n < 2) {
    throw InputError("epr_correlation_table needs N >= 2");
  }
  if (k < 0 || k >= n) {
    throw InputError("input phase setting k must lie in [0, N)");
  }
  SourceConfig config;
  config.dim = n;
  config.pump_split.assign(n, Complex(1.0));
  config.set_phases.resize(n - 1);
  for (int j = 1; j < n; ++j) {
    config.set_phases[j - 1] = kTwoPi * static_cast<double>((j * k) % n) / n;
  }
  config.distinguishability = 1.0;
  const CMatrix f = fourier_matrix(n);
  return coincidence_probs(pure_density(ideal_state(config)), f, f);
}

bool is_perfect_correlation(const RMatrix& table) {
  const auto n = table.rows();
  if (n < 2 || table.cols() != n) {
    return false;
  }
  const double share = 1.0 / static_cast<double>(n);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = table(i, j);
      if (std::abs(v - share) <= 1e-10) {
        ++hits;
      } else if (!(std::abs(v) < 1e-12)) {
        return false;
      }
    }
  }
  return hits == n;
}

}  // namespace qunit
