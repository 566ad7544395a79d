#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qunit/counting.hpp"
#include "qunit/statecore.hpp"

namespace qunit {

// ---------------------------------------------------------------- visibility

struct VisibilityResult {
  double value = 0.0;
  /// cc_min was negative (over-subtracted accidentals) and clamped to 0.
  bool floored = false;
};

/// (cc_max - cc_min) / (cc_max + cc_min). Throws InputError when both are 0.
VisibilityResult visibility(double cc_max, double cc_min);

/// Coincidences recorded while scanning one analyzer phase.
struct FringeScan {
  std::vector<double> phases;
  std::vector<double> cc_counts;
  double integration_time_s = 1.0;
};

void validate(const FringeScan& scan);

/// Least-squares fit cc(phi) = offset + amplitude * cos(phi + phase0).
struct FringeFit {
  double offset = 0.0;
  double amplitude = 0.0;  ///< >= 0
  double phase0 = 0.0;
  double cc_max = 0.0;     ///< offset + amplitude
  double cc_min = 0.0;     ///< offset - amplitude
  double phase_max = 0.0;  ///< [0, 2pi)
  double phase_min = 0.0;
  double sigma_offset = 0.0;
  double sigma_amplitude = 0.0;
  double cov_offset_amplitude = 0.0;
  /// Amplitude not distinguishable from zero at 2 sigma.
  bool degenerate = false;

  double evaluate(double phase) const;
};

/// Sinusoid fit (needs >= 4 points). Parameter errors come from the fit
/// residuals.
FringeFit fringe_extrema(const FringeScan& scan);

/// Two-point estimator: the samples closest to phase 0 and phase pi are
/// taken as the extremes. No error estimate.
FringeFit two_point_extrema(const FringeScan& scan);

struct FringeVisibility {
  double value = 0.0;
  double sigma = 0.0;
  bool floored = false;
  bool degenerate = false;
};

FringeVisibility fringe_visibility(const FringeFit& fit);

// ---------------------------------------------------------------------- CHSH

struct Correlation {
  double value = 0.0;
  double sigma = 0.0;
};

/// E = (N00 - N01 - N10 + N11) / N_total with Poisson error propagation.
Correlation correlation_E(const RMatrix& counts);

/// Analyzer phases for the four CHSH setting pairs.
struct ChshSettings {
  double a = 0.0;
  double a_prime = kPi / 2.0;
  double b = kPi / 4.0;
  double b_prime = -kPi / 4.0;
};

/// Order of the four setting pairs everywhere: (a,b), (a,b'), (a',b), (a',b').
inline constexpr std::array<const char*, 4> kChshRoles{"ab", "ab'", "a'b", "a'b'"};
/// S = E(a,b) + E(a,b') - E(a',b) + E(a',b').
inline constexpr std::array<double, 4> kChshSigns{1.0, 1.0, -1.0, 1.0};

struct ChshEntry {
  double phase_a = 0.0;
  double phase_b = 0.0;
  RMatrix counts;  ///< 2x2, raw or accidental-corrected
};

struct ChshRecord {
  std::array<ChshEntry, 4> entries;
};

struct ChshResult {
  double s = 0.0;
  double sigma = 0.0;
  std::array<Correlation, 4> correlations;
};

ChshResult chsh_S(const ChshRecord& record);

std::array<std::pair<double, double>, 4> chsh_phase_pairs(const ChshSettings& settings);

enum class ChshMode {
  kProjector,     ///< 4 phase pairs, all four detector pairs recorded per pair
  kPhasePairs16,  ///< 16 phase pairs (a + x pi, b + y pi), detector pair (0,0) only
};

/// Labels "chsh:<role>" (projector mode) and "chsh16:<role>:<x><y>".
std::string chsh_label(int role);
std::string chsh16_label(int role, int x, int y);

/// Assembles a ChshRecord from count records carrying the labels above.
/// Throws InputError when a setting is missing.
ChshRecord chsh_record_from_counts(const std::vector<CountRecord>& records, ChshMode mode,
                                   bool subtract, const ChshSettings& settings = {});

// ---------------------------------------------------------------- tomography

enum class Basis { kZ = 0, kX = 1, kY = 2 };

/// Z: direct path measurement (analyzer reflectivity 1); X, Y: balanced
/// analyzer with phase 0 and pi/2.
CMatrix analyzer_for_basis(Basis basis);
char basis_name(Basis basis);

/// Record index 3 * basis_a + basis_b; label "tomo:<A><B>", e.g. "tomo:ZX".
std::string tomography_label(Basis a, Basis b);

struct TomographyRecord {
  std::array<RMatrix, 9> counts;       ///< 2x2 per basis pair
  std::array<RMatrix, 9> accidentals;  ///< 2x2 per basis pair
  double integration_time_s = 1.0;
};

void validate(const TomographyRecord& record);
TomographyRecord tomography_record_from_counts(const std::vector<CountRecord>& records);

enum class Likelihood { kGaussian, kPoisson };

struct TomographyOptions {
  bool subtract = true;
  Likelihood likelihood = Likelihood::kGaussian;
  QuNitPair target = bell_target();
  int max_iterations = 5000;
  double step_tolerance = 1e-9;
};

struct TomographyResult {
  DensityMatrix rho = DensityMatrix::maximally_mixed(4);
  double fidelity = 0.0;
  double tangle = 0.0;
  double fidelity_err = 0.0;
  double tangle_err = 0.0;
  double loglikelihood = 0.0;
  int iterations = 0;
};

/// Optimizer hit its iteration cap; carries the best state found.
class TomographyError : public NumericalError {
 public:
  TomographyError(const std::string& what, DensityMatrix best)
      : NumericalError(what), best_(std::move(best)) {}
  const DensityMatrix& best() const { return best_; }

 private:
  DensityMatrix best_;
};

/// Maximum-likelihood two-qubit reconstruction.
///
/// The Gaussian objective is
///   sum_k (n_k - N_b p_k)^2 / (2 max(n_k, 1))
/// over the 36 outcomes, N_b being the total of the basis pair that outcome
/// k belongs to; the Poisson objective is the exact negative log-likelihood.
/// Both are convex in rho. They are minimized over the unit-trace PSD set by
/// Newton steps on the objective plus mu * (-log det rho), starting from
/// linear inversion projected onto the PSD cone and shrinking mu by 10 per
/// stage down to 1e-14 of the mean basis total. Converged when a final-stage
/// step moves every coordinate of rho by less than options.step_tolerance;
/// max_iterations caps the total number of Newton steps. The estimate is
/// returned in the form T^dagger T / tr(T^dagger T), T lower triangular, so
/// it is PSD with unit trace for every finite input.
TomographyResult mle_tomography(const TomographyRecord& record,
                                const TomographyOptions& options = {});

struct McUncertainty {
  double fidelity_err = 0.0;
  double tangle_err = 0.0;
};

/// Resamples every count as Poisson(observed) (sample i seeded with
/// derive_seed(seed, "mc-resample", i)), reruns mle_tomography, and returns
/// the sample standard deviations of fidelity and tangle.
McUncertainty monte_carlo_uncertainty(const TomographyRecord& record, int n_samples,
                                      std::uint64_t seed, const TomographyOptions& options = {});

/// Born probabilities of the four outcomes for one basis pair.
RMatrix tomography_probabilities(const DensityMatrix& rho, Basis a, Basis b);

}  // namespace qunit
