#include <gtest/gtest.h>

#include <random>
#include <set>

#include "../support/oracles.hpp"
#include "qunit/multiport.hpp"
#include "qunit/sourcesim.hpp"

using namespace qunit;

namespace {

SourceConfig balanced(double p) {
  SourceConfig cfg;
  cfg.distinguishability = p;
  return cfg;
}

CMatrix balanced_analyzer(double phase) { return analyzer_unitary({0.5, phase}); }

}  // namespace

TEST(IdealState, BalancedQubitPair) {
  const QuNitPair s = ideal_state(SourceConfig{});
  EXPECT_NEAR(std::abs(s.amps()(0) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s.amps()(1) - 1.0 / std::sqrt(2.0)), 0.0, 1e-15);
}

TEST(IdealState, BalancedQuquart) {
  SourceConfig cfg;
  cfg.dim = 4;
  cfg.pump_split = std::vector<Complex>(4, 1.0);
  cfg.set_phases = {0.0, 0.0, 0.0};
  const QuNitPair s = ideal_state(cfg);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(s.amps()(i) - 0.5), 0.0, 1e-15);
}

TEST(IdealState, SetPhasesEnterWithNegativeSign) {
  SourceConfig cfg;
  cfg.set_phases = {0.8};
  const QuNitPair s = ideal_state(cfg);
  EXPECT_NEAR(std::abs(s.amps()(1) - std::polar(1.0 / std::sqrt(2.0), -0.8)), 0.0, 1e-15);
}

TEST(IdealState, ProductStateHasZeroTangle) {
  SourceConfig cfg;
  cfg.pump_split = {1.0, 0.0};
  EXPECT_NEAR(tangle(pure_density(ideal_state(cfg))), 0.0, 1e-12);
}

TEST(SourceConfig, RejectsInconsistentLengths) {
  SourceConfig cfg;
  cfg.set_phases = {0.0, 0.0};
  EXPECT_THROW(validate(cfg), InputError);
  cfg = SourceConfig{};
  cfg.dim = 3;
  EXPECT_THROW(validate(cfg), InputError);
  cfg = SourceConfig{};
  cfg.distinguishability = 1.2;
  EXPECT_THROW(validate(cfg), InputError);
}

TEST(OverlapVisibility, IdenticalModesIsOne) {
  EXPECT_NEAR(overlap_visibility(SpectralModel{}), 1.0, 1e-15);
}

TEST(OverlapVisibility, PaperTolerancesAgainstQuadrature) {
  SpectralModel m;
  m.center_offset_nm = 0.005;
  m.delay_mismatch_um = 20.0;
  const double got = overlap_visibility(m);
  const double want =
      oracle::overlap_quadrature(100e9, oracle::nm_to_hz(0.005), 20e-6 / 299792458.0, 20001);
  EXPECT_GT(got, 0.999);
  EXPECT_NEAR(got, want, 1e-6);
}

TEST(OverlapVisibility, LongDelayKillsOverlap) {
  SpectralModel m;
  m.delay_mismatch_um = 10.0 * coherence_time_s(m) * kSpeedOfLight * 1e6;
  const double got = overlap_visibility(m);
  EXPECT_LT(got, 0.01);
  EXPECT_NEAR(got, oracle::overlap_quadrature(100e9, 0.0, delay_s(m), 20001), 1e-6);
}

TEST(OverlapVisibility, GridAgainstQuadrature) {
  for (double dl : {0.0, 0.1, 0.4, 0.8}) {
    for (double dx : {0.0, 500.0, 1500.0}) {
      SpectralModel m;
      m.filter_bandwidth_ghz = 50.0;
      m.center_offset_nm = dl;
      m.delay_mismatch_um = dx;
      const double want = oracle::overlap_quadrature(50e9, oracle::nm_to_hz(dl), dx * 1e-6 / 299792458.0, 20001);
      EXPECT_NEAR(overlap_visibility(m), want, 1e-6) << dl << " " << dx;
    }
  }
}

TEST(OverlapVisibility, SymmetricInSigns) {
  SpectralModel a;
  a.center_offset_nm = 0.3;
  a.delay_mismatch_um = 900.0;
  SpectralModel b = a;
  b.center_offset_nm = -0.3;
  SpectralModel c = a;
  c.delay_mismatch_um = -900.0;
  EXPECT_DOUBLE_EQ(overlap_visibility(a), overlap_visibility(b));
  EXPECT_DOUBLE_EQ(overlap_visibility(a), overlap_visibility(c));
}

TEST(EffectiveDensity, UnitPIsPure) {
  const DensityMatrix rho = effective_density(balanced(1.0));
  EXPECT_LT((rho.entries() - pure_density(ideal_state(balanced(1.0))).entries()).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(EffectiveDensity, PaperPHasExpectedTangleAndVisibility) {
  const SourceConfig cfg = balanced(0.956);
  const DensityMatrix rho = effective_density(cfg);
  EXPECT_NEAR(tangle(rho), 0.9139, 1e-4);
  // Visibility from a fine phase sweep of P(0,0).
  double hi = -1.0;
  double lo = 2.0;
  for (int k = 0; k < 3600; ++k) {
    const RMatrix p = coincidence_probs(rho, balanced_analyzer(2.0 * kPi * k / 3600.0), balanced_analyzer(0.0));
    hi = std::max(hi, p(0, 0));
    lo = std::min(lo, p(0, 0));
  }
  EXPECT_NEAR((hi - lo) / (hi + lo), 0.956, 1e-6);
}

TEST(EffectiveDensity, FidelityAgainstIdeal) {
  const SourceConfig cfg = balanced(0.973);
  EXPECT_NEAR(fidelity(effective_density(cfg), ideal_state(cfg)), 0.9865, 1e-12);
}

TEST(EffectiveDensity, SpectralFrontEndMatchesDirectP) {
  SourceConfig spectral;
  SpectralModel m;
  m.center_offset_nm = 0.3;
  m.delay_mismatch_um = 800.0;
  spectral.distinguishability = m;
  const double p = coherence_parameter(spectral);
  EXPECT_NEAR(p, overlap_visibility(m), 0.0);
  EXPECT_LT((effective_density(spectral).entries() - effective_density(balanced(p)).entries()).cwiseAbs().maxCoeff(),
            1e-15);
}

TEST(CoincidenceProbs, BalancedAnalyzersGivePerfectCorrelation) {
  const DensityMatrix rho = effective_density(balanced(1.0));
  const RMatrix p = coincidence_probs(rho, balanced_analyzer(0.0), balanced_analyzer(0.0));
  const oracle::RM want = oracle::coincidence(rho.product_basis(), oracle::analyzer(0.5, 0.0),
                                              oracle::analyzer(0.5, 0.0));
  EXPECT_NEAR(p(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(p(1, 1), 0.5, 1e-12);
  EXPECT_NEAR(p(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(p(1, 0), 0.0, 1e-12);
  EXPECT_LT((p - want).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CoincidenceProbs, IdentityAnalyzersGivePopulations) {
  SourceConfig cfg;
  cfg.dim = 3;
  cfg.pump_split = {1.0, Complex(0.0, 2.0), 0.5};
  cfg.set_phases = {0.1, 0.2};
  cfg.distinguishability = 1.0;
  const QuNitPair s = ideal_state(cfg);
  const RMatrix p = coincidence_probs(effective_density(cfg), CMatrix::Identity(3, 3), CMatrix::Identity(3, 3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(p(i, j), i == j ? std::norm(s.amps()(i)) : 0.0, 1e-14);
    }
  }
}

TEST(CoincidenceProbs, DephasedCosineLawOverPhaseGrid) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double p = u(gen);
    const DensityMatrix rho = effective_density(balanced(p));
    for (int k = 0; k < 16; ++k) {
      const double fa = 2.0 * kPi * k / 16.0;
      const double fb = 0.37 * k;
      const double chi = fa + fb;
      const RMatrix probs = coincidence_probs(rho, balanced_analyzer(fa), balanced_analyzer(fb));
      const oracle::RM want = oracle::coincidence(rho.product_basis(), oracle::analyzer(0.5, fa),
                                                  oracle::analyzer(0.5, fb));
      EXPECT_NEAR(probs(0, 0), (1.0 + p * std::cos(chi)) / 4.0, 1e-12);
      EXPECT_NEAR(probs(1, 1), (1.0 + p * std::cos(chi)) / 4.0, 1e-12);
      EXPECT_LT((probs - want).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(CoincidenceProbs, ConservesProbabilityAndIgnoresGlobalPhase) {
  std::mt19937_64 gen(22);
  std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
  for (int n = 2; n <= 5; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const DensityMatrix rho(from_product_basis(oracle::random_density(n * n, gen)));
      const CMatrix ua = oracle::haar_unitary(n, gen);
      const CMatrix ub = oracle::haar_unitary(n, gen);
      const RMatrix p = coincidence_probs(rho, ua, ub);
      EXPECT_NEAR(p.sum(), 1.0, 1e-10);
      const RMatrix q = coincidence_probs(rho, ua * std::polar(1.0, u(gen)), ub * std::polar(1.0, u(gen)));
      EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-13);
      const oracle::RM want = oracle::coincidence(rho.product_basis(), ua, ub);
      EXPECT_LT((p - want).cwiseAbs().maxCoeff(), 1e-13);
    }
  }
}

TEST(EprTable, QubitComplementaryPatterns) {
  const RMatrix t0 = epr_correlation_table(2, 0);
  const RMatrix t1 = epr_correlation_table(2, 1);
  EXPECT_NEAR(t0(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(t0(1, 1), 0.5, 1e-12);
  EXPECT_LT(t0(0, 1), 1e-12);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_FALSE(t0(i, j) > 1e-12 && t1(i, j) > 1e-12);
    }
  }
}

TEST(EprTable, PerfectAndDistinctAgainstDenseOracle) {
  for (int n = 2; n <= 6; ++n) {
    std::set<std::vector<int>> patterns;
    const oracle::CM f = [&] {
      oracle::CM m(n, n);
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) m(j, k) = std::polar(1.0 / std::sqrt(double(n)), 2.0 * kPi * j * k / n);
      }
      return m;
    }();
    for (int k = 0; k < n; ++k) {
      const RMatrix t = epr_correlation_table(n, k);
      EXPECT_TRUE(is_perfect_correlation(t)) << "n=" << n << " k=" << k;
      std::vector<oracle::C> amps(n);
      for (int j = 0; j < n; ++j) amps[j] = std::polar(1.0, -2.0 * kPi * j * k / n);
      const oracle::RM want = oracle::coincidence(oracle::dephased_product(amps, 1.0), f, f);
      EXPECT_LT((t - want).cwiseAbs().maxCoeff(), 1e-12);
      std::vector<int> support;
      for (int i = 0; i < n * n; ++i) {
        if (t(i / n, i % n) > 1e-6) support.push_back(i);
      }
      EXPECT_EQ(support.size(), static_cast<std::size_t>(n));
      patterns.insert(support);
    }
    EXPECT_EQ(patterns.size(), static_cast<std::size_t>(n));
  }
}

TEST(EprTable, RejectsBadArguments) {
  EXPECT_THROW(epr_correlation_table(1, 0), InputError);
  EXPECT_THROW(epr_correlation_table(3, 3), InputError);
}

TEST(PerfectCorrelation, DetectsImperfectTable) {
  RMatrix t = RMatrix::Identity(3, 3) / 3.0;
  EXPECT_TRUE(is_perfect_correlation(t));
  t(0, 1) = 1e-9;
  EXPECT_FALSE(is_perfect_correlation(t));
}
