#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qunit/counting.hpp"
#include "qunit/random.hpp"

using namespace qunit;

namespace {

RMatrix correlated2() {
  RMatrix p = RMatrix::Zero(2, 2);
  p(0, 0) = p(1, 1) = 0.5;
  return p;
}

}  // namespace

TEST(ExpectedRates, PaperRatesOnCorrelatedTable) {
  const ExpectedRates r = expected_rates(correlated2(), RatesConfig{});
  EXPECT_NEAR(r.total(0, 0), 75.3675, 1e-12);
  EXPECT_NEAR(r.total(1, 1), 75.3675, 1e-12);
  EXPECT_NEAR(r.total(0, 1), 0.3675, 1e-12);
  EXPECT_NEAR(r.total(1, 0), 0.3675, 1e-12);
  EXPECT_NEAR(r.accidental.sum(), 1.47, 1e-12);
}

TEST(ExpectedRates, ZeroAccidentalsProportionalToProbs) {
  RatesConfig rates;
  rates.accidental_rate_hz = 0.0;
  RMatrix p(2, 2);
  p << 0.1, 0.2, 0.3, 0.4;
  const ExpectedRates r = expected_rates(p, rates);
  EXPECT_LT((r.total - 150.0 * p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExpectedRates, DoublingTrueRateDoublesCar) {
  RatesConfig rates;
  const RMatrix e1 = expected_counts(expected_rates(correlated2(), rates), 10.0);
  rates.true_cc_rate_hz *= 2.0;
  const RMatrix e2 = expected_counts(expected_rates(correlated2(), rates), 10.0);
  const double acc = 14.7;
  EXPECT_NEAR((e2.sum() - acc) / acc, 2.0 * (e1.sum() - acc) / acc, 1e-9);
}

TEST(ExpectedRates, SinglesOverrideAccidentalRate) {
  RatesConfig rates;
  rates.singles_a_hz = 20000.0;
  rates.singles_b_hz = 30000.0;
  EXPECT_NEAR(accidental_rate(rates), 20000.0 * 30000.0 * 2.5e-9, 1e-12);
  rates.singles_b_hz.reset();
  EXPECT_EQ(accidental_rate(rates), 1.47);
}

TEST(ExpectedRates, EfficiencyAndLossScaleRatesNotProbabilities) {
  RatesConfig rates;
  rates.accidental_rate_hz = 0.0;
  rates.detector_efficiency = 0.5;
  RMatrix p(2, 2);
  p << 0.1, 0.2, 0.3, 0.4;
  const ExpectedRates r = expected_rates(p, rates);
  EXPECT_NEAR(r.total.sum(), 150.0 * 0.25, 1e-12);
  EXPECT_LT((r.total / r.total.sum() - p).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(detected_pair_rate(1000.0, 10.0, 1.0), 10.0, 1e-12);
  EXPECT_NEAR(detected_pair_rate(1000.0, 0.0, 0.1), 10.0, 1e-12);
}

TEST(ExpectedRates, RejectsInvalidInputs) {
  RatesConfig rates;
  rates.coincidence_window_ns = 0.0;
  EXPECT_THROW(expected_rates(correlated2(), rates), InputError);
  rates = RatesConfig{};
  rates.true_cc_rate_hz = -1.0;
  EXPECT_THROW(expected_rates(correlated2(), rates), InputError);
  RMatrix bad = correlated2();
  bad(0, 0) = 0.7;
  EXPECT_THROW(expected_rates(bad, RatesConfig{}), InputError);
}

TEST(SampleCounts, ZeroRateGivesZeroCounts) {
  RatesConfig rates;
  rates.accidental_rate_hz = 0.0;
  const CountRecord r = sample_counts(expected_rates(correlated2(), rates), 10.0, 7);
  EXPECT_EQ(r.outcome_counts(0, 1), 0);
  EXPECT_EQ(r.outcome_counts(1, 0), 0);
  EXPECT_GT(r.outcome_counts(0, 0), 0);
}

TEST(SampleCounts, DeterministicForFixedSeed) {
  const ExpectedRates rates = expected_rates(correlated2(), RatesConfig{});
  const CountRecord a = sample_counts(rates, 10.0, 99, "x");
  const CountRecord b = sample_counts(rates, 10.0, 99, "x");
  EXPECT_EQ(a.outcome_counts, b.outcome_counts);
  EXPECT_EQ(a.accidental_estimate, b.accidental_estimate);
  const CountRecord c = sample_counts(rates, 10.0, 100, "x");
  EXPECT_NE(a.outcome_counts, c.outcome_counts);
}

TEST(SampleCounts, AccidentalEstimateIsRateTimesT) {
  const CountRecord r = sample_counts(expected_rates(correlated2(), RatesConfig{}), 10.0, 1);
  EXPECT_NEAR(r.accidental_estimate(0, 1), 3.675, 1e-12);
}

TEST(SampleCounts, PoissonMeanAndVariance) {
  ExpectedRates rates;
  rates.total = RMatrix::Constant(1, 1, 75.37);
  rates.accidental = RMatrix::Zero(1, 1);
  const int reps = 10000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    const double x = static_cast<double>(sample_counts(rates, 10.0, derive_seed(5, "poisson", k)).outcome_counts(0, 0));
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / reps;
  const double var = (sum2 - reps * mean * mean) / (reps - 1);
  EXPECT_NEAR(mean, 753.7, 3.0 * std::sqrt(753.7 / reps));
  EXPECT_GE(var / mean, 0.97);
  EXPECT_LE(var / mean, 1.03);
}

TEST(Rng, SmallMeanPoissonMoments) {
  Rng rng(3);
  const int reps = 200000;
  for (double mu : {0.3, 4.0, 9.9, 10.0, 35.0}) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < reps; ++k) {
      const double x = static_cast<double>(rng.poisson(mu));
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / reps;
    const double var = sum2 / reps - mean * mean;
    EXPECT_NEAR(mean, mu, 4.0 * std::sqrt(mu / reps)) << mu;
    EXPECT_NEAR(var / mu, 1.0, 0.03) << mu;
  }
  EXPECT_EQ(rng.poisson(0.0), 0);
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(4);
  const int reps = 200000;
  double su = 0.0;
  double sn = 0.0;
  double sn2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / reps, 0.5, 0.005);
  EXPECT_NEAR(sn / reps, 0.0, 0.01);
  EXPECT_NEAR(sn2 / reps, 1.0, 0.01);
}

TEST(Rng, PinnedStream) {
  // Pins the documented generator so a seed keeps its meaning.
  Rng a(20240601);
  std::mt19937_64 engine(20240601);
  EXPECT_EQ(a.uniform(), static_cast<double>(engine() >> 11) * 0x1.0p-53);
  EXPECT_EQ(derive_seed(1, "fringe", 0), derive_seed(1, "fringe", 0));
  EXPECT_NE(derive_seed(1, "fringe", 0), derive_seed(1, "fringe", 1));
  EXPECT_NE(derive_seed(1, "fringe", 0), derive_seed(1, "chsh", 0));
  EXPECT_NE(derive_seed(1, "fringe", 0), derive_seed(2, "fringe", 0));
}

TEST(SubtractAccidentals, Arithmetic) {
  CountRecord r;
  r.setting_label = "x";
  r.outcome_counts = CountMatrix::Constant(1, 1, 5);
  r.accidental_estimate = RMatrix::Constant(1, 1, 3.675);
  r.integration_time_s = 10.0;
  EXPECT_NEAR(subtract_accidentals(r)(0, 0), 1.325, 1e-12);
  r.accidental_estimate.setZero();
  EXPECT_EQ(subtract_accidentals(r)(0, 0), 5.0);
}

TEST(SubtractAccidentals, UnbiasedOverSeeds) {
  const ExpectedRates rates = expected_rates(correlated2(), RatesConfig{});
  const int reps = 400;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int k = 0; k < reps; ++k) {
    const double x = subtract_accidentals(sample_counts(rates, 10.0, derive_seed(6, "unbiased", k))).sum();
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sum2 - reps * mean * mean) / (reps - 1));
  EXPECT_NEAR(mean, 1500.0, 3.0 * sd / std::sqrt(double(reps)));
}

TEST(Car, UndefinedWithoutAccidentals) {
  CountRecord r;
  r.outcome_counts = CountMatrix::Constant(2, 2, 10);
  r.accidental_estimate = RMatrix::Zero(2, 2);
  r.integration_time_s = 1.0;
  try {
    car(r);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("CAR undefined"), std::string::npos);
  }
}

TEST(Car, AccidentalOnlyIsNearZero) {
  RatesConfig rates;
  rates.true_cc_rate_hz = 0.0;
  rates.accidental_rate_hz = 100.0;
  const CountRecord r = sample_counts(expected_rates(correlated2(), rates), 100.0, 8);
  EXPECT_NEAR(car(r), 0.0, 0.05);
}

TEST(Car, PaperRatesAtHundredSeconds) {
  int pass = 0;
  for (int k = 0; k < 50; ++k) {
    const double c = car(sample_counts(expected_rates(correlated2(), RatesConfig{}), 100.0, derive_seed(9, "car", k)));
    if (c >= 85.0 && c <= 120.0) ++pass;
  }
  EXPECT_GE(pass, 45);
}

TEST(CountCsv, RoundTrip) {
  const ExpectedRates rates = expected_rates(correlated2(), RatesConfig{});
  std::vector<CountRecord> records{sample_counts(rates, 10.0, 1, "fringe:0"),
                                   sample_counts(rates, 2.5, 2, "tomo:ZX")};
  std::stringstream ss;
  write_count_csv(ss, records);
  const auto back = read_count_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(back[k].setting_label, records[k].setting_label);
    EXPECT_EQ(back[k].outcome_counts, records[k].outcome_counts);
    EXPECT_EQ(back[k].accidental_estimate, records[k].accidental_estimate);
    EXPECT_EQ(back[k].integration_time_s, records[k].integration_time_s);
  }
}

TEST(CountCsv, HeaderIsFixed) {
  std::stringstream ss;
  write_count_csv(ss, {});
  EXPECT_EQ(ss.str(), "setting,i,j,counts,acc_estimate,T\n");
}

TEST(CountCsv, SchemaErrorsCarryLineNumbers) {
  auto error_of = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      read_count_csv(ss);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const std::string h = "setting,i,j,counts,acc_estimate,T\n";
  EXPECT_NE(error_of("bad,header\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of(h + "a,0,0,1,0,1\na,0,1,x,0,1\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of(h + "a,0,0,-1,0,1\n").find("negative count"), std::string::npos);
  EXPECT_NE(error_of(h + "a,0,0,1,0,1\na,0,1,1,0,1\n").find("not a square table"), std::string::npos);
  EXPECT_NE(error_of(h + "a,0,0,1,0\n").find("expected 6 columns"), std::string::npos);
  EXPECT_NE(error_of(h + "a,0,0,1,0,0\n").find("integration time"), std::string::npos);
  EXPECT_NE(error_of("").find("empty"), std::string::npos);
}
