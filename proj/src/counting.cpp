#include "qunit/counting.hpp"

#include <cmath>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "qunit/matrix_io.hpp"
#include "qunit/random.hpp"

namespace qunit {

void validate(const RatesConfig& rates) {
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InputError(std::string("rates.") + name + " must be finite and >= 0");
    }
  };
  non_negative(rates.true_cc_rate_hz, "true_cc_rate_hz");
  non_negative(rates.accidental_rate_hz, "accidental_rate_hz");
  non_negative(rates.detector_efficiency, "detector_efficiency");
  if (!(rates.coincidence_window_ns > 0.0)) {
    throw InputError("rates.coincidence_window_ns must be > 0");
  }
  if (rates.singles_a_hz) {
    non_negative(*rates.singles_a_hz, "singles_a_hz");
  }
  if (rates.singles_b_hz) {
    non_negative(*rates.singles_b_hz, "singles_b_hz");
  }
}

double accidental_rate(const RatesConfig& rates) {
  if (rates.singles_a_hz && rates.singles_b_hz) {
    return *rates.singles_a_hz * *rates.singles_b_hz * rates.coincidence_window_ns * 1e-9;
  }
  return rates.accidental_rate_hz;
}

double detected_pair_rate(double pair_rate_hz, double arm_loss_db, double detector_efficiency) {
  const double arm = detector_efficiency * std::pow(10.0, -arm_loss_db / 10.0);
  return pair_rate_hz * arm * arm;
}

RMatrix accidental_split(double accidental_rate_hz, int n) {
  return RMatrix::Constant(n, n, accidental_rate_hz / static_cast<double>(n * n));
}

ExpectedRates expected_rates(const RMatrix& probs, const RatesConfig& rates) {
  validate(rates);
  if (probs.rows() != probs.cols() || probs.rows() < 1) {
    throw InputError("probability table must be square");
  }
  if ((probs.array() < 0.0).any() || !probs.allFinite()) {
    throw InputError("probabilities must be finite and non-negative");
  }
  if (std::abs(probs.sum() - 1.0) > 1e-8) {
    throw InputError("probability table must sum to 1");
  }
  const int n = static_cast<int>(probs.rows());
  const double eta = rates.detector_efficiency;
  ExpectedRates out;
  out.accidental = accidental_split(accidental_rate(rates), n);
  out.total = rates.true_cc_rate_hz * eta * eta * probs + out.accidental;
  return out;
}

void validate(const CountRecord& record) {
  if (record.outcome_counts.rows() < 1 || record.outcome_counts.rows() != record.outcome_counts.cols()) {
    throw InputError("count record '" + record.setting_label + "' must be square");
  }
  if (record.accidental_estimate.rows() != record.outcome_counts.rows() ||
      record.accidental_estimate.cols() != record.outcome_counts.cols()) {
    throw InputError("count record '" + record.setting_label + "': accidental estimate shape mismatch");
  }
  if ((record.outcome_counts.array() < 0).any()) {
    throw InputError("count record '" + record.setting_label + "' has negative counts");
  }
  if (!(record.integration_time_s > 0.0)) {
    throw InputError("count record '" + record.setting_label + "' needs integration time > 0");
  }
  if (record.setting_label.find_first_of(",\n") != std::string::npos) {
    throw InputError("setting label may not contain ',' or newlines");
  }
}

CountRecord sample_counts(const ExpectedRates& rates, double integration_time_s,
                          std::uint64_t seed, std::string setting_label) {
  if (!(integration_time_s > 0.0)) {
    throw InputError("integration time must be > 0");
  }
  const auto n = rates.total.rows();
  CountRecord record;
  record.setting_label = std::move(setting_label);
  record.integration_time_s = integration_time_s;
  record.outcome_counts.resize(n, n);
  record.accidental_estimate = rates.accidental * integration_time_s;
  Rng rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      record.outcome_counts(i, j) = rng.poisson(rates.total(i, j) * integration_time_s);
    }
  }
  return record;
}

RMatrix expected_counts(const ExpectedRates& rates, double integration_time_s) {
  return rates.total * integration_time_s;
}

RMatrix subtract_accidentals(const CountRecord& record) {
  return record.outcome_counts.cast<double>() - record.accidental_estimate;
}

double car(const CountRecord& record) {
  const double acc = record.accidental_estimate.sum();
  if (!(acc > 0.0)) {
    throw InputError("CAR undefined: accidental estimate is zero");
  }
  return (static_cast<double>(record.outcome_counts.sum()) - acc) / acc;
}

void write_count_csv(std::ostream& out, const std::vector<CountRecord>& records) {
  out << kCountCsvHeader << '\n';
  for (const auto& record : records) {
    validate(record);
    const std::string t = format_double(record.integration_time_s);
    for (Eigen::Index i = 0; i < record.outcome_counts.rows(); ++i) {
      for (Eigen::Index j = 0; j < record.outcome_counts.cols(); ++j) {
        out << record.setting_label << ',' << i << ',' << j << ',' << record.outcome_counts(i, j)
            << ',' << format_double(record.accidental_estimate(i, j)) << ',' << t << '\n';
      }
    }
  }
}

namespace {

struct CsvRow {
  std::string setting;
  long i = 0;
  long j = 0;
  std::int64_t counts = 0;
  double acc = 0.0;
  double t = 0.0;
};

[[noreturn]] void schema_error(int line_no, const std::string& what) {
  throw InputError("count CSV line " + std::to_string(line_no) + ": " + what);
}

CsvRow parse_row(const std::string& line, int line_no) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  if (fields.size() != 6) {
    schema_error(line_no, "expected 6 columns, got " + std::to_string(fields.size()));
  }
  auto parse_int = [&](const std::string& s, const char* name) {
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0') {
      schema_error(line_no, std::string("column '") + name + "' is not an integer");
    }
    return v;
  };
  auto parse_real = [&](const std::string& s, const char* name) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) {
      schema_error(line_no, std::string("column '") + name + "' is not a finite number");
    }
    return v;
  };
  CsvRow row;
  row.setting = fields[0];
  if (row.setting.empty()) {
    schema_error(line_no, "empty setting label");
  }
  row.i = static_cast<long>(parse_int(fields[1], "i"));
  row.j = static_cast<long>(parse_int(fields[2], "j"));
  row.counts = parse_int(fields[3], "counts");
  row.acc = parse_real(fields[4], "acc_estimate");
  row.t = parse_real(fields[5], "T");
  if (row.i < 0 || row.j < 0) {
    schema_error(line_no, "negative detector index");
  }
  if (row.counts < 0) {
    schema_error(line_no, "negative count");
  }
  if (!(row.t > 0.0)) {
    schema_error(line_no, "integration time must be > 0");
  }
  return row;
}

}  // namespace

std::vector<CountRecord> read_count_csv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) {
    throw InputError("count CSV is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line != kCountCsvHeader) {
    schema_error(line_no, std::string("header must be '") + kCountCsvHeader + "'");
  }

  struct Group {
    std::vector<CsvRow> rows;
    int first_line = 0;
  };
  std::vector<Group> groups;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    CsvRow row = parse_row(line, line_no);
    if (groups.empty() || groups.back().rows.front().setting != row.setting) {
      groups.push_back({{}, line_no});
    }
    groups.back().rows.push_back(std::move(row));
  }

  std::vector<CountRecord> records;
  for (const auto& group : groups) {
    const auto cells = group.rows.size();
    const long n = std::lround(std::sqrt(static_cast<double>(cells)));
    if (n < 1 || static_cast<std::size_t>(n * n) != cells) {
      schema_error(group.first_line, "setting '" + group.rows.front().setting +
                                         "' has " + std::to_string(cells) +
                                         " rows, not a square table");
    }
    CountRecord record;
    record.setting_label = group.rows.front().setting;
    record.integration_time_s = group.rows.front().t;
    record.outcome_counts = CountMatrix::Constant(n, n, -1);
    record.accidental_estimate = RMatrix::Zero(n, n);
    int row_line = group.first_line;
    for (const auto& row : group.rows) {
      if (row.i >= n || row.j >= n) {
        schema_error(row_line, "detector index out of range for " + std::to_string(n) + "x" +
                                   std::to_string(n) + " table");
      }
      if (record.outcome_counts(row.i, row.j) >= 0) {
        schema_error(row_line, "duplicate detector pair");
      }
      if (row.t != record.integration_time_s) {
        schema_error(row_line, "integration time differs within a setting");
      }
      record.outcome_counts(row.i, row.j) = row.counts;
      record.accidental_estimate(row.i, row.j) = row.acc;
      ++row_line;
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace qunit
