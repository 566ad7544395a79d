#include <cmath>
#include <map>

#include "qunit/analysis.hpp"

namespace qunit {

Correlation correlation_E(const RMatrix& counts) {
  if (counts.rows() != 2 || counts.cols() != 2) {
    throw InputError("correlation_E needs a 2x2 count table");
  }
  if (!counts.allFinite()) {
    throw InputError("correlation_E: non-finite counts");
  }
  const double same = counts(0, 0) + counts(1, 1);
  const double diff = counts(0, 1) + counts(1, 0);
  const double total = same + diff;
  if (!(total > 0.0)) {
    throw InputError("correlation_E: total count must be positive");
  }
  Correlation c;
  c.value = (same - diff) / total;
  // dE/dN_same = (1 - E)/N, dE/dN_diff = -(1 + E)/N; Var(N_k) = |N_k|.
  const double var_same = std::abs(counts(0, 0)) + std::abs(counts(1, 1));
  const double var_diff = std::abs(counts(0, 1)) + std::abs(counts(1, 0));
  const double one_minus = 1.0 - c.value;
  const double one_plus = 1.0 + c.value;
  c.sigma = std::sqrt(var_same * one_minus * one_minus + var_diff * one_plus * one_plus) / total;
  return c;
}

ChshResult chsh_S(const ChshRecord& record) {
  ChshResult result;
  double var = 0.0;
  for (int k = 0; k < 4; ++k) {
    result.correlations[k] = correlation_E(record.entries[k].counts);
    result.s += kChshSigns[k] * result.correlations[k].value;
    var += result.correlations[k].sigma * result.correlations[k].sigma;
  }
  result.sigma = std::sqrt(var);
  return result;
}

std::array<std::pair<double, double>, 4> chsh_phase_pairs(const ChshSettings& settings) {
  return {{{settings.a, settings.b},
           {settings.a, settings.b_prime},
           {settings.a_prime, settings.b},
           {settings.a_prime, settings.b_prime}}};
}

std::string chsh_label(int role) {
  return std::string("chsh:") + kChshRoles.at(role);
}

std::string chsh16_label(int role, int x, int y) {
  return std::string("chsh16:") + kChshRoles.at(role) + ":" + std::to_string(x) + std::to_string(y);
}

ChshRecord chsh_record_from_counts(const std::vector<CountRecord>& records, ChshMode mode,
                                   bool subtract, const ChshSettings& settings) {
  std::map<std::string, const CountRecord*> by_label;
  for (const auto& r : records) {
    by_label[r.setting_label] = &r;
  }
  auto find = [&](const std::string& label) -> const CountRecord& {
    const auto it = by_label.find(label);
    if (it == by_label.end()) {
      throw InputError("CHSH data missing setting '" + label + "'");
    }
    if (it->second->dim() != 2) {
      throw InputError("CHSH setting '" + label + "' is not a 2x2 table");
    }
    return *it->second;
  };
  auto values = [&](const CountRecord& r) -> RMatrix {
    return subtract ? subtract_accidentals(r) : RMatrix(r.outcome_counts.cast<double>());
  };

  const auto phases = chsh_phase_pairs(settings);
  ChshRecord out;
  for (int role = 0; role < 4; ++role) {
    ChshEntry& entry = out.entries[role];
    entry.phase_a = phases[role].first;
    entry.phase_b = phases[role].second;
    if (mode == ChshMode::kProjector) {
      entry.counts = values(find(chsh_label(role)));
    } else {
      entry.counts.resize(2, 2);
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
          entry.counts(x, y) = values(find(chsh16_label(role, x, y)))(0, 0);
        }
      }
    }
  }
  return out;
}

}  // namespace qunit
