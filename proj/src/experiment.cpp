#include "qunit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qunit/matrix_io.hpp"
#include "qunit/multiport.hpp"
#include "qunit/random.hpp"

namespace qunit {

using nlohmann::json;

std::string fringe_label(double phase) {
  return "fringe:" + format_double(phase);
}

std::string epr_label(int k) {
  return "epr:k=" + std::to_string(k);
}

std::string dump_json(const json& value) {
  return value.dump(2) + "\n";
}

namespace {

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

double parse_number(const std::string& text, const std::string& label) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw InputError("malformed setting label '" + label + "'");
  }
  return v;
}

json matrix_json(const RMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(row);
  }
  return rows;
}

RMatrix record_values(const CountRecord& r, bool subtract) {
  return subtract ? subtract_accidentals(r) : RMatrix(r.outcome_counts.cast<double>());
}

void add_flag(json& report, const std::string& flag) {
  json& flags = report["flags"];
  for (const auto& f : flags) {
    if (f == flag) return;
  }
  flags.push_back(flag);
}

// ------------------------------------------------------------------ fringe

void analyze_fringe(const std::vector<const CountRecord*>& group, const AnalysisOptions& opt,
                    json& report, std::optional<std::string>& fit_csv) {
  auto scan_for = [&](bool subtract) {
    FringeScan scan;
    for (const CountRecord* r : group) {
      if (opt.fringe_outcome_a >= r->dim() || opt.fringe_outcome_b >= r->dim()) {
        throw InputError("fringe outcome outside the recorded table for '" + r->setting_label + "'");
      }
      scan.phases.push_back(parse_number(r->setting_label.substr(7), r->setting_label));
      scan.cc_counts.push_back(record_values(*r, subtract)(opt.fringe_outcome_a, opt.fringe_outcome_b));
      scan.integration_time_s = r->integration_time_s;
    }
    return scan;
  };
  auto fit_of = [&](const FringeScan& scan) {
    return opt.fringe_two_point ? two_point_extrema(scan) : fringe_extrema(scan);
  };

  const FringeScan raw = scan_for(false);
  const FringeScan corrected = scan_for(true);
  const FringeFit raw_fit = fit_of(raw);
  const FringeFit cor_fit = fit_of(corrected);
  const FringeVisibility v = fringe_visibility(raw_fit);
  const FringeVisibility vc = fringe_visibility(cor_fit);

  report["V"] = v.value;
  report["sigma_V"] = v.sigma;
  report["V_c"] = vc.value;
  report["sigma_V_c"] = vc.sigma;
  if (v.floored || vc.floored) add_flag(report, "visibility_floored");
  if (v.degenerate || vc.degenerate) add_flag(report, "fringe_degenerate");

  const FringeFit& sel = opt.subtract ? cor_fit : raw_fit;
  report["fringe"] = {
      {"estimator", opt.fringe_two_point ? "two_point" : "fit"},
      {"points", raw.phases.size()},
      {"outcome", {opt.fringe_outcome_a, opt.fringe_outcome_b}},
      {"cc_max", sel.cc_max},
      {"cc_min", sel.cc_min},
      {"phase_max", sel.phase_max},
      {"phase_min", sel.phase_min},
  };

  const FringeScan& scan = opt.subtract ? corrected : raw;
  std::ostringstream csv;
  csv << "phase,counts,fit\n";
  for (std::size_t k = 0; k < scan.phases.size(); ++k) {
    csv << format_double(scan.phases[k]) << ',' << format_double(scan.cc_counts[k]) << ','
        << format_double(sel.evaluate(scan.phases[k])) << '\n';
  }
  fit_csv = csv.str();
}

// -------------------------------------------------------------------- CHSH

void analyze_chsh(const std::vector<CountRecord>& records, ChshMode mode, const AnalysisOptions& opt,
                  json& report) {
  const ChshResult raw = chsh_S(chsh_record_from_counts(records, mode, false, opt.chsh_settings));
  const ChshResult cor = chsh_S(chsh_record_from_counts(records, mode, true, opt.chsh_settings));
  const ChshResult& sel = opt.subtract ? cor : raw;
  report["S"] = sel.s;
  report["sigma_S"] = sel.sigma;
  json corr = json::array();
  for (int k = 0; k < 4; ++k) {
    corr.push_back({{"setting", kChshRoles[k]},
                    {"E", sel.correlations[k].value},
                    {"sigma_E", sel.correlations[k].sigma}});
  }
  report["chsh"] = {
      {"mode", mode == ChshMode::kProjector ? "projector" : "phase16"},
      {"S_raw", raw.s},
      {"sigma_S_raw", raw.sigma},
      {"S_corrected", cor.s},
      {"sigma_S_corrected", cor.sigma},
      {"correlations", corr},
  };
}

// -------------------------------------------------------------- tomography

void analyze_tomography(const std::vector<CountRecord>& records, const AnalysisOptions& opt,
                        json& report) {
  const TomographyRecord rec = tomography_record_from_counts(records);
  TomographyOptions topt;
  topt.subtract = opt.subtract;
  topt.likelihood = opt.likelihood;
  topt.target = opt.target;
  TomographyResult res = mle_tomography(rec, topt);
  if (opt.mc_samples > 0) {
    const McUncertainty mc = monte_carlo_uncertainty(rec, opt.mc_samples, opt.mc_seed, topt);
    res.fidelity_err = mc.fidelity_err;
    res.tangle_err = mc.tangle_err;
  }
  report["rho"] = matrix_to_string(res.rho.entries());
  report["F"] = res.fidelity;
  report["T"] = res.tangle;
  report["F_err"] = res.fidelity_err;
  report["T_err"] = res.tangle_err;
  report["loglikelihood"] = res.loglikelihood;
  report["tomography"] = {
      {"likelihood", opt.likelihood == Likelihood::kGaussian ? "gaussian" : "poisson"},
      {"mc_samples", opt.mc_samples},
      {"iterations", res.iterations},
      {"concurrence", concurrence(res.rho)},
  };
}

// --------------------------------------------------------------------- EPR

void analyze_epr(const std::vector<const CountRecord*>& group, const AnalysisOptions& opt,
                 json& report) {
  json tables = json::array();
  for (const CountRecord* r : group) {
    const double kv = parse_number(r->setting_label.substr(6), r->setting_label);
    const int n = r->dim();
    if (kv != std::floor(kv) || kv < 0 || kv >= n) {
      throw InputError("EPR setting '" + r->setting_label + "' has k outside [0, N)");
    }
    const int k = static_cast<int>(kv);
    const RMatrix values = record_values(*r, opt.subtract);
    const double total = values.sum();
    if (!(total > 0.0)) {
      throw InputError("EPR setting '" + r->setting_label + "' has no counts");
    }
    double on_support = 0.0;
    for (int a = 0; a < n; ++a) {
      on_support += values(a, ((k - a) % n + n) % n);
    }
    tables.push_back({{"k", k},
                      {"dim", n},
                      {"table", matrix_json(values / total)},
                      {"contrast", on_support / total}});
  }
  report["epr_measured"] = tables;
}

}  // namespace

AnalysisOptions analysis_options(const RunConfig& config) {
  AnalysisOptions opt;
  opt.subtract = config.analysis.subtract;
  opt.chsh_settings = config.chsh.settings;
  if (config.analysis.target_theta) {
    opt.target = bell_target(*config.analysis.target_theta);
  } else if (config.source.dim == 2) {
    opt.target = ideal_state(config.source);
  }
  opt.likelihood = config.tomography.likelihood;
  opt.mc_samples = config.tomography.mc_samples;
  opt.mc_seed = derive_seed(config.seed, "mc");
  opt.fringe_outcome_a = config.fringe.outcome_a;
  opt.fringe_outcome_b = config.fringe.outcome_b;
  opt.fringe_two_point = config.fringe.two_point;
  return opt;
}

AnalysisOutput analyze_records(const std::vector<CountRecord>& records,
                               const AnalysisOptions& options) {
  AnalysisOutput out;
  json& report = out.report;
  report["mode"] = options.subtract ? "corrected" : "raw";
  report["flags"] = json::array();

  std::vector<const CountRecord*> fringe;
  std::vector<const CountRecord*> epr;
  bool chsh = false;
  bool chsh16 = false;
  bool tomo = false;
  std::vector<std::string> unknown;
  for (const auto& r : records) {
    validate(r);
    if (starts_with(r.setting_label, "fringe:")) {
      fringe.push_back(&r);
    } else if (starts_with(r.setting_label, "chsh:")) {
      chsh = true;
    } else if (starts_with(r.setting_label, "chsh16:")) {
      chsh16 = true;
    } else if (starts_with(r.setting_label, "tomo:")) {
      tomo = true;
    } else if (starts_with(r.setting_label, "epr:k=")) {
      epr.push_back(&r);
    } else {
      unknown.push_back(r.setting_label);
    }
  }
  if (!records.empty() && unknown.size() == records.size()) {
    throw InputError("no recognized setting labels (expected fringe:, chsh:, chsh16:, tomo:, epr:k=)");
  }
  if (!unknown.empty()) {
    add_flag(report, "unrecognized_settings_ignored");
  }

  double counts_total = 0.0;
  double acc_total = 0.0;
  for (const auto& r : records) {
    counts_total += static_cast<double>(r.outcome_counts.sum());
    acc_total += r.accidental_estimate.sum();
  }
  if (acc_total > 0.0) {
    report["CAR"] = (counts_total - acc_total) / acc_total;
  }

  if (!fringe.empty()) analyze_fringe(fringe, options, report, out.fringe_fit_csv);
  if (chsh) analyze_chsh(records, ChshMode::kProjector, options, report);
  if (chsh16 && !chsh) analyze_chsh(records, ChshMode::kPhasePairs16, options, report);
  if (tomo) analyze_tomography(records, options, report);
  if (!epr.empty()) analyze_epr(epr, options, report);
  return out;
}

// -------------------------------------------------------------- simulation

namespace {

CountRecord sample_setting(const RMatrix& probs, const RunConfig& cfg, double t, std::uint64_t seed,
                           const std::string& label) {
  return sample_counts(expected_rates(probs, cfg.rates), t, seed, label);
}

CMatrix analyzer(double phase) {
  return analyzer_unitary(AnalyzerSetting{0.5, wrap_two_pi(phase)});
}

}  // namespace

std::vector<CountRecord> simulate_fringe(const RunConfig& cfg) {
  const DensityMatrix rho = effective_density(cfg.source);
  const int points = cfg.fringe.points;
  const CMatrix ub = analyzer(0.0);
  std::vector<CountRecord> out;
  out.reserve(points);
  for (int m = 0; m < points; ++m) {
    const double phase = kTwoPi * m / points;
    const RMatrix probs = coincidence_probs(rho, analyzer(phase), ub);
    out.push_back(sample_setting(probs, cfg, cfg.fringe.integration_time_s,
                                 derive_seed(cfg.seed, "fringe", m), fringe_label(phase)));
  }
  return out;
}

std::vector<CountRecord> simulate_chsh(const RunConfig& cfg) {
  const DensityMatrix rho = effective_density(cfg.source);
  const auto pairs = chsh_phase_pairs(cfg.chsh.settings);
  const double t = cfg.chsh.integration_time_s;
  std::vector<CountRecord> out;
  for (int role = 0; role < 4; ++role) {
    const auto [pa, pb] = pairs[role];
    if (cfg.chsh.mode == ChshMode::kProjector) {
      const RMatrix probs = coincidence_probs(rho, analyzer(pa), analyzer(pb));
      out.push_back(sample_setting(probs, cfg, t, derive_seed(cfg.seed, "chsh", role), chsh_label(role)));
    } else {
      for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
          const RMatrix probs = coincidence_probs(rho, analyzer(pa + x * kPi), analyzer(pb + y * kPi));
          out.push_back(sample_setting(probs, cfg, t,
                                       derive_seed(cfg.seed, "chsh16", 4 * role + 2 * x + y),
                                       chsh16_label(role, x, y)));
        }
      }
    }
  }
  return out;
}

std::vector<CountRecord> simulate_tomography(const RunConfig& cfg) {
  const DensityMatrix rho = effective_density(cfg.source);
  std::vector<CountRecord> out;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const auto ba = static_cast<Basis>(a);
      const auto bb = static_cast<Basis>(b);
      const RMatrix probs = coincidence_probs(rho, analyzer_for_basis(ba), analyzer_for_basis(bb));
      out.push_back(sample_setting(probs, cfg, cfg.tomography.integration_time_s,
                                   derive_seed(cfg.seed, "tomo", 3 * a + b), tomography_label(ba, bb)));
    }
  }
  return out;
}

std::vector<CountRecord> simulate_epr(const RunConfig& cfg) {
  const int n = cfg.epr.dim.value_or(cfg.source.dim);
  std::vector<CountRecord> out;
  for (int k = 0; k < n; ++k) {
    out.push_back(sample_setting(epr_correlation_table(n, k), cfg, cfg.epr.integration_time_s,
                                 derive_seed(cfg.seed, "epr", k), epr_label(k)));
  }
  return out;
}

PhaselockOutcome simulate_phaselock(const RunConfig& cfg) {
  const PhaselockConfig& pl = cfg.phaselock;
  DriftModel drift = pl.drift;
  if (!pl.drift_seed_given) {
    drift.seed = derive_seed(cfg.seed, "phaselock-drift");
  }
  PhaselockOutcome out;
  out.offset_estimate =
      characterize(pl.lock, pl.characterization_s, derive_seed(cfg.seed, "phaselock-characterize"));
  const std::uint64_t loop_seed = derive_seed(cfg.seed, "phaselock-loop");
  out.locked = run_lock(pl.lock, drift, pl.duration_s, pl.setpoint_rad, out.offset_estimate, loop_seed);
  LockConfig open = pl.lock;
  open.kp = open.ki = open.kd = 0.0;
  out.unlocked = run_lock(open, drift, pl.duration_s, pl.setpoint_rad, out.offset_estimate, loop_seed);
  const double settle = 0.5 * pl.duration_s;
  out.summary = {
      {"calibration_offset_rad", pl.lock.calibration_offset_rad},
      {"offset_estimate_rad", out.offset_estimate},
      {"offset_error_rad", wrap_pi(out.offset_estimate - pl.lock.calibration_offset_rad)},
      {"samples", out.locked.samples.size()},
      {"wrap_events", out.locked.wrap_events},
      {"rms_error_locked_rad", rms_error(out.locked, settle)},
      {"rms_error_unlocked_rad", rms_error(out.unlocked, settle)},
      {"rms_window_start_s", settle},
  };
  return out;
}

RunOutput run_experiment(const RunConfig& cfg) {
  validate(cfg);
  RunOutput out;
  const Experiment e = cfg.experiment;
  auto append = [&](std::vector<CountRecord> recs) {
    for (auto& r : recs) out.records.push_back(std::move(r));
  };
  if (e == Experiment::kFringe || e == Experiment::kFull) append(simulate_fringe(cfg));
  if (e == Experiment::kChsh || e == Experiment::kFull) append(simulate_chsh(cfg));
  if (e == Experiment::kTomography || e == Experiment::kFull) append(simulate_tomography(cfg));
  if (e == Experiment::kEpr) append(simulate_epr(cfg));

  AnalysisOutput analysis = analyze_records(out.records, analysis_options(cfg));
  out.report = std::move(analysis.report);

  json sim;
  sim["experiment"] = experiment_name(e);
  sim["flags"] = json::array();
  if (e != Experiment::kPhaselock) {
    sim["coherence_parameter"] = coherence_parameter(cfg.source);
    if (accidental_rate(cfg.rates) > 0.0) {
      sim["flags"].push_back("uniform_accidentals_assumed");
    }
  }
  if (e == Experiment::kEpr) {
    const int n = cfg.epr.dim.value_or(cfg.source.dim);
    json tables = json::array();
    for (int k = 0; k < n; ++k) {
      const RMatrix table = epr_correlation_table(n, k);
      tables.push_back({{"k", k}, {"table", matrix_json(table)}, {"perfect", is_perfect_correlation(table)}});
    }
    sim["epr"] = {{"dim", n}, {"tables", tables}};
  }
  if (e == Experiment::kPhaselock) {
    const PhaselockOutcome lock = simulate_phaselock(cfg);
    sim["phaselock"] = lock.summary;
    std::ostringstream csv;
    write_lock_csv(csv, lock.locked);
    out.files["phaselock.csv"] = csv.str();
  }
  out.report["simulation"] = sim;

  if (!out.records.empty()) {
    std::ostringstream csv;
    write_count_csv(csv, out.records);
    out.files["counts.csv"] = csv.str();
  }
  if (analysis.fringe_fit_csv) {
    out.files["fringe_fit.csv"] = *analysis.fringe_fit_csv;
  }
  out.files["report.json"] = dump_json(out.report);

  json manifest;
  manifest["config_hash"] = config_hash(cfg.document);
  manifest["seed"] = cfg.seed;
  manifest["experiment"] = experiment_name(e);
  manifest["tool_version"] = QUNIT_VERSION;
  manifest["rng_version"] = kRngVersion;
  json files = json::array();
  for (const auto& [name, content] : out.files) files.push_back(name);
  files.push_back("manifest.json");
  manifest["files"] = files;
  out.files["manifest.json"] = dump_json(manifest);
  return out;
}

void write_outputs(const std::string& dir, const RunOutput& output) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  }
  for (const auto& [name, content] : output.files) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) {
      throw InputError("cannot write '" + path.string() + "'");
    }
    f << content;
  }
}

}  // namespace qunit
