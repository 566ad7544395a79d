#include "qunit/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "qunit/random.hpp"

namespace qunit {

using nlohmann::json;

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kFringe: return "fringe";
    case Experiment::kChsh: return "chsh";
    case Experiment::kTomography: return "tomography";
    case Experiment::kEpr: return "epr";
    case Experiment::kPhaselock: return "phaselock";
    case Experiment::kFull: return "full";
  }
  return "unknown";
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown fields.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw InputError("config: field '" + display(path_) + "' must be an object");
    }
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) { return node_.at(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw InputError("config: field '" + field(key) + "' " + what);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) fail(key, "must be a number");
    out = at(key).get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    if (!at(key).is_number_integer()) fail(key, "must be an integer");
    out = at(key).get<int>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!at(key).is_boolean()) fail(key, "must be true or false");
    out = at(key).get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) fail(key, "must be a string");
    return at(key).get<std::string>();
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!known_.count(key)) {
        throw InputError("config: unknown field '" + field(key) + "'");
      }
    }
  }

 private:
  static std::string display(const std::string& p) { return p.empty() ? "<root>" : p; }

  const json& node_;
  std::string path_;
  std::set<std::string> known_;
};

bool is_seed(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

Complex parse_amplitude(const json& v, const std::string& where) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return Complex(v[0].get<double>(), v[1].get<double>());
  }
  throw InputError("config: field '" + where + "' entries must be numbers or [re, im] pairs");
}

void parse_source(Section& root, SourceConfig& src) {
  if (!root.has("source")) return;
  Section s(root.at("source"), "source");
  s.integer("dim", src.dim);
  if (src.dim < 2) s.fail("dim", "must be >= 2");
  bool split_given = false;
  bool phases_given = false;
  if (s.has("pump_split")) {
    const json& v = s.at("pump_split");
    if (!v.is_array()) s.fail("pump_split", "must be an array");
    src.pump_split.clear();
    for (const auto& e : v) src.pump_split.push_back(parse_amplitude(e, s.field("pump_split")));
    split_given = true;
  }
  if (s.has("set_phases")) {
    const json& v = s.at("set_phases");
    if (!v.is_array()) s.fail("set_phases", "must be an array");
    src.set_phases.clear();
    for (const auto& e : v) {
      if (!e.is_number()) s.fail("set_phases", "entries must be numbers");
      src.set_phases.push_back(e.get<double>());
    }
    phases_given = true;
  }
  if (!split_given) src.pump_split.assign(src.dim, Complex(1.0));
  if (!phases_given) src.set_phases.assign(src.dim - 1, 0.0);
  if (src.pump_split.size() != static_cast<std::size_t>(src.dim)) {
    s.fail("pump_split", "needs " + std::to_string(src.dim) + " entries");
  }
  if (src.set_phases.size() != static_cast<std::size_t>(src.dim - 1)) {
    s.fail("set_phases", "needs " + std::to_string(src.dim - 1) + " entries");
  }
  if (s.has("distinguishability")) {
    const json& v = s.at("distinguishability");
    if (v.is_number()) {
      src.distinguishability = v.get<double>();
      if (!(v.get<double>() >= 0.0 && v.get<double>() <= 1.0)) {
        s.fail("distinguishability", "must lie in [0, 1]");
      }
    } else if (v.is_object()) {
      SpectralModel m;
      Section d(v, s.field("distinguishability"));
      d.number("filter_bandwidth_ghz", m.filter_bandwidth_ghz);
      d.number("center_offset_nm", m.center_offset_nm);
      d.number("delay_mismatch_um", m.delay_mismatch_um);
      if (d.text("filter_shape", "gaussian") != "gaussian") {
        d.fail("filter_shape", "must be \"gaussian\"");
      }
      d.finish();
      if (!(m.filter_bandwidth_ghz > 0.0)) d.fail("filter_bandwidth_ghz", "must be > 0");
      src.distinguishability = m;
    } else {
      s.fail("distinguishability", "must be a number or a spectral model object");
    }
  }
  s.number("arm_loss_db", src.arm_loss_db);
  s.number("pair_rate_hz", src.pair_rate_hz);
  s.finish();
}

void parse_rates(Section& root, RatesConfig& r) {
  if (!root.has("rates")) return;
  Section s(root.at("rates"), "rates");
  s.number("true_cc_rate_hz", r.true_cc_rate_hz);
  s.number("accidental_rate_hz", r.accidental_rate_hz);
  s.number("coincidence_window_ns", r.coincidence_window_ns);
  s.number("detector_efficiency", r.detector_efficiency);
  if (s.has("singles_a_hz")) {
    double v = 0.0;
    s.number("singles_a_hz", v);
    r.singles_a_hz = v;
  }
  if (s.has("singles_b_hz")) {
    double v = 0.0;
    s.number("singles_b_hz", v);
    r.singles_b_hz = v;
  }
  s.finish();
}

void parse_fringe(Section& root, FringeConfig& f) {
  if (!root.has("fringe")) return;
  Section s(root.at("fringe"), "fringe");
  s.integer("points", f.points);
  s.number("integration_time_s", f.integration_time_s);
  if (s.has("outcome")) {
    const json& v = s.at("outcome");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
      s.fail("outcome", "must be a pair of detector indices [i, j]");
    }
    f.outcome_a = v[0].get<int>();
    f.outcome_b = v[1].get<int>();
  }
  const std::string est = s.text("estimator", "fit");
  if (est == "fit") {
    f.two_point = false;
  } else if (est == "two_point") {
    f.two_point = true;
  } else {
    s.fail("estimator", "must be \"fit\" or \"two_point\"");
  }
  s.finish();
}

void parse_chsh(Section& root, ChshConfig& c) {
  if (!root.has("chsh")) return;
  Section s(root.at("chsh"), "chsh");
  s.number("integration_time_s", c.integration_time_s);
  const std::string mode = s.text("mode", "projector");
  if (mode == "projector") {
    c.mode = ChshMode::kProjector;
  } else if (mode == "phase16") {
    c.mode = ChshMode::kPhasePairs16;
  } else {
    s.fail("mode", "must be \"projector\" or \"phase16\"");
  }
  if (s.has("phases")) {
    Section p(s.at("phases"), "chsh.phases");
    p.number("a", c.settings.a);
    p.number("a_prime", c.settings.a_prime);
    p.number("b", c.settings.b);
    p.number("b_prime", c.settings.b_prime);
    p.finish();
  }
  s.finish();
}

void parse_tomography(Section& root, TomographyConfig& t) {
  if (!root.has("tomography")) return;
  Section s(root.at("tomography"), "tomography");
  s.number("integration_time_s", t.integration_time_s);
  s.integer("mc_samples", t.mc_samples);
  const std::string lk = s.text("likelihood", "gaussian");
  if (lk == "gaussian") {
    t.likelihood = Likelihood::kGaussian;
  } else if (lk == "poisson") {
    t.likelihood = Likelihood::kPoisson;
  } else {
    s.fail("likelihood", "must be \"gaussian\" or \"poisson\"");
  }
  s.finish();
}

void parse_epr(Section& root, EprConfig& e) {
  if (!root.has("epr")) return;
  Section s(root.at("epr"), "epr");
  if (s.has("dim")) {
    int d = 0;
    s.integer("dim", d);
    e.dim = d;
  }
  s.number("integration_time_s", e.integration_time_s);
  s.finish();
}

void parse_phaselock(Section& root, PhaselockConfig& p) {
  if (!root.has("phaselock")) return;
  Section s(root.at("phaselock"), "phaselock");
  if (s.has("lock")) {
    Section l(s.at("lock"), "phaselock.lock");
    l.number("kp", p.lock.kp);
    l.number("ki", p.lock.ki);
    l.number("kd", p.lock.kd);
    l.number("sample_interval_s", p.lock.sample_interval_s);
    l.number("actuator_range_rad", p.lock.actuator_range_rad);
    l.number("pump_phase_factor", p.lock.pump_phase_factor);
    l.number("calibration_offset_rad", p.lock.calibration_offset_rad);
    l.number("intensity_noise", p.lock.intensity_noise);
    l.number("sweep_rate_rad_per_s", p.lock.sweep_rate_rad_per_s);
    l.finish();
  }
  if (s.has("drift")) {
    Section d(s.at("drift"), "phaselock.drift");
    d.number("random_walk_sigma_rad_per_sqrt_s", p.drift.random_walk_sigma_rad_per_sqrt_s);
    d.number("linear_drift_rad_per_s", p.drift.linear_drift_rad_per_s);
    d.number("initial_phase_rad", p.drift.initial_phase_rad);
    if (d.has("seed")) {
      if (!is_seed(d.at("seed"))) d.fail("seed", "must be a non-negative integer");
      p.drift.seed = d.at("seed").get<std::uint64_t>();
      p.drift_seed_given = true;
    }
    d.finish();
  }
  s.number("duration_s", p.duration_s);
  s.number("setpoint_rad", p.setpoint_rad);
  s.number("characterization_s", p.characterization_s);
  s.finish();
}

void parse_analysis(Section& root, AnalysisConfig& a) {
  if (!root.has("analysis")) return;
  Section s(root.at("analysis"), "analysis");
  const std::string mode = s.text("mode", "corrected");
  if (mode == "corrected") {
    a.subtract = true;
  } else if (mode == "raw") {
    a.subtract = false;
  } else {
    s.fail("mode", "must be \"raw\" or \"corrected\"");
  }
  if (s.has("target_theta")) {
    double theta = 0.0;
    s.number("target_theta", theta);
    a.target_theta = theta;
  }
  s.finish();
}

// Re-raise a validation message with the config prefix.
template <typename F>
void checked(F&& f) {
  try {
    f();
  } catch (const InputError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  cfg.document = doc;
  Section root(doc, "");
  if (!root.has("experiment")) {
    throw InputError("config: missing required field 'experiment'");
  }
  const json& exp = root.at("experiment");
  if (!exp.is_string()) root.fail("experiment", "must be a string");
  const std::string name = exp.get<std::string>();
  bool found = false;
  for (Experiment e : {Experiment::kFringe, Experiment::kChsh, Experiment::kTomography,
                       Experiment::kEpr, Experiment::kPhaselock, Experiment::kFull}) {
    if (experiment_name(e) == name) {
      cfg.experiment = e;
      found = true;
    }
  }
  if (!found) {
    root.fail("experiment", "must be one of fringe, chsh, tomography, epr, phaselock, full");
  }
  if (!root.has("seed")) {
    throw InputError("config: missing required field 'seed'");
  }
  if (!is_seed(root.at("seed"))) root.fail("seed", "must be a non-negative integer");
  cfg.seed = root.at("seed").get<std::uint64_t>();
  cfg.output_dir = root.text("output_dir", cfg.output_dir);

  parse_source(root, cfg.source);
  parse_rates(root, cfg.rates);
  parse_fringe(root, cfg.fringe);
  parse_chsh(root, cfg.chsh);
  parse_tomography(root, cfg.tomography);
  parse_epr(root, cfg.epr);
  parse_phaselock(root, cfg.phaselock);
  parse_analysis(root, cfg.analysis);
  root.finish();

  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  checked([&] { validate(cfg.source); });
  checked([&] { coherence_parameter(cfg.source); });
  checked([&] { validate(cfg.rates); });
  checked([&] { validate(cfg.phaselock.lock); });
  checked([&] { validate(cfg.phaselock.drift); });
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InputError(std::string("config: field '") + field + "' must be > 0");
    }
  };
  positive(cfg.fringe.integration_time_s, "fringe.integration_time_s");
  positive(cfg.chsh.integration_time_s, "chsh.integration_time_s");
  positive(cfg.tomography.integration_time_s, "tomography.integration_time_s");
  positive(cfg.epr.integration_time_s, "epr.integration_time_s");
  positive(cfg.phaselock.duration_s, "phaselock.duration_s");
  positive(cfg.phaselock.characterization_s, "phaselock.characterization_s");
  if (cfg.fringe.points < 4 && !cfg.fringe.two_point) {
    throw InputError("config: field 'fringe.points' must be >= 4 for the fit estimator");
  }
  if (cfg.fringe.points < 2) {
    throw InputError("config: field 'fringe.points' must be >= 2");
  }
  const int n = cfg.source.dim;
  if (cfg.fringe.outcome_a < 0 || cfg.fringe.outcome_a >= n || cfg.fringe.outcome_b < 0 ||
      cfg.fringe.outcome_b >= n) {
    throw InputError("config: field 'fringe.outcome' must index detectors in [0, source.dim)");
  }
  if (cfg.tomography.mc_samples != 0 && cfg.tomography.mc_samples < 2) {
    throw InputError("config: field 'tomography.mc_samples' must be 0 or >= 2");
  }
  if (cfg.epr.dim && *cfg.epr.dim < 2) {
    throw InputError("config: field 'epr.dim' must be >= 2");
  }
  const bool needs_qubits = cfg.experiment == Experiment::kFringe ||
                            cfg.experiment == Experiment::kChsh ||
                            cfg.experiment == Experiment::kTomography ||
                            cfg.experiment == Experiment::kFull;
  if (needs_qubits && n != 2) {
    throw InputError("config: field 'source.dim' must be 2 for the " +
                     experiment_name(cfg.experiment) + " experiment");
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("config: cannot open '" + path + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void override_dim(RunConfig& config, int dim) {
  if (dim < 2) {
    throw InputError("--dim must be >= 2");
  }
  config.source.dim = dim;
  if (config.source.pump_split.size() != static_cast<std::size_t>(dim)) {
    config.source.pump_split.assign(dim, Complex(1.0));
  }
  if (config.source.set_phases.size() != static_cast<std::size_t>(dim - 1)) {
    config.source.set_phases.assign(dim - 1, 0.0);
  }
  config.epr.dim = dim;
}

}  // namespace qunit
