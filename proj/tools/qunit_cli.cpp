#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qunit/config.hpp"
#include "qunit/experiment.hpp"
#include "qunit/matrix_io.hpp"
#include "qunit/multiport.hpp"
#include "qunit/random.hpp"
#include "qunit/sourcesim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> dim;
  std::optional<std::string> mode;
};

void apply_overrides(qunit::RunConfig& cfg, const Common& c) {
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.output_dir = *c.out;
  if (c.dim) qunit::override_dim(cfg, *c.dim);
  if (c.mode) cfg.analysis.subtract = (*c.mode == "corrected");
  qunit::validate(cfg);
}

int cmd_run(const Common& c) {
  qunit::RunConfig cfg = qunit::load_run_config(c.config);
  apply_overrides(cfg, c);
  const qunit::RunOutput out = qunit::run_experiment(cfg);
  qunit::write_outputs(cfg.output_dir, out);
  std::cout << "wrote " << out.files.size() << " files to " << cfg.output_dir << "\n";
  return kExitOk;
}

int cmd_analyze(const Common& c, const std::string& counts_path, std::optional<double> target_theta) {
  qunit::AnalysisOptions opt;
  std::string out_dir = ".";
  if (!c.config.empty()) {
    qunit::RunConfig cfg = qunit::load_run_config(c.config);
    apply_overrides(cfg, c);
    opt = qunit::analysis_options(cfg);
    out_dir = cfg.output_dir;
  } else {
    if (c.seed) opt.mc_seed = qunit::derive_seed(*c.seed, "mc");
    if (c.mode) opt.subtract = (*c.mode == "corrected");
    if (c.out) out_dir = *c.out;
  }
  if (target_theta) opt.target = qunit::bell_target(*target_theta);

  std::ifstream in(counts_path);
  if (!in) {
    throw qunit::InputError("cannot open counts file '" + counts_path + "'");
  }
  const auto records = qunit::read_count_csv(in);
  if (records.empty()) {
    throw qunit::InputError("counts file '" + counts_path + "' holds no records");
  }
  const qunit::AnalysisOutput res = qunit::analyze_records(records, opt);
  qunit::RunOutput out;
  out.files["report.json"] = qunit::dump_json(res.report);
  if (res.fringe_fit_csv) out.files["fringe_fit.csv"] = *res.fringe_fit_csv;
  qunit::write_outputs(out_dir, out);
  std::cout << qunit::dump_json(res.report);
  return kExitOk;
}

int cmd_reck(const std::string& matrix_path, const std::string& out_path) {
  std::ifstream in(matrix_path);
  if (!in) {
    throw qunit::InputError("cannot open matrix file '" + matrix_path + "'");
  }
  const qunit::CMatrix u = qunit::read_matrix(in);
  const qunit::ReckMesh mesh = qunit::reck_decompose(u);
  std::ofstream out(out_path);
  if (!out) {
    throw qunit::InputError("cannot write mesh file '" + out_path + "'");
  }
  qunit::write_mesh(out, mesh);
  const double err = (qunit::mesh_to_unitary(mesh) - u).cwiseAbs().maxCoeff();
  std::cout << mesh.cells.size() << " cells, reconstruction error " << qunit::format_double(err) << "\n";
  return kExitOk;
}

int cmd_epr(int dim) {
  if (dim < 2) {
    throw qunit::InputError("--dim must be >= 2");
  }
  bool all_perfect = true;
  for (int k = 0; k < dim; ++k) {
    const qunit::RMatrix table = qunit::epr_correlation_table(dim, k);
    const bool perfect = qunit::is_perfect_correlation(table);
    all_perfect = all_perfect && perfect;
    std::cout << "k=" << k << (perfect ? " perfect" : " NOT perfect") << "\n";
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      for (Eigen::Index j = 0; j < table.cols(); ++j) {
        std::cout << (j ? " " : "  ") << qunit::format_double(table(i, j));
      }
      std::cout << "\n";
    }
  }
  return all_perfect ? kExitOk : kExitNumerical;
}

int cmd_phaselock(const Common& c) {
  qunit::RunConfig cfg = qunit::load_run_config(c.config);
  cfg.experiment = qunit::Experiment::kPhaselock;
  apply_overrides(cfg, c);
  const qunit::RunOutput out = qunit::run_experiment(cfg);
  qunit::write_outputs(cfg.output_dir, out);
  std::cout << qunit::dump_json(out.report["simulation"]["phaselock"]);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qunit: path-entangled quNit source simulator and analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(QUNIT_VERSION));

  Common common;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "JSON run configuration");
    if (config_required) opt->required();
    sub->add_option("--seed", common.seed, "root seed override");
    sub->add_option("--out", common.out, "output directory override");
    sub->add_option("--mode", common.mode, "analysis mode")->check(CLI::IsMember({"raw", "corrected"}));
  };

  CLI::App* run = app.add_subcommand("run", "simulate and analyze the configured experiment");
  add_common(run, true);
  run->add_option("--dim", common.dim, "source dimension override");

  CLI::App* analyze = app.add_subcommand("analyze", "analyze a counts CSV");
  add_common(analyze, false);
  std::string counts_path;
  std::optional<double> target_theta;
  analyze->add_option("--counts", counts_path, "counts CSV")->required();
  analyze->add_option("--target-theta", target_theta, "fidelity target phase (rad)");

  CLI::App* reck = app.add_subcommand("reck", "compile a unitary matrix file into a mesh file");
  std::string matrix_path;
  std::string mesh_path;
  reck->add_option("--matrix", matrix_path, "unitary matrix file")->required();
  reck->add_option("--out", mesh_path, "mesh output file")->required();

  CLI::App* epr = app.add_subcommand("epr", "print the EPR correlation tables");
  int epr_dim = 4;
  epr->add_option("--dim", epr_dim, "quNit dimension");

  CLI::App* lock = app.add_subcommand("phaselock", "simulate the phase lock");
  add_common(lock, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(common);
    if (*analyze) return cmd_analyze(common, counts_path, target_theta);
    if (*reck) return cmd_reck(matrix_path, mesh_path);
    if (*epr) return cmd_epr(epr_dim);
    if (*lock) return cmd_phaselock(common);
  } catch (const qunit::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const qunit::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
