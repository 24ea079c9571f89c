// Batch front-end: experiment subcommands, table emission, golden checks.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "momsens/experiments.hpp"

namespace {

std::string default_outdir() {
  const char* env = std::getenv("MOMSENS_OUT_DIR");
  return env ? env : ".";
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GMM moment-informativeness toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // parent options like --out may follow the subcommand

  std::string outdir = default_outdir();
  app.add_option("--out", outdir, "output directory (default $MOMSENS_OUT_DIR or .)")
      ->capture_default_str();

  // probit / weibull
  struct {
    double n = 1e6;
    std::uint64_t seed = 1;
    std::string weighting = "optimal";
    bool paper_scale = false;
  } sim[2];
  const char* names[2] = {"probit", "weibull"};
  const char* descs[2] = {"binary-choice example at its simulated truth",
                          "mixed proportional hazard example at its simulated truth"};
  CLI::App* subs[2];
  for (int i = 0; i < 2; ++i) {
    auto* c = app.add_subcommand(names[i], descs[i]);
    c->add_option("--n", sim[i].n, "simulated observations")->capture_default_str();
    c->add_option("--seed", sim[i].seed, "RNG seed")->capture_default_str();
    c->add_option("--weighting", sim[i].weighting, "optimal|diagonal")
        ->capture_default_str();
    c->add_flag("--paper-scale", sim[i].paper_scale, "use 1e7 observations");
    subs[i] = c;
  }

  // retire
  auto* retire = app.add_subcommand("retire", "joint retirement planning model");
  retire->require_subcommand(1);
  retire->fallthrough();
  std::string cfg_path, data_path;
  CLI::App* ret_sub[3];
  const char* ret_names[3] = {"simulate", "estimate", "sensitivity"};
  const char* ret_descs[3] = {"emit synthetic households, plans and histograms",
                              "indirect-inference estimation",
                              "gamma sensitivity tables at theta_star"};
  for (int i = 0; i < 3; ++i) {
    auto* c = retire->add_subcommand(ret_names[i], ret_descs[i]);
    c->add_option("--config", cfg_path, "key = value config file")->required();
    c->add_option("--data", data_path, "household CSV (plans simulated if absent)");
    ret_sub[i] = c;
  }

  // sensitivity --from-matrices
  auto* sens = app.add_subcommand("sensitivity", "report from user-supplied matrices");
  std::vector<std::string> matrix_paths;
  sens->add_option("--from-matrices", matrix_paths, "G.csv S.csv W.csv")
      ->expected(3)
      ->required();

  // check-goldens
  auto* check = app.add_subcommand("check-goldens", "compare long-format tables");
  std::string produced_path, golden_path;
  double tol_rel = 0.05, tol_abs = 0.02;
  check->add_option("--produced", produced_path, "produced long-format CSV")->required();
  check->add_option("--golden", golden_path, "golden long-format CSV")->required();
  check->add_option("--tol-rel", tol_rel, "relative tolerance for |value| > 0.05")
      ->capture_default_str();
  check->add_option("--tol-abs", tol_abs, "absolute tolerance otherwise")
      ->capture_default_str();

  // rerun
  auto* rerun = app.add_subcommand("rerun", "re-execute an experiment from its manifest");
  std::string manifest_path;
  rerun->add_option("--manifest", manifest_path, "manifest JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (int i = 0; i < 2; ++i) {
      if (!subs[i]->parsed()) continue;
      const auto n = static_cast<Eigen::Index>(sim[i].paper_scale ? 1e7 : sim[i].n);
      const auto w = momsens::weighting_from_string(sim[i].weighting);
      const auto res = (i == 0)
                           ? momsens::run_probit_experiment(n, sim[i].seed, w, outdir)
                           : momsens::run_weibull_experiment(n, sim[i].seed, w, outdir);
      print_files(res.files);
      return 0;
    }
    if (retire->parsed()) {
      const momsens::RetirementConfig cfg = momsens::load_retirement_config(cfg_path);
      std::optional<momsens::Dataset> data;
      if (!data_path.empty()) data = momsens::read_dataset_csv(data_path);
      if (ret_sub[0]->parsed()) {
        print_files(momsens::run_retire_simulate(cfg, data, outdir).files);
      } else if (ret_sub[1]->parsed()) {
        const auto res = momsens::run_retire_estimate(cfg, data, outdir);
        std::cout << "criterion " << res.estimate.criterion_value << " after "
                  << res.estimate.n_evals << " evaluations\n";
        print_files(res.files);
      } else {
        print_files(momsens::run_retire_sensitivity(cfg, data, outdir).files);
      }
      return 0;
    }
    if (sens->parsed()) {
      print_files(momsens::run_sensitivity_from_matrices(matrix_paths[0], matrix_paths[1],
                                                         matrix_paths[2], outdir)
                      .files);
      return 0;
    }
    if (check->parsed()) {
      momsens::GoldenTolerances tol;
      tol.rel = tol_rel;
      tol.abs_small = tol_abs;
      const auto res = momsens::golden_check(momsens::load_long_table(produced_path),
                                             momsens::load_long_table(golden_path), tol);
      std::cout << (res.pass ? "PASS" : "FAIL") << ": " << res.cells_compared
                << " cells compared, max abs deviation " << res.max_abs_deviation << "\n";
      if (!res.detail.empty()) std::cout << res.detail;
      return res.pass ? 0 : 1;
    }
    if (rerun->parsed()) {
      print_files(momsens::rerun_from_manifest(manifest_path));
      return 0;
    }
  } catch (const momsens::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const momsens::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
