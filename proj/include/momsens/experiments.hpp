#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "momsens/config.hpp"
#include "momsens/csv.hpp"
#include "momsens/golden.hpp"
#include "momsens/models/probit.hpp"
#include "momsens/models/weibull.hpp"
#include "momsens/report_io.hpp"

namespace momsens {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Weighting { optimal, diagonal };

inline std::string to_string(Weighting w) {
  return w == Weighting::optimal ? "optimal" : "diagonal";
}

inline Weighting weighting_from_string(const std::string& s) {
  if (s == "optimal") return Weighting::optimal;
  if (s == "diagonal") return Weighting::diagonal;
  throw ConfigError("weighting must be 'optimal' or 'diagonal', got '" + s + "'");
}

inline Matrix make_weighting(Weighting w, const Matrix& s) {
  if (w == Weighting::diagonal) return diagonal_weight(s);
  SymmetricSolver ss(s);
  if (!ss.positive_definite() || !(ss.condition() <= kConditionLimit)) {
    throw SingularS("optimal weighting: S is numerically singular");
  }
  return symmetrized(ss.inverse());
}

struct ExperimentResult {
  GmmIngredients ingredients;
  SensitivityReport report;
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline void write_ingredient_files(const std::filesystem::path& dir,
                                   const std::string& stem, const GmmIngredients& ing,
                                   const SensitivityReport& rep,
                                   const std::string& title,
                                   std::vector<std::filesystem::path>& files) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto gpath = dir / (stem + "_G.csv");
  const auto spath = dir / (stem + "_S.csv");
  const auto wpath = dir / (stem + "_W.csv");
  const auto lpath = dir / (stem + "_sensitivity.csv");
  const auto mpath = dir / (stem + "_tables.md");
  write_matrix_csv(gpath, ing.G);
  write_matrix_csv(spath, ing.S);
  write_matrix_csv(wpath, ing.W);
  atomic_write(lpath, report_to_long_csv(rep));
  atomic_write(mpath, report_to_markdown(rep, title));
  files.insert(files.end(), {gpath, spath, wpath, lpath, mpath});
}

inline void write_manifest(const std::filesystem::path& dir, const std::string& stem,
                           nlohmann::json j, std::vector<std::filesystem::path>& files) {
  j["tool"] = "momsens";
  j["version"] = kToolVersion;
  const auto path = dir / (stem + "_manifest.json");
  atomic_write(path, j.dump(2) + "\n");
  files.push_back(path);
}

}  // namespace detail

// Simulates the probit design at its truth, estimates (G, S) by Monte Carlo at
// that point, and emits ingredient CSVs, the long-format sensitivity CSV, the
// blocked Markdown tables and a manifest.
inline ExperimentResult run_probit_experiment(Eigen::Index n, std::uint64_t seed,
                                              Weighting weighting,
                                              const std::filesystem::path& outdir) {
  const ProbitModel model;
  const Dataset data = simulate_probit(n, seed);
  const Vector theta = probit_theta_vector();
  const Matrix g = numerical_jacobian(model, data, theta, JacobianScheme::smooth);
  const Matrix s = moment_covariance(model, data, theta);
  const Matrix w = make_weighting(weighting, s);
  ExperimentResult out{make_ingredients(g, s, w), {}, {}};
  out.report = full_report(out.ingredients, model.param_labels(), model.moment_labels());
  const std::string stem = "probit_" + to_string(weighting);
  detail::write_ingredient_files(outdir, stem, out.ingredients, out.report,
                                 "Probit model, " + to_string(weighting) + " weighting",
                                 out.files);
  detail::write_manifest(outdir, stem,
                         {{"experiment", "probit"},
                          {"n", n},
                          {"seed", seed},
                          {"weighting", to_string(weighting)}},
                         out.files);
  return out;
}

struct WeibullSummary {
  double median = 0.0, below_1 = 0.0, above_2 = 0.0;
};

inline WeibullSummary weibull_duration_summary(const Dataset& data) {
  Vector t = data.col("T");
  std::sort(t.begin(), t.end());
  const Eigen::Index n = t.size();
  WeibullSummary s;
  s.median = (n % 2 == 1) ? t(n / 2) : 0.5 * (t(n / 2 - 1) + t(n / 2));
  s.below_1 = static_cast<double>(std::lower_bound(t.begin(), t.end(), 1.0) - t.begin()) / n;
  s.above_2 = static_cast<double>(t.end() - std::upper_bound(t.begin(), t.end(), 2.0)) / n;
  return s;
}

inline ExperimentResult run_weibull_experiment(Eigen::Index n, std::uint64_t seed,
                                               Weighting weighting,
                                               const std::filesystem::path& outdir) {
  const WeibullModel model;
  const Dataset data = simulate_weibull(n, seed);
  const Vector theta = weibull_theta_vector();
  const Matrix g = numerical_jacobian(model, data, theta, JacobianScheme::smooth);
  const Matrix s = moment_covariance(model, data, theta);
  const Matrix w = make_weighting(weighting, s);
  ExperimentResult out{make_ingredients(g, s, w), {}, {}};
  out.report = full_report(out.ingredients, model.param_labels(), model.moment_labels());
  const std::string stem = "weibull_" + to_string(weighting);
  detail::write_ingredient_files(outdir, stem, out.ingredients, out.report,
                                 "Weibull model, " + to_string(weighting) + " weighting",
                                 out.files);
  const WeibullSummary sum = weibull_duration_summary(data);
  const auto dpath = outdir / (stem + "_durations.csv");
  atomic_write(dpath, "stat,value\nmedian," + fmt_full(sum.median) + "\nP(T<1)," +
                          fmt_full(sum.below_1) + "\nP(T>2)," + fmt_full(sum.above_2) +
                          "\n");
  out.files.push_back(dpath);
  detail::write_manifest(outdir, stem,
                         {{"experiment", "weibull"},
                          {"n", n},
                          {"seed", seed},
                          {"weighting", to_string(weighting)}},
                         out.files);
  return out;
}

// Households + synthetic plans at theta_star. Mirrors user-supplied data when
// `data` is given (plans are simulated at theta_star when absent there).
inline Dataset retirement_dataset(const RetirementConfig& cfg,
                                  const std::optional<Dataset>& data) {
  Dataset households =
      data ? *data : synthetic_population(cfg.n, cfg.seed, cfg.interview_year);
  if (!households.has("spa_w")) {
    const Vector& cw = households.col("cohort_w");
    Vector spa(households.rows());
    for (Eigen::Index i = 0; i < households.rows(); ++i)
      spa(i) = spa_from_cohort(cw(i));
    households.add_column("spa_w", std::move(spa));
  }
  if (!households.has("plan_h")) {
    auto [rh, rw] = simulate_plans(households, cfg.theta_star, cfg.rho, cfg.t_max,
                                   cfg.seed);
    households.add_column("plan_h", std::move(rh));
    households.add_column("plan_w", std::move(rw));
  }
  return households;
}

inline RetirementModel make_retirement_model(const Dataset& households,
                                             const RetirementConfig& cfg) {
  RetirementModel::Options opt;
  opt.s_sim = cfg.s_sim;
  opt.sim_seed = cfg.seed ^ 0x5157A7E5ULL;  // estimation draws, distinct stream
  opt.rho = cfg.rho;
  opt.t_max = cfg.t_max;
  return RetirementModel(households, opt);
}

struct RetireSimulateResult {
  std::vector<std::filesystem::path> files;
};

inline RetireSimulateResult run_retire_simulate(const RetirementConfig& cfg,
                                                const std::optional<Dataset>& data,
                                                const std::filesystem::path& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const Dataset households = retirement_dataset(cfg, data);
  RetireSimulateResult out;
  const auto hpath = outdir / "retire_households.csv";
  write_dataset_csv(hpath, households);
  out.files.push_back(hpath);

  // Figure-style histogram CSVs: planned ages by member, calendar differences.
  const Vector& rh = households.col("plan_h");
  const Vector& rw = households.col("plan_w");
  const Vector& ch = households.col("cohort_h");
  const Vector& cw = households.col("cohort_w");
  std::string ages = "age,count_h,count_w\n";
  for (int a = kRetireGridLo; a <= kRetireGridHi; ++a) {
    Eigen::Index nh = 0, nw = 0;
    for (Eigen::Index i = 0; i < rh.size(); ++i) {
      nh += static_cast<int>(rh(i)) == a;
      nw += static_cast<int>(rw(i)) == a;
    }
    ages += std::to_string(a) + "," + std::to_string(nh) + "," + std::to_string(nw) + "\n";
  }
  const auto apath = outdir / "retire_hist_ages.csv";
  atomic_write(apath, ages);
  out.files.push_back(apath);

  std::map<int, int> diffs;
  for (Eigen::Index i = 0; i < rh.size(); ++i) {
    ++diffs[static_cast<int>((ch(i) + rh(i)) - (cw(i) + rw(i)))];
  }
  std::string dcsv = "calendar_diff,count\n";
  for (const auto& [d, c] : diffs) dcsv += std::to_string(d) + "," + std::to_string(c) + "\n";
  const auto dpath = outdir / "retire_hist_diff.csv";
  atomic_write(dpath, dcsv);
  out.files.push_back(dpath);

  nlohmann::json j{{"experiment", "retire-simulate"},
                   {"config", dump_retirement_config(cfg)}};
  detail::write_manifest(outdir, "retire_simulate", j, out.files);
  return out;
}

struct RetireSensitivityResult {
  GmmIngredients ingredients;
  SensitivityReport report;
  Vector g_at_theta;
  std::vector<std::filesystem::path> files;
};

// G (simulated scheme), S and the bootstrap-diagonal W at theta_star, the full
// report, and the one-parameter gamma tables.
inline RetireSensitivityResult run_retire_sensitivity(
    const RetirementConfig& cfg, const std::optional<Dataset>& data,
    const std::filesystem::path& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const Dataset households = retirement_dataset(cfg, data);
  const RetirementModel model = make_retirement_model(households, cfg);
  const Vector theta = cfg.theta_star.pack();

  const Matrix g = numerical_jacobian(model, households, theta, JacobianScheme::simulated);
  const Matrix s = moment_covariance(model, households, theta);
  const Vector bv = bootstrap_moment_variance(model, households, theta, cfg.bootstrap_b,
                                              cfg.seed ^ 0xB007ULL);
  Matrix w = Matrix::Zero(kRetireMoments, kRetireMoments);
  for (int k = 0; k < kRetireMoments; ++k) w(k, k) = 1.0 / bv(k);

  RetireSensitivityResult out{make_ingredients(g, s, w), {}, {}, {}};
  out.report = full_report(out.ingredients, model.param_labels(), model.moment_labels());
  out.g_at_theta = moment_mean(model, households, theta);

  detail::write_ingredient_files(outdir, "retire", out.ingredients, out.report,
                                 "Retirement model sensitivity", out.files);
  const auto gpath = outdir / "retire_moments.csv";
  std::string gcsv = "moment_index,moment,value\n";
  const auto labels = model.moment_labels();
  for (Eigen::Index k = 0; k < out.g_at_theta.size(); ++k) {
    gcsv += std::to_string(k + 1) + "," + csv_field(labels[k]) + "," +
            fmt_full(out.g_at_theta(k)) + "\n";
  }
  atomic_write(gpath, gcsv);
  out.files.push_back(gpath);

  const auto rowcsv = outdir / "retire_gamma_sensitivity.csv";
  atomic_write(rowcsv, parameter_row_csv(out.report, 0));
  out.files.push_back(rowcsv);
  const auto rowmd = outdir / "retire_gamma_sensitivity.md";
  atomic_write(rowmd, parameter_row_markdown(out.report, 0, "Sensitivity of gamma"));
  out.files.push_back(rowmd);

  nlohmann::json j{{"experiment", "retire-sensitivity"},
                   {"config", dump_retirement_config(cfg)}};
  detail::write_manifest(outdir, "retire_sensitivity", j, out.files);
  return out;
}

struct RetireEstimateResult {
  EstimateResult estimate;
  std::vector<std::filesystem::path> files;
};

// Full indirect-inference estimation: bootstrap-diagonal W, Nelder-Mead from
// theta_start (default theta_star) with `budget` jittered restarts.
inline RetireEstimateResult run_retire_estimate(const RetirementConfig& cfg,
                                                const std::optional<Dataset>& data,
                                                const std::filesystem::path& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const Dataset households = retirement_dataset(cfg, data);
  const RetirementModel model = make_retirement_model(households, cfg);
  const Vector theta0 = cfg.theta_star.pack();

  const Vector bv = bootstrap_moment_variance(model, households, theta0, cfg.bootstrap_b,
                                              cfg.seed ^ 0xB007ULL);
  Matrix w = Matrix::Zero(kRetireMoments, kRetireMoments);
  for (int k = 0; k < kRetireMoments; ++k) w(k, k) = 1.0 / bv(k);

  EstimateOptions opt;
  opt.scheme = JacobianScheme::simulated;
  opt.nm.max_iter = cfg.nm_max_iter;
  RetireEstimateResult out{gmm_estimate(model, households, w, theta0, cfg.budget, opt), {}};

  const Matrix sigma = asymptotic_covariance(out.estimate.ingredients).sigma;
  const auto labels = model.param_labels();
  std::string pcsv = "parameter,estimate,se\n";
  for (Eigen::Index i = 0; i < kRetireParams; ++i) {
    const double se = std::sqrt(sigma(i, i) / static_cast<double>(households.rows()));
    pcsv += labels[i] + "," + fmt_full(out.estimate.theta_hat(i)) + "," + fmt_full(se) + "\n";
  }
  const auto ppath = outdir / "retire_estimates.csv";
  atomic_write(ppath, pcsv);
  out.files.push_back(ppath);

  nlohmann::json j{{"experiment", "retire-estimate"},
                   {"config", dump_retirement_config(cfg)},
                   {"criterion", out.estimate.criterion_value},
                   {"n_evals", out.estimate.n_evals}};
  detail::write_manifest(outdir, "retire_estimate", j, out.files);
  return out;
}

// Report computed directly from user-supplied (G, S, W) CSVs.
inline ExperimentResult run_sensitivity_from_matrices(
    const std::filesystem::path& gpath, const std::filesystem::path& spath,
    const std::filesystem::path& wpath, const std::filesystem::path& outdir) {
  const Matrix g = read_matrix_csv(gpath);
  const Matrix s = read_matrix_csv(spath);
  const Matrix w = read_matrix_csv(wpath);
  std::vector<std::string> plabels, mlabels;
  for (Eigen::Index i = 0; i < g.cols(); ++i) plabels.push_back("theta" + std::to_string(i + 1));
  for (Eigen::Index k = 0; k < g.rows(); ++k) mlabels.push_back("m" + std::to_string(k + 1));
  ExperimentResult out{make_ingredients(g, s, w), {}, {}};
  out.report = full_report(out.ingredients, plabels, mlabels);
  detail::write_ingredient_files(outdir, "custom", out.ingredients, out.report,
                                 "Sensitivity report", out.files);
  detail::write_manifest(outdir, "custom",
                         {{"experiment", "sensitivity-from-matrices"},
                          {"G", gpath.string()},
                          {"S", spath.string()},
                          {"W", wpath.string()}},
                         out.files);
  return out;
}

// Re-executes the experiment recorded in a manifest; outputs land back in the
// manifest's directory, so a rerun must reproduce every file byte for byte.
inline std::vector<std::filesystem::path> rerun_from_manifest(
    const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest: " + manifest_path.string());
  nlohmann::json j;
  in >> j;
  const std::filesystem::path outdir = manifest_path.parent_path();
  const std::string exp = j.at("experiment").get<std::string>();
  if (exp == "probit") {
    return run_probit_experiment(j.at("n").get<Eigen::Index>(),
                                 j.at("seed").get<std::uint64_t>(),
                                 weighting_from_string(j.at("weighting")), outdir)
        .files;
  }
  if (exp == "weibull") {
    return run_weibull_experiment(j.at("n").get<Eigen::Index>(),
                                  j.at("seed").get<std::uint64_t>(),
                                  weighting_from_string(j.at("weighting")), outdir)
        .files;
  }
  const RetirementConfig cfg = parse_retirement_config(j.at("config").get<std::string>());
  if (exp == "retire-simulate") return run_retire_simulate(cfg, std::nullopt, outdir).files;
  if (exp == "retire-sensitivity")
    return run_retire_sensitivity(cfg, std::nullopt, outdir).files;
  if (exp == "retire-estimate") return run_retire_estimate(cfg, std::nullopt, outdir).files;
  throw ConfigError("manifest experiment '" + exp + "' is not rerunnable");
}

}  // namespace momsens
