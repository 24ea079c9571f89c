#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <random>

#include "momsens/config.hpp"
#include "momsens/csv.hpp"
#include "momsens/golden.hpp"
#include "momsens/report_io.hpp"
#include "oracles.hpp"

using namespace momsens;
using Catch::Approx;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "momsens_test_reporting";
  std::filesystem::create_directories(dir);
  return dir;
}

SensitivityReport micro_report() {
  Matrix g(2, 1);
  g << -1.0, -1.0;
  const Matrix i2 = Matrix::Identity(2, 2);
  return full_report(make_ingredients(g, i2, i2), {"theta"}, {"m1", "m2"});
}

}  // namespace

TEST_CASE("matrix CSV round-trips bit for bit") {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  Matrix m(7, 4);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = std::exp(20.0 * nd(rng)) * nd(rng);
  m(0, 0) = 0.1 + 0.2;  // not exactly representable sums survive the trip
  m(1, 1) = -0.0;
  const auto path = temp_dir() / "roundtrip.csv";
  write_matrix_csv(path, m);
  const Matrix back = read_matrix_csv(path);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 4; ++c)
      REQUIRE(std::memcmp(&back(r, c), &m(r, c), sizeof(double)) == 0);
}

TEST_CASE("dataset CSV round-trips") {
  Dataset d;
  d.add_column("a", Vector::LinSpaced(5, -2.0, 2.0));
  d.add_column("b", Vector::Constant(5, 1.0 / 3.0));
  const auto path = temp_dir() / "dataset.csv";
  write_dataset_csv(path, d);
  const Dataset back = read_dataset_csv(path);
  REQUIRE(back.names() == d.names());
  REQUIRE(back.col("a") == d.col("a"));
  REQUIRE(back.col("b") == d.col("b"));
}

TEST_CASE("long-format report carries flags only on E4/E5 of broken columns") {
  Matrix g(3, 2);
  g << 1.0, 0.0, 0.0, 1.0, 0.0, 1.0;  // dropping moment 1 kills identification
  const Matrix i3 = Matrix::Identity(3, 3);
  const auto rep = full_report(make_ingredients(g, i3, i3), {"t1", "t2"},
                               {"m1", "m2", "m3"});
  const auto table = parse_long_table(report_to_long_csv(rep));
  REQUIRE(table.at({"t1", "m1", "E4"}).flagged);
  REQUIRE(table.at({"t1", "m1", "E5"}).flagged);
  REQUIRE_FALSE(table.at({"t1", "m1", "M1"}).flagged);
  REQUIRE_FALSE(table.at({"t1", "m2", "E4"}).flagged);
  REQUIRE(std::isinf(table.at({"t1", "m1", "E4"}).value));
  REQUIRE(table.size() == 7u * 2u * 3u);
}

TEST_CASE("golden check: identical tables pass with zero deviation") {
  const auto rep = micro_report();
  const auto t = parse_long_table(report_to_long_csv(rep));
  const auto res = golden_check(t, t);
  REQUIRE(res.pass);
  REQUIRE(res.max_abs_deviation == 0.0);
  REQUIRE(res.cells_compared == 7 * 2);
}

TEST_CASE("golden check: a flipped flag fails naming the cell") {
  const auto rep = micro_report();
  auto produced = parse_long_table(report_to_long_csv(rep));
  auto golden = produced;
  golden[{"theta", "m2", "E4"}].flagged = true;
  const auto res = golden_check(produced, golden);
  REQUIRE_FALSE(res.pass);
  REQUIRE(res.detail.find("E4(theta, m2)") != std::string::npos);
}

TEST_CASE("golden check: tolerance policy switches at the small-value cutoff") {
  LongTable golden, produced;
  golden[{"t", "m", "E2"}] = {1.0, false};
  produced[{"t", "m", "E2"}] = {1.04, false};  // 4% off a large value: ok at rel 5%
  golden[{"t", "m", "E3"}] = {0.01, false};
  produced[{"t", "m", "E3"}] = {0.025, false};  // |diff| < 0.02 absolute: ok
  REQUIRE(golden_check(produced, golden).pass);
  produced[{"t", "m", "E2"}] = {1.06, false};
  REQUIRE_FALSE(golden_check(produced, golden).pass);
  produced[{"t", "m", "E2"}] = {1.04, false};
  produced[{"t", "m", "E3"}] = {0.035, false};
  REQUIRE_FALSE(golden_check(produced, golden).pass);
}

TEST_CASE("golden check: flagged cells compare flags, never magnitudes") {
  LongTable golden, produced;
  golden[{"t", "m1", "E4"}] = {std::numeric_limits<double>::infinity(), true};
  produced[{"t", "m1", "E4"}] = {3.7e5, true};
  golden[{"t", "m2", "E4"}] = {0.324, true};
  produced[{"t", "m2", "E4"}] = {52.0, true};  // garbage under a flag: ignored
  REQUIRE(golden_check(produced, golden).pass);
  produced[{"t", "m2", "E4"}] = {52.0, false};  // a missing flag is an error
  REQUIRE_FALSE(golden_check(produced, golden).pass);
}

TEST_CASE("golden check: shape mismatches throw") {
  LongTable golden, produced;
  golden[{"t", "m1", "E2"}] = {1.0, false};
  REQUIRE_THROWS_AS(golden_check(produced, golden), ShapeMismatch);
  produced[{"t", "m2", "E2"}] = {1.0, false};
  REQUIRE_THROWS_AS(golden_check(produced, golden), ShapeMismatch);
}

TEST_CASE("markdown rendering keeps signed zeros and stars") {
  Matrix g(3, 2);
  g << 1.0, 0.0, 0.0, 1.0, 1e-4, 1.0;
  const Matrix i3 = Matrix::Identity(3, 3);
  auto rep = full_report(make_ingredients(g, i3, i3), {"t1", "t2"}, {"m1", "m2", "m3"});
  rep.e6(0, 1) = -1e-9;  // prints as -0.000
  const std::string md = report_to_markdown(rep, "Micro");
  REQUIRE(md.find("-0.000") != std::string::npos);
  REQUIRE(md.find(">100*") != std::string::npos);
  REQUIRE(md.find("not identified") != std::string::npos);
}

TEST_CASE("config parsing: defaults, overrides and errors") {
  const auto cfg = parse_retirement_config("n = 500\nseed = 9\ngamma = 0.05\n");
  REQUIRE(cfg.n == 500);
  REQUIRE(cfg.seed == 9);
  REQUIRE(cfg.theta_star.gamma == Approx(0.05));
  REQUIRE(cfg.rho == Approx(0.96));
  REQUIRE(cfg.t_max == 80);

  REQUIRE_THROWS_AS(parse_retirement_config("seed = 9\n"), ConfigError);       // missing n
  REQUIRE_THROWS_AS(parse_retirement_config("n = 5\nbogus = 1\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_retirement_config("n = 5\nrho\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_retirement_config("n = 5\nbeta_h = 1,2\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_retirement_config("n = 5\nsigma_hw = 2.0\n"), ConfigError);

  // dump/parse round trip
  const auto again = parse_retirement_config(dump_retirement_config(cfg));
  REQUIRE(again.theta_star.gamma == cfg.theta_star.gamma);
  REQUIRE(again.n == cfg.n);
  REQUIRE(again.theta_star.beta_h == cfg.theta_star.beta_h);
}

TEST_CASE("labels with embedded commas survive the long-format round trip") {
  Matrix g(3, 1);
  g << -1.0, -1.0, -1.0;
  const Matrix i3 = Matrix::Identity(3, 3);
  const auto rep = full_report(make_ingredients(g, i3, i3), {"gamma"},
                               {"cov(e_h,e_w)", "diff[-2,-1]", "plain"});
  const auto table = parse_long_table(report_to_long_csv(rep));
  REQUIRE(table.count({"gamma", "cov(e_h,e_w)", "M1"}) == 1);
  REQUIRE(table.count({"gamma", "diff[-2,-1]", "E4"}) == 1);
  REQUIRE(table.size() == 7u * 3u);
}

TEST_CASE("full-precision formatting round-trips doubles") {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 6.02e23, 0.6584280811}) {
    REQUIRE(std::stod(fmt_full(v)) == v);
  }
  REQUIRE(fmt_fixed3(-1e-9) == "-0.000");
  REQUIRE(fmt_fixed3(0.5) == "0.500");
}
