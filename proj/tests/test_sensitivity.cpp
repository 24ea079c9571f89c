#include <catch2/catch_amalgamated.hpp>

#include "momsens/sensitivity.hpp"
#include "oracles.hpp"

using namespace momsens;
using Catch::Approx;

namespace {

Matrix two_moment_g() {
  Matrix g(2, 1);
  g << -1.0, -1.0;
  return g;
}

std::vector<std::string> labels(const std::string& stem, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

}  // namespace

TEST_CASE("identity cases for M1, M2, M3") {
  const Matrix i3 = Matrix::Identity(3, 3);
  REQUIRE(approx_equal(m1(i3, i3), -i3, 1e-14));
  Matrix o22 = Matrix::Zero(3, 3);
  o22(1, 1) = 1.0;
  REQUIRE(approx_equal(m2(i3, i3, 1), o22, 1e-14));
  Matrix o11 = Matrix::Zero(3, 3);
  o11(0, 0) = 1.0;
  REQUIRE(approx_equal(m3(i3, i3, 0), o11, 1e-14));
}

TEST_CASE("two-moment mean model: hand-computed measures, exact") {
  const Matrix g = two_moment_g();
  const Matrix i2 = Matrix::Identity(2, 2);
  const auto ing = make_ingredients(g, i2, i2);

  const Matrix m1v = m1(g, i2);
  REQUIRE(m1v(0, 0) == Approx(0.5).margin(1e-12));
  REQUIRE(m1v(0, 1) == Approx(0.5).margin(1e-12));

  REQUIRE(m2(g, i2, 0)(0, 0) == Approx(0.25).margin(1e-12));
  REQUIRE(m3(g, i2, 0)(0, 0) == Approx(0.25).margin(1e-12));

  const auto d4 = m4(g, i2, i2, 1);
  REQUIRE(d4.identified);
  REQUIRE(d4.value(0, 0) == Approx(0.5).margin(1e-12));
  const auto d5 = m5(g, i2, 0);
  REQUIRE(d5.identified);
  REQUIRE(d5.value(0, 0) == Approx(0.5).margin(1e-12));

  const auto rep = full_report(ing, {"theta"}, labels("m", 2));
  REQUIRE(rep.e1(0, 0) == Approx(0.5).margin(1e-12));  // M1 * sqrt(S_kk)
  REQUIRE(rep.e2(0, 0) == Approx(0.5).margin(1e-12));
  REQUIRE(rep.e2(0, 1) == Approx(0.5).margin(1e-12));
  REQUIRE(rep.e4(0, 0) == Approx(1.0).margin(1e-12));
  REQUIRE(rep.e4(0, 1) == Approx(1.0).margin(1e-12));
  REQUIRE(rep.e5(0, 0) == Approx(1.0).margin(1e-12));
  REQUIRE(rep.e5(0, 1) == Approx(1.0).margin(1e-12));
  REQUIRE(std::abs(rep.e6(0, 0)) < 1e-12);
  REQUIRE(std::abs(rep.e6(0, 1)) < 1e-12);
  REQUIRE(rep.dropped_identified[0]);
  REQUIRE(rep.dropped_identified[1]);
}

TEST_CASE("M2, M3, M6 match central finite differences") {
  std::mt19937 rng(777);
  for (int rep = 0; rep < 60; ++rep) {
    const int j = 4 + static_cast<int>(rng() % 4);
    const int p = 2 + static_cast<int>(rng() % 2);
    const auto inst = oracles::random_instance(rng, j, p);
    const int k = static_cast<int>(rng() % j);
    REQUIRE(oracles::max_rel_error(m2(inst.G, inst.S, k),
                                   oracles::fd_opt_wrt_skk(inst.G, inst.S, k)) < 1e-5);
    REQUIRE(oracles::max_rel_error(
                m3(inst.G, inst.W, k),
                oracles::fd_sigma_wrt_skk(inst.G, inst.S, inst.W, k)) < 1e-5);
    REQUIRE(oracles::max_rel_error(
                m6(inst.G, inst.W, inst.S, k),
                oracles::fd_sigma_wrt_wkk(inst.G, inst.S, inst.W, k)) < 1e-5);
  }
}

TEST_CASE("Sigma = M1 S M1' on random reports") {
  std::mt19937 rng(888);
  for (int rep = 0; rep < 40; ++rep) {
    const auto inst = oracles::random_instance(rng, 6, 3);
    const auto ing = make_ingredients(inst.G, inst.S, inst.W);
    const Matrix sigma = asymptotic_covariance(ing).sigma;
    const Matrix m = m1(ing.G, ing.W);
    REQUIRE(approx_equal(sigma, m * ing.S * m.transpose(), 1e-9));
  }
}

TEST_CASE("optimal weighting: E2 == E3 and E6 == 0") {
  std::mt19937 rng(999);
  for (int rep = 0; rep < 30; ++rep) {
    const auto inst = oracles::random_instance(rng, 6, 3);
    const Matrix w = SymmetricSolver(inst.S).inverse();
    const auto report = full_report(make_ingredients(inst.G, inst.S, w),
                                    labels("t", 3), labels("m", 6));
    REQUIRE((report.e2 - report.e3).cwiseAbs().maxCoeff() < 1e-8);
    REQUIRE(report.e6.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("M2, M3, M5 are PSD") {
  std::mt19937 rng(1111);
  for (int rep = 0; rep < 25; ++rep) {
    const auto inst = oracles::random_instance(rng, 5, 2);
    for (int k = 0; k < 5; ++k) {
      for (const Matrix& m : {m2(inst.G, inst.S, k), m3(inst.G, inst.W, k),
                              m5(inst.G, inst.S, k).value}) {
        SymmetricSolver solver(m);
        REQUIRE(solver.lambda_min() >= -1e-12 * std::max(1.0, solver.lambda_max()));
        for (Eigen::Index d = 0; d < m.rows(); ++d) REQUIRE(m(d, d) >= -1e-12);
      }
    }
  }
}

TEST_CASE("scaled measures are invariant to moment rescaling") {
  std::mt19937 rng(2222);
  const double c = 7.5;
  for (int rep = 0; rep < 15; ++rep) {
    const auto inst = oracles::random_instance(rng, 5, 2);
    const auto base = full_report(make_ingredients(inst.G, inst.S, inst.W),
                                  labels("t", 2), labels("m", 5));
    for (int k = 0; k < 5; ++k) {
      Matrix g = inst.G, s = inst.S, w = inst.W;
      g.row(k) *= c;
      s.row(k) *= c;
      s.col(k) *= c;
      w.row(k) /= c;
      w.col(k) /= c;
      const auto scaled = full_report(make_ingredients(g, s, w), labels("t", 2),
                                      labels("m", 5));
      REQUIRE(approx_equal(scaled.e1, base.e1, 1e-8));
      REQUIRE(approx_equal(scaled.e2, base.e2, 1e-8));
      REQUIRE(approx_equal(scaled.e3, base.e3, 1e-8));
      REQUIRE(approx_equal(scaled.e4, base.e4, 1e-8));
      REQUIRE(approx_equal(scaled.e5, base.e5, 1e-8));
      REQUIRE(approx_equal(scaled.e6, base.e6, 1e-8));
    }
  }
}

TEST_CASE("drop to just-identified: m4 at optimal W equals m5") {
  std::mt19937 rng(3333);
  for (int rep = 0; rep < 20; ++rep) {
    const auto inst = oracles::random_instance(rng, 3, 2);  // J - 1 == P
    const Matrix w = SymmetricSolver(inst.S).inverse();
    for (int k = 0; k < 3; ++k) {
      const auto d4 = m4(inst.G, w, inst.S, k);
      const auto d5 = m5(inst.G, inst.S, k);
      REQUIRE(d4.identified == d5.identified);
      if (d4.identified) REQUIRE(approx_equal(d4.value, d5.value, 1e-8));
    }
  }
}

TEST_CASE("exact rank loss after a drop is flagged, not thrown") {
  // Only moment 1 informs parameter 1: dropping it kills identification.
  Matrix g(3, 2);
  g << 1.0, 0.0, 0.0, 1.0, 0.0, 1.0;
  const Matrix i3 = Matrix::Identity(3, 3);
  const auto d4 = m4(g, i3, i3, 0);
  REQUIRE_FALSE(d4.identified);
  REQUIRE(std::isinf(d4.value(0, 0)));
  const auto d5 = m5(g, i3, 0);
  REQUIRE_FALSE(d5.identified);

  const auto rep = full_report(make_ingredients(g, i3, i3), labels("t", 2), labels("m", 3));
  REQUIRE_FALSE(rep.dropped_identified[0]);
  REQUIRE(rep.dropped_identified[1]);
  REQUIRE(rep.dropped_identified[2]);
}

TEST_CASE("huge but finite variance blow-up is flagged via the >100 rule") {
  // Second column of G nearly (not exactly) dependent once moment 1 is gone.
  Matrix g(3, 2);
  g << 1.0, 0.0, 0.0, 1.0, 1e-4, 1.0;
  const Matrix i3 = Matrix::Identity(3, 3);
  const auto d4 = m4(g, i3, i3, 0);
  REQUIRE_FALSE(d4.identified);
  REQUIRE(std::isfinite(d4.value(0, 0)));
  REQUIRE(d4.value(0, 0) > 100.0);
}

TEST_CASE("moment-dropping measures require over-identification") {
  const Matrix i2 = Matrix::Identity(2, 2);
  REQUIRE_THROWS_AS(m4(i2, i2, i2, 0), NotOveridentified);
  REQUIRE_THROWS_AS(m5(i2, i2, 0), NotOveridentified);
  // full_report flags the columns instead of aborting
  const auto rep = full_report(make_ingredients(i2, i2, i2), labels("t", 2), labels("m", 2));
  REQUIRE_FALSE(rep.dropped_identified[0]);
  REQUIRE(std::isinf(rep.e4(0, 0)));
  REQUIRE((rep.e2 - rep.e3).cwiseAbs().maxCoeff() < 1e-12);  // just-identified: E2 == E3
  REQUIRE(rep.e6.cwiseAbs().maxCoeff() < 1e-12);             // ... and E6 == 0
}
