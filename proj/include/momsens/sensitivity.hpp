#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "momsens/gmm.hpp"

namespace momsens {

// Relative variance increase above which a dropped-moment column is treated as
// "not identified after the drop". Matches the >100 print convention; exact
// rank loss is additionally caught by the condition ceiling.
inline constexpr double kDropBlowupLimit = 100.0;

// M1 = -(G'WG)^-1 G'W, the misspecification-bias mapping. P x J.
inline Matrix m1(const Matrix& g, const Matrix& w) {
  const Matrix bread = symmetrized(g.transpose() * w * g);
  SymmetricSolver sb(bread);
  if (!(sb.condition() <= kConditionLimit)) {
    throw SingularBread("m1: cond(G'WG) exceeds 1e12");
  }
  return -sb.solve(g.transpose() * w);
}

// M2_k = Sigma_opt (G'S^-1 O_kk S^-1 G) Sigma_opt: derivative of the optimal
// covariance in the k-th moment's own variance (weighting kept optimal).
// k is 0-based here and throughout.
inline Matrix m2(const Matrix& g, const Matrix& s, Eigen::Index k) {
  SymmetricSolver ss(s);
  if (!ss.positive_definite() || !(ss.condition() <= kConditionLimit)) {
    throw SingularS("m2: S is numerically singular");
  }
  const Matrix sinv_g = ss.solve(g);                       // J x P
  SymmetricSolver sb(symmetrized(g.transpose() * sinv_g));  // optimal bread
  if (!(sb.condition() <= kConditionLimit)) {
    throw SingularBread("m2: cond(G'S^-1G) exceeds 1e12");
  }
  const Vector a = sinv_g.row(k).transpose();  // G'S^-1 e_k
  const Vector v = sb.solve(a);                // Sigma_opt a
  return v * v.transpose();
}

// M3_k = M1 O_kk M1': same derivative with the weighting matrix held fixed.
inline Matrix m3(const Matrix& g, const Matrix& w, Eigen::Index k) {
  const Matrix m = m1(g, w);
  const Vector col = m.col(k);
  return col * col.transpose();
}

// Result of a moment-dropping measure. `identified` is false when the model is
// (numerically) no longer point-identified once moment k is removed; `value`
// still carries the computed matrix whenever the algebra went through, with
// +inf entries when it did not.
struct DropMeasure {
  Matrix value;
  bool identified = true;
  double bread_condition = 0.0;
};

namespace detail {

inline Matrix infinity_matrix(Eigen::Index p) {
  return Matrix::Constant(p, p, std::numeric_limits<double>::infinity());
}

// Relative variance increase max_j value_jj / base_jj.
inline double max_relative_increase(const Matrix& diff, const Matrix& base) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < diff.rows(); ++j) {
    const double denom = base(j, j);
    if (denom > 0.0) worst = std::max(worst, diff(j, j) / denom);
  }
  return worst;
}

}  // namespace detail

// M4_k = Sigma~_k - Sigma where Sigma~_k reuses W with the k-th row and column
// zeroed out (the weight on the remaining moments is left unchanged).
inline DropMeasure m4(const Matrix& g, const Matrix& w, const Matrix& s, Eigen::Index k) {
  const Eigen::Index j = g.rows(), p = g.cols();
  if (j <= p) throw NotOveridentified("m4: requires J > P");
  const Matrix sigma = asymptotic_covariance(GmmIngredients{g, s, w}).sigma;

  Matrix wt = w;
  wt.row(k).setZero();
  wt.col(k).setZero();
  const Matrix bread = symmetrized(g.transpose() * wt * g);
  SymmetricSolver sb(bread);
  DropMeasure out;
  out.bread_condition = sb.condition();
  if (!sb.positive_definite() || !(out.bread_condition <= kConditionLimit)) {
    out.value = detail::infinity_matrix(p);
    out.identified = false;
    return out;
  }
  const Matrix bi = sb.inverse();
  const Matrix sig_drop = symmetrized(bi * (g.transpose() * wt * s * wt * g) * bi);
  out.value = sig_drop - sigma;
  out.identified = detail::max_relative_increase(out.value, sigma) <= kDropBlowupLimit;
  return out;
}

// M5_k = (G_-k' S_-k^-1 G_-k)^-1 - (G'S^-1G)^-1: optimal weighting on both
// sides, moment k's row/column physically removed.
inline DropMeasure m5(const Matrix& g, const Matrix& s, Eigen::Index k) {
  const Eigen::Index j = g.rows(), p = g.cols();
  if (j <= p) throw NotOveridentified("m5: requires J > P");
  const Matrix sigma_opt = optimal_covariance(g, s).sigma;

  Matrix gk(j - 1, p);
  Matrix sk(j - 1, j - 1);
  for (Eigen::Index r = 0, rr = 0; r < j; ++r) {
    if (r == k) continue;
    gk.row(rr) = g.row(r);
    for (Eigen::Index c = 0, cc = 0; c < j; ++c) {
      if (c == k) continue;
      sk(rr, cc) = s(r, c);
      ++cc;
    }
    ++rr;
  }
  DropMeasure out;
  SymmetricSolver ssk(sk);
  if (!ssk.positive_definite() || !(ssk.condition() <= kConditionLimit)) {
    out.value = detail::infinity_matrix(p);
    out.identified = false;
    out.bread_condition = std::numeric_limits<double>::infinity();
    return out;
  }
  const Matrix bread = symmetrized(gk.transpose() * ssk.solve(gk));
  SymmetricSolver sb(bread);
  out.bread_condition = sb.condition();
  if (!sb.positive_definite() || !(out.bread_condition <= kConditionLimit)) {
    out.value = detail::infinity_matrix(p);
    out.identified = false;
    return out;
  }
  out.value = symmetrized(sb.inverse()) - sigma_opt;
  out.identified = detail::max_relative_increase(out.value, sigma_opt) <= kDropBlowupLimit;
  return out;
}

// M6_k = dSigma/dW^(kk), the four-term closed form. Zero at W = S^-1 and in
// the just-identified case.
inline Matrix m6(const Matrix& g, const Matrix& w, const Matrix& s, Eigen::Index k) {
  const Matrix bread = symmetrized(g.transpose() * w * g);
  SymmetricSolver sb(bread);
  if (!(sb.condition() <= kConditionLimit)) {
    throw SingularBread("m6: cond(G'WG) exceeds 1e12");
  }
  const Matrix bi = sb.inverse();
  const Matrix sigma = symmetrized(bi * (g.transpose() * w * s * w * g) * bi);
  const Vector gk = g.row(k).transpose();           // P
  const Vector bigk = bi * gk;                      // B^-1 g_k
  const Vector u = bi * (g.transpose() * (w * s.col(k)));  // B^-1 G'WS e_k
  const Matrix t1 = -bigk * (sigma * gk).transpose();
  const Matrix t2 = bigk * u.transpose();
  return t1 + t1.transpose() + t2 + t2.transpose();
}

// Per-(parameter, moment) report of M1 and the scaled measures E1..E6.
// e4/e5 columns of moments whose removal breaks identification keep their
// computed (possibly infinite) values but are flagged via dropped_identified.
struct SensitivityReport {
  Matrix m1;  // P x J
  Matrix e1, e2, e3, e4, e5, e6;
  std::vector<bool> dropped_identified;  // length J
  std::vector<std::string> param_labels;
  std::vector<std::string> moment_labels;
  Eigen::Index params() const { return m1.rows(); }
  Eigen::Index moments() const { return m1.cols(); }
};

inline SensitivityReport full_report(const GmmIngredients& ing,
                                     std::vector<std::string> param_labels,
                                     std::vector<std::string> moment_labels) {
  const Eigen::Index j = ing.moments(), p = ing.params();
  if (param_labels.size() != static_cast<size_t>(p) ||
      moment_labels.size() != static_cast<size_t>(j)) {
    throw ShapeMismatch("full_report: label lengths must match dimensions");
  }
  SensitivityReport rep;
  rep.param_labels = std::move(param_labels);
  rep.moment_labels = std::move(moment_labels);
  rep.m1 = m1(ing.G, ing.W);
  const Matrix sigma = asymptotic_covariance(ing).sigma;
  const Matrix sigma_opt = optimal_covariance(ing.G, ing.S).sigma;
  rep.e1.resize(p, j);
  rep.e2.resize(p, j);
  rep.e3.resize(p, j);
  rep.e4.resize(p, j);
  rep.e5.resize(p, j);
  rep.e6.resize(p, j);
  rep.dropped_identified.assign(j, true);
  const bool overidentified = j > p;
  for (Eigen::Index k = 0; k < j; ++k) {
    const Matrix m2k = m2(ing.G, ing.S, k);
    const Matrix m3k = m3(ing.G, ing.W, k);
    const Matrix m6k = m6(ing.G, ing.W, ing.S, k);
    DropMeasure m4k, m5k;
    if (overidentified) {
      m4k = m4(ing.G, ing.W, ing.S, k);
      m5k = m5(ing.G, ing.S, k);
      rep.dropped_identified[k] = m4k.identified && m5k.identified;
    } else {
      m4k.value = detail::infinity_matrix(p);
      m5k.value = detail::infinity_matrix(p);
      rep.dropped_identified[k] = false;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      rep.e1(i, k) = rep.m1(i, k) * std::sqrt(ing.S(k, k));
      rep.e2(i, k) = m2k(i, i) * ing.S(k, k) / sigma_opt(i, i);
      rep.e3(i, k) = m3k(i, i) * ing.S(k, k) / sigma(i, i);
      rep.e4(i, k) = m4k.value(i, i) / sigma(i, i);
      rep.e5(i, k) = m5k.value(i, i) / sigma_opt(i, i);
      rep.e6(i, k) = m6k(i, i) * ing.W(k, k) / sigma(i, i);
    }
  }
  return rep;
}

}  // namespace momsens
