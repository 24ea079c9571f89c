#pragma once

#include <string>
#include <utility>

#include "momsens/linalg.hpp"

namespace momsens {

// The triple (G, S, W) entering the GMM asymptotics:
//   G: J x P expected Jacobian of the moment vector at the true parameter,
//   S: J x J covariance of the per-observation moment contributions,
//   W: J x J weighting matrix.
struct GmmIngredients {
  Matrix G;
  Matrix S;
  Matrix W;
  Eigen::Index moments() const { return G.rows(); }
  Eigen::Index params() const { return G.cols(); }
};

struct CovarianceResult {
  Matrix sigma;             // P x P asymptotic covariance
  double condition_number;  // condition of the bread matrix
};

// Validates dimensions, symmetry (inputs are symmetrized when the asymmetry is
// roundoff-sized, rejected otherwise), definiteness and the rank of G.
inline GmmIngredients make_ingredients(Matrix g, Matrix s, Matrix w) {
  const Eigen::Index j = g.rows(), p = g.cols();
  if (j < 1 || p < 1 || j < p) {
    throw InvalidIngredients("make_ingredients: need J >= P >= 1, got J=" +
                             std::to_string(j) + " P=" + std::to_string(p));
  }
  if (s.rows() != j || s.cols() != j || w.rows() != j || w.cols() != j) {
    throw InvalidIngredients("make_ingredients: S and W must be J x J");
  }
  if (!g.allFinite() || !s.allFinite() || !w.allFinite()) {
    throw InvalidIngredients("make_ingredients: non-finite entries");
  }
  if (relative_asymmetry(s) > kSymTol) {
    throw InvalidIngredients("make_ingredients: S asymmetry exceeds tolerance");
  }
  if (relative_asymmetry(w) > kSymTol) {
    throw InvalidIngredients("make_ingredients: W asymmetry exceeds tolerance");
  }
  s = symmetrized(s);
  w = symmetrized(w);
  if (!SymmetricSolver(w).positive_definite()) {
    throw InvalidIngredients("make_ingredients: W is not positive definite");
  }
  if (!SymmetricSolver(s).positive_semidefinite()) {
    throw InvalidIngredients("make_ingredients: S is not positive semidefinite");
  }
  if (!full_column_rank(g)) {
    throw InvalidIngredients("make_ingredients: G is rank deficient");
  }
  return GmmIngredients{std::move(g), std::move(s), std::move(w)};
}

// Sigma = (G'WG)^-1 G'WSWG (G'WG)^-1.
inline CovarianceResult asymptotic_covariance(const GmmIngredients& ing) {
  const Matrix bread = symmetrized(ing.G.transpose() * ing.W * ing.G);
  SymmetricSolver sb(bread);
  const double cond = sb.condition();
  if (!(cond <= kConditionLimit)) {
    throw SingularBread("asymptotic_covariance: cond(G'WG) exceeds 1e12");
  }
  const Matrix bi = sb.inverse();
  const Matrix meat = ing.G.transpose() * ing.W * ing.S * ing.W * ing.G;
  return CovarianceResult{symmetrized(bi * meat * bi), cond};
}

// Sigma_opt = (G'S^-1 G)^-1; equals the sandwich at W = S^-1.
inline CovarianceResult optimal_covariance(const Matrix& g, const Matrix& s) {
  SymmetricSolver ss(s);
  if (!ss.positive_definite() || !(ss.condition() <= kConditionLimit)) {
    throw SingularS("optimal_covariance: S is numerically singular");
  }
  const Matrix bread = symmetrized(g.transpose() * ss.solve(g));
  SymmetricSolver sb(bread);
  const double cond = sb.condition();
  if (!(cond <= kConditionLimit)) {
    throw SingularBread("optimal_covariance: cond(G'S^-1G) exceeds 1e12");
  }
  return CovarianceResult{symmetrized(sb.inverse()), cond};
}

}  // namespace momsens
