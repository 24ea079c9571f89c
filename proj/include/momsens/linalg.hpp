#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "momsens/errors.hpp"

namespace momsens {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kRankTol = 1e-10;        // relative singular-value cutoff
inline constexpr double kConditionLimit = 1e12;  // "not identified" ceiling
inline constexpr double kSymTol = 1e-10;         // accepted relative asymmetry

inline double relative_asymmetry(const Matrix& a) {
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Eigendecomposition-backed solver for symmetric matrices. All inverses in the
// package go through this (or the equivalent), never cofactor expansion, so a
// condition number is always available next to the solve.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(const Matrix& a) : es_(symmetrized(a)) {
    const Vector& ev = es_.eigenvalues();
    lambda_min_ = ev.minCoeff();
    lambda_max_ = ev.maxCoeff();
    abs_max_ = ev.cwiseAbs().maxCoeff();
  }

  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  // lambda_max/lambda_min for positive definite input; +inf otherwise.
  double condition() const {
    if (lambda_min_ <= 0.0) {
      return lambda_max_ > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return lambda_max_ / lambda_min_;
  }

  bool positive_definite() const { return lambda_min_ > 0.0; }

  bool positive_semidefinite(double rel_tol = kSymTol) const {
    return lambda_min_ >= -rel_tol * std::max(abs_max_, 1e-300);
  }

  Matrix solve(const Matrix& b) const {
    const Matrix& v = es_.eigenvectors();
    return v * es_.eigenvalues().cwiseInverse().asDiagonal() * (v.transpose() * b);
  }

  Matrix inverse() const {
    const Matrix& v = es_.eigenvectors();
    return v * es_.eigenvalues().cwiseInverse().asDiagonal() * v.transpose();
  }

 private:
  Eigen::SelfAdjointEigenSolver<Matrix> es_;
  double lambda_min_, lambda_max_, abs_max_;
};

// Smallest/largest singular value ratio check for full column rank.
inline bool full_column_rank(const Matrix& g, double rel_tol = kRankTol) {
  Eigen::JacobiSVD<Matrix> svd(g);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0) return false;
  return sv(sv.size() - 1) > rel_tol * sv(0);
}

inline bool approx_equal(const Matrix& a, const Matrix& b, double rel_tol) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  if (scale == 0.0) return true;
  return (a - b).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace momsens
