#pragma once

#include <string>
#include <vector>

#include "momsens/dataset.hpp"
#include "momsens/gmm.hpp"
#include "momsens/nelder_mead.hpp"
#include "momsens/rng.hpp"

namespace momsens {

// A pluggable moment model: per-observation contributions f(x_i, theta) as an
// n x J matrix. Implementations must be deterministic in (data, theta); models
// that simulate internally hold a fixed seed so every evaluation reuses the
// same draws (common random numbers).
class MomentModel {
 public:
  virtual ~MomentModel() = default;
  virtual Matrix eval(const Dataset& data, const Vector& theta) const = 0;
  virtual Eigen::Index moment_count() const = 0;
  virtual Eigen::Index parameter_count() const = 0;
  virtual std::vector<std::string> moment_labels() const = 0;
  virtual std::vector<std::string> param_labels() const = 0;
};

inline Vector moment_mean(const MomentModel& model, const Dataset& data,
                          const Vector& theta) {
  const Matrix f = model.eval(data, theta);
  return f.colwise().mean();
}

// g(theta)' W g(theta) with g the column mean of eval.
inline double gmm_criterion(const MomentModel& model, const Dataset& data,
                            const Vector& theta, const Matrix& w) {
  const Vector g = moment_mean(model, data, theta);
  return g.dot(w * g);
}

enum class JacobianScheme {
  smooth,     // h_j = 1e-5 * max(1, |theta_j|)
  simulated,  // h_j = 5e-2 * max(1, |theta_j|); wide steps bridge step functions
};

inline double jacobian_step(JacobianScheme scheme, double theta_j) {
  const double scale = std::max(1.0, std::abs(theta_j));
  return (scheme == JacobianScheme::smooth ? 1e-5 : 5e-2) * scale;
}

// Central differences of the column-mean moment vector. J x P.
inline Matrix numerical_jacobian(const MomentModel& model, const Dataset& data,
                                 const Vector& theta, JacobianScheme scheme) {
  const Eigen::Index j = model.moment_count(), p = model.parameter_count();
  Matrix g(j, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const double h = jacobian_step(scheme, theta(c));
    Vector tp = theta, tm = theta;
    tp(c) += h;
    tm(c) -= h;
    const Vector up = moment_mean(model, data, tp);
    const Vector dn = moment_mean(model, data, tm);
    if (!up.allFinite() || !dn.allFinite()) {
      throw NonFinite("numerical_jacobian: non-finite moment evaluation");
    }
    g.col(c) = (up - dn) / (2.0 * h);
  }
  return g;
}

// Sample covariance of the rows of eval, divisor n, symmetrized.
inline Matrix moment_covariance(const MomentModel& model, const Dataset& data,
                                const Vector& theta) {
  const Matrix f = model.eval(data, theta);
  const Eigen::Index n = f.rows(), j = f.cols();
  if (n < j + 1) {
    throw InvalidIngredients("moment_covariance: need n >= J + 1");
  }
  if (!f.allFinite()) throw NonFinite("moment_covariance: non-finite contributions");
  for (Eigen::Index k = 0; k < j; ++k) {
    if (f.col(k).maxCoeff() == f.col(k).minCoeff()) {
      throw DegenerateMoment("moment_covariance: moment " + std::to_string(k + 1) +
                             " is constant");
    }
  }
  const Matrix centered = f.rowwise() - f.colwise().mean();
  Matrix s = symmetrized((centered.transpose() * centered) / static_cast<double>(n));
  for (Eigen::Index k = 0; k < j; ++k) {
    if (!(s(k, k) > 0.0)) {
      throw DegenerateMoment("moment_covariance: moment " + std::to_string(k + 1) +
                             " has zero variance");
    }
  }
  return s;
}

// W = diag(1 / S_kk); off-diagonal weights are exactly zero.
inline Matrix diagonal_weight(const Matrix& s) {
  Matrix w = Matrix::Zero(s.rows(), s.cols());
  for (Eigen::Index k = 0; k < s.rows(); ++k) {
    if (!(s(k, k) > 0.0)) {
      throw DegenerateMoment("diagonal_weight: nonpositive variance at moment " +
                             std::to_string(k + 1));
    }
    w(k, k) = 1.0 / s(k, k);
  }
  return w;
}

// Variance of the mean moment vector across B nonparametric row resamples,
// scaled by n (so it estimates V[f_i], comparable to diag(S)).
inline Vector bootstrap_moment_variance(const MomentModel& model, const Dataset& data,
                                        const Vector& theta, int b, std::uint64_t seed) {
  if (b < 2) throw InvalidIngredients("bootstrap_moment_variance: need B >= 2");
  const Matrix f = model.eval(data, theta);
  const Eigen::Index n = f.rows(), j = f.cols();
  Matrix means(b, j);
  for (int rep = 0; rep < b; ++rep) {
    CounterRng rng(seed, static_cast<std::uint64_t>(rep));
    Vector acc = Vector::Zero(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      acc += f.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    }
    means.row(rep) = acc / static_cast<double>(n);
  }
  const Matrix centered = means.rowwise() - means.colwise().mean();
  Vector v = centered.array().square().colwise().sum() / static_cast<double>(b);
  v *= static_cast<double>(n);
  for (Eigen::Index k = 0; k < j; ++k) {
    if (!(v(k) > 0.0)) {
      throw DegenerateMoment("bootstrap_moment_variance: zero variance at moment " +
                             std::to_string(k + 1));
    }
  }
  return v;
}

struct EstimateResult {
  Vector theta_hat;
  double criterion_value = 0.0;
  GmmIngredients ingredients;
  int n_evals = 0;
};

struct EstimateOptions {
  JacobianScheme scheme = JacobianScheme::smooth;
  NelderMeadOptions nm;
  std::uint64_t jitter_seed = 0x5EEDBA5EULL;  // fixed: runs are reproducible
};

// Nelder-Mead from theta_start plus (budget - 1) jittered restarts; jitter is
// componentwise uniform on +-max(0.1, 0.1 |theta_j|). Ingredients are
// evaluated at the winning point.
inline EstimateResult gmm_estimate(const MomentModel& model, const Dataset& data,
                                   const Matrix& w, const Vector& theta_start,
                                   int budget, EstimateOptions opt = {}) {
  if (budget < 1) throw InvalidIngredients("gmm_estimate: budget must be >= 1");
  auto crit = [&](const Vector& th) { return gmm_criterion(model, data, th, w); };
  const double f_start = crit(theta_start);

  MinimizeResult best;
  best.fval = std::numeric_limits<double>::infinity();
  int total_evals = 1;
  for (int r = 0; r < budget; ++r) {
    Vector start = theta_start;
    if (r > 0) {
      CounterRng rng(opt.jitter_seed, static_cast<std::uint64_t>(r));
      for (Eigen::Index i = 0; i < start.size(); ++i) {
        const double m = std::max(0.1, 0.1 * std::abs(theta_start(i)));
        start(i) += m * (2.0 * rng.uniform() - 1.0);
      }
    }
    MinimizeResult res = nelder_mead(crit, start, opt.nm);
    total_evals += res.n_evals;
    if (res.fval < best.fval) best = res;
  }
  if (best.fval > f_start) {
    throw NoImprovement("gmm_estimate: no restart improved on the starting point");
  }

  EstimateResult out;
  out.theta_hat = best.x;
  out.criterion_value = best.fval;
  out.n_evals = total_evals;
  const Matrix g = numerical_jacobian(model, data, best.x, opt.scheme);
  const Matrix s = moment_covariance(model, data, best.x);
  out.ingredients = make_ingredients(g, s, w);
  return out;
}

}  // namespace momsens
