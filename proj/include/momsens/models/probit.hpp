#pragma once

#include <cmath>

#include "momsens/estimation.hpp"

namespace momsens {

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

inline double norm_pdf(double x) {
  return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

struct ProbitParams {
  double beta0, beta1, beta2;
};

inline ProbitParams probit_truth() {
  const double v = 1.0 / std::sqrt(3.0);
  return ProbitParams{v, v, v};
}

// DGP: (x1, x2) bivariate standard normal with correlation 0.5 (Cholesky of
// [[1,.5],[.5,1]]), eps standard normal, y = 1{beta0 + beta1 x1 + beta2 x2 +
// eps > 0}. The published description maps y the other way around, but only
// this orientation matches the published P(y=1) = 0.66 and the sensitivity
// tables; see README for the note.
inline Dataset simulate_probit(Eigen::Index n, std::uint64_t seed,
                               ProbitParams p = probit_truth()) {
  Vector y(n), x1(n), x2(n);
  const double root34 = std::sqrt(0.75);
  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double eps = rng.normal();
    x1(i) = z1;
    x2(i) = 0.5 * z1 + root34 * z2;
    const double ystar = p.beta0 + p.beta1 * x1(i) + p.beta2 * x2(i) + eps;
    y(i) = ystar > 0.0 ? 1.0 : 0.0;
  }
  Dataset d;
  d.add_column("y", std::move(y));
  d.add_column("x1", std::move(x1));
  d.add_column("x2", std::move(x2));
  return d;
}

// Six moments e * (1, x1, x2, x1^2, x1 x2, x2^2) with
// e = y - Phi(beta0 + beta1 x1 + beta2 x2).
class ProbitModel final : public MomentModel {
 public:
  Matrix eval(const Dataset& data, const Vector& theta) const override {
    const Vector& y = data.col("y");
    const Vector& x1 = data.col("x1");
    const Vector& x2 = data.col("x2");
    const Eigen::Index n = y.size();
    Matrix f(n, 6);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double idx = theta(0) + theta(1) * x1(i) + theta(2) * x2(i);
      const double e = y(i) - norm_cdf(idx);
      f(i, 0) = e;
      f(i, 1) = e * x1(i);
      f(i, 2) = e * x2(i);
      f(i, 3) = e * x1(i) * x1(i);
      f(i, 4) = e * x1(i) * x2(i);
      f(i, 5) = e * x2(i) * x2(i);
    }
    return f;
  }

  Eigen::Index moment_count() const override { return 6; }
  Eigen::Index parameter_count() const override { return 3; }

  std::vector<std::string> moment_labels() const override {
    return {"E[e]", "E[e*x1]", "E[e*x2]", "E[e*x1^2]", "E[e*x1*x2]", "E[e*x2^2]"};
  }
  std::vector<std::string> param_labels() const override {
    return {"beta0", "beta1", "beta2"};
  }
};

inline Vector probit_theta_vector(ProbitParams p = probit_truth()) {
  Vector v(3);
  v << p.beta0, p.beta1, p.beta2;
  return v;
}

}  // namespace momsens
