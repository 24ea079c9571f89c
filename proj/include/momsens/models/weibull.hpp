#pragma once

#include <cmath>

#include "momsens/estimation.hpp"

namespace momsens {

inline constexpr double kEulerGamma = 0.5772156649;  // 10 significant digits

// theta = (beta0/alpha, beta1/alpha, beta2/alpha, alpha), where beta0 is the
// hazard-level intercept: the covariate path is read as (1, x1, x2(s)), so b0
// enters the residual as +b0*alpha. At the simulated design b0 = -1/2.
struct WeibullParams {
  double b0, b1, b2, alpha;
};

inline WeibullParams weibull_truth() {
  const double s = 1.0 / (2.0 * std::sqrt(2.0));
  return WeibullParams{-0.5, s, s, 2.0};
}

struct SpellRecord {
  double T, x1, x21, x22, x23;
};

// Integrated Weibull hazard with the piecewise-constant covariate path
// (x1, x2s) on [0,1), [1,2), [2,inf):
//   sum_s exp(beta1 x1 + beta2 x2s) * (t_hi^alpha - t_lo^alpha).
// Slopes only; any constant hazard level is the caller's to fold in.
inline double integrated_hazard(double t, const SpellRecord& rec, double beta1,
                                double beta2, double alpha) {
  const double base = beta1 * rec.x1;
  double lam = std::exp(base + beta2 * rec.x21) * std::pow(std::min(t, 1.0), alpha);
  if (t > 1.0) {
    lam += std::exp(base + beta2 * rec.x22) * (std::pow(std::min(t, 2.0), alpha) - 1.0);
  }
  if (t > 2.0) {
    lam += std::exp(base + beta2 * rec.x23) * (std::pow(t, alpha) - std::pow(2.0, alpha));
  }
  return lam;
}

namespace detail {

// Inverts level * integrated_hazard(T) = target segment by segment, working in
// logs so large alpha * log(t) cannot overflow.
inline double invert_integrated_hazard(double target, double c1, double c2, double c3,
                                       double alpha) {
  const double cap1 = std::exp(c1);  // cumulative hazard at t = 1
  if (target <= cap1) {
    return std::exp((std::log(target) - c1) / alpha);
  }
  const double two_a = std::pow(2.0, alpha);
  const double cap2 = cap1 + std::exp(c2) * (two_a - 1.0);
  if (target <= cap2) {
    return std::pow(1.0 + (target - cap1) * std::exp(-c2), 1.0 / alpha);
  }
  return std::exp(std::log(two_a + (target - cap2) * std::exp(-c3)) / alpha);
}

}  // namespace detail

struct WeibullDgp {
  double beta0 = -1.0;  // folded into the hazard level
  double beta1 = 1.0 / std::sqrt(2.0);
  double beta2 = 1.0 / std::sqrt(2.0);
  double alpha = 2.0;
  double eta_sigma = std::sqrt(0.5);  // sd of log eta
};

// Covariates: x1 = Z1, x21 = Z2, x22 = (x21+Z3)/sqrt(2), x23 = (x22+Z4)/sqrt(2);
// eta log-normal; T solves eta * Lambda(T) = Exp(1). The dataset carries eta as
// a diagnostic column; the moment model ignores it.
inline Dataset simulate_weibull(Eigen::Index n, std::uint64_t seed,
                                WeibullDgp dgp = {}) {
  Vector T(n), x1(n), x21(n), x22(n), x23(n), eta(n);
  const double r2 = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double z3 = rng.normal();
    const double z4 = rng.normal();
    const double z5 = rng.normal();
    const double u = rng.uniform();
    x1(i) = z1;
    x21(i) = z2;
    x22(i) = (x21(i) + z3) * r2;
    x23(i) = (x22(i) + z4) * r2;
    eta(i) = std::exp(dgp.eta_sigma * z5);
    const double target = -std::log(u) / eta(i);
    const double bx = dgp.beta0 + dgp.beta1 * x1(i);
    T(i) = detail::invert_integrated_hazard(target, bx + dgp.beta2 * x21(i),
                                            bx + dgp.beta2 * x22(i),
                                            bx + dgp.beta2 * x23(i), dgp.alpha);
  }
  Dataset d;
  d.add_column("T", std::move(T));
  d.add_column("x1", std::move(x1));
  d.add_column("x21", std::move(x21));
  d.add_column("x22", std::move(x22));
  d.add_column("x23", std::move(x23));
  d.add_column("eta", std::move(eta));
  return d;
}

// Five moments r * (1, x1, x21, x22, x23) with
//   r = b0 alpha + log Lambda(T; alpha b1, alpha b2, alpha) + gamma_E,
// so b0 absorbs the hazard level and the mean of -log(eta): at the truth,
// eta * exp(b0 alpha) * Lambda(T) is unit exponential and r is the mean-zero
// Gumbel-plus-heterogeneity residual.
class WeibullModel final : public MomentModel {
 public:
  Matrix eval(const Dataset& data, const Vector& theta) const override {
    const Vector& T = data.col("T");
    const Vector& x1 = data.col("x1");
    const Vector& x21 = data.col("x21");
    const Vector& x22 = data.col("x22");
    const Vector& x23 = data.col("x23");
    const double b0 = theta(0), alpha = theta(3);
    const double beta1 = alpha * theta(1), beta2 = alpha * theta(2);
    const Eigen::Index n = T.size();
    Matrix f(n, 5);
    for (Eigen::Index i = 0; i < n; ++i) {
      const SpellRecord rec{T(i), x1(i), x21(i), x22(i), x23(i)};
      const double lam = integrated_hazard(T(i), rec, beta1, beta2, alpha);
      if (!(lam > 1e-300) || !std::isfinite(lam)) {
        throw NonFinite("weibull moments: integrated hazard under/overflow");
      }
      const double r = b0 * alpha + std::log(lam) + kEulerGamma;
      f(i, 0) = r;
      f(i, 1) = r * x1(i);
      f(i, 2) = r * x21(i);
      f(i, 3) = r * x22(i);
      f(i, 4) = r * x23(i);
    }
    return f;
  }

  Eigen::Index moment_count() const override { return 5; }
  Eigen::Index parameter_count() const override { return 4; }

  std::vector<std::string> moment_labels() const override {
    return {"E[e]", "E[e*x1]", "E[e*x21]", "E[e*x22]", "E[e*x23]"};
  }
  std::vector<std::string> param_labels() const override {
    return {"b0", "b1", "b2", "alpha"};
  }
};

inline Vector weibull_theta_vector(WeibullParams p = weibull_truth()) {
  Vector v(4);
  v << p.b0, p.b1, p.b2, p.alpha;
  return v;
}

}  // namespace momsens
