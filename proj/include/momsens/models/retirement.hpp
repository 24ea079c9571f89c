#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "momsens/estimation.hpp"
#include "momsens/models/probit.hpp"  // norm_cdf

namespace momsens {

inline constexpr int kRetireGridLo = 50;
inline constexpr int kRetireGridHi = 70;
inline constexpr int kRetireGridSize = kRetireGridHi - kRetireGridLo + 1;
inline constexpr int kRetireMoments = 52;
inline constexpr int kRetireParams = 34;
inline constexpr int kRegressorCount = 17;

enum class Member { husband, wife };

// 34-entry structural parameter vector. sigma_h^2 = 1 and the aggregator
// weight lambda = 1 are the model's scale normalizations and are not free.
struct RetirementParams {
  double gamma = 0.0;      // joint-leisure utility externality
  double alpha_spa = 0.0;  // wife's state-pension-age dummy coefficient
  Eigen::Matrix<double, 10, 1> beta_h = Eigen::Matrix<double, 10, 1>::Zero();
  Eigen::Matrix<double, 10, 1> beta_w = Eigen::Matrix<double, 10, 1>::Zero();
  Eigen::Matrix<double, 5, 1> delta_h = Eigen::Matrix<double, 5, 1>::Zero();
  Eigen::Matrix<double, 5, 1> delta_w = Eigen::Matrix<double, 5, 1>::Zero();
  double sigma_w2 = 1.0;
  double sigma_hw = 0.0;

  bool omega_pd() const {
    return sigma_w2 > 0.0 && sigma_w2 - sigma_hw * sigma_hw > 0.0;
  }

  Vector pack() const {
    Vector v(kRetireParams);
    v(0) = gamma;
    v(1) = alpha_spa;
    v.segment<10>(2) = beta_h;
    v.segment<10>(12) = beta_w;
    v.segment<5>(22) = delta_h;
    v.segment<5>(27) = delta_w;
    v(32) = sigma_w2;
    v(33) = sigma_hw;
    return v;
  }

  static RetirementParams unpack(const Vector& v) {
    if (v.size() != kRetireParams) {
      throw ConfigError("RetirementParams: expected 34 entries");
    }
    RetirementParams p;
    p.gamma = v(0);
    p.alpha_spa = v(1);
    p.beta_h = v.segment<10>(2);
    p.beta_w = v.segment<10>(12);
    p.delta_h = v.segment<5>(22);
    p.delta_w = v.segment<5>(27);
    p.sigma_w2 = v(32);
    p.sigma_hw = v(33);
    return p;
  }

  static std::vector<std::string> labels() {
    std::vector<std::string> out = {"gamma", "alpha_spa"};
    const char* covs[10] = {"hskill", "gp10",  "badhealth", "income",    "ppp",
                            "eps",    "byear", "sp_income", "sp_ppp",    "sp_eps"};
    for (const char* c : covs) out.push_back(std::string("bh_") + c);
    for (const char* c : covs) out.push_back(std::string("bw_") + c);
    const char* ages[5] = {"const", "trend", "d55", "d60", "d65"};
    for (const char* a : ages) out.push_back(std::string("dh_") + a);
    for (const char* a : ages) out.push_back(std::string("dw_") + a);
    out.push_back("sigma_w2");
    out.push_back("sigma_hw");
    return out;
  }
};

// Point-estimate magnitudes used as the synthetic-experiment truth and as the
// default theta_star in configs.
inline RetirementParams reference_params() {
  RetirementParams p;
  p.gamma = 0.026;
  p.alpha_spa = 0.105;
  p.beta_h << -0.129, 0.315, 0.091, 0.006, 0.194, 0.610, 0.005, 0.005, 0.074, 0.171;
  p.beta_w << -0.148, 0.152, 0.001, 0.011, -0.005, -0.044, -0.005, 0.003, -0.005, 0.013;
  p.delta_h << -2.413, 0.036, 0.632, 0.867, 1.978;
  p.delta_w << -1.667, 0.020, 0.729, 1.323, 1.452;
  p.sigma_w2 = 0.917;
  p.sigma_hw = 0.359;
  return p;
}

// Pension Act 1995 schedule at annual cohort resolution: 60 before the 1950
// cohort, 65 from 1955 on, one year per cohort in between.
inline double spa_from_cohort(double cohort_w) {
  if (cohort_w < 1950.0) return 60.0;
  if (cohort_w >= 1955.0) return 65.0;
  return 60.0 + (cohort_w - 1950.0);
}

inline double delta_at(const Eigen::Matrix<double, 5, 1>& d, int t) {
  return d(0) + d(1) * (t - 25.0) + (t >= 55 ? d(2) : 0.0) +
         (t >= 60 ? d(3) : 0.0) + (t >= 65 ? d(4) : 0.0);
}

// Household covariate schema, one column set per member. "Covariates" are the
// ten utility regressors (own seven + spouse income/ppp/eps).
inline const std::array<const char*, 10>& covariate_names() {
  static const std::array<const char*, 10> names = {
      "hskill", "gp10", "badhealth", "income", "ppp",
      "eps",    "byear", "sp_income", "sp_ppp", "sp_eps"};
  return names;
}

struct HouseholdRow {
  int age_h = 0, age_w = 0, cohort_h = 0, cohort_w = 0;
  double spa_w = 0.0;
  Eigen::Matrix<double, 10, 1> x_h, x_w;
};

inline HouseholdRow household_row(const Dataset& d, Eigen::Index i) {
  HouseholdRow hh;
  hh.age_h = static_cast<int>(d.col("age_h")(i));
  hh.age_w = static_cast<int>(d.col("age_w")(i));
  hh.cohort_h = static_cast<int>(d.col("cohort_h")(i));
  hh.cohort_w = static_cast<int>(d.col("cohort_w")(i));
  hh.spa_w = d.has("spa_w") ? d.col("spa_w")(i) : spa_from_cohort(hh.cohort_w);
  const auto& names = covariate_names();
  for (int k = 0; k < 10; ++k) {
    hh.x_h(k) = d.col(std::string(names[k]) + "_h")(i);
    hh.x_w(k) = d.col(std::string(names[k]) + "_w")(i);
  }
  return hh;
}

// Flow utility of being retired at age t relative to working, given the
// partner's retirement calendar year. The externality pays off from the
// calendar year the partner is (planned) retired onward.
inline double flow_utility(Member m, int t, int partner_retire_calendar,
                           const HouseholdRow& hh, double eps,
                           const RetirementParams& p) {
  if (m == Member::husband) {
    const double ext = (hh.cohort_h + t >= partner_retire_calendar) ? p.gamma : 0.0;
    return hh.x_h.dot(p.beta_h) + delta_at(p.delta_h, t) + ext + eps;
  }
  const double ext = (hh.cohort_w + t >= partner_retire_calendar) ? p.gamma : 0.0;
  const double spa = (static_cast<double>(t) >= hh.spa_w) ? p.alpha_spa : 0.0;
  return hh.x_w.dot(p.beta_w) + delta_at(p.delta_w, t) + ext + spa + eps;
}

// Discounted sum of flows from one's own retirement age to t_max.
inline double plan_value(Member m, int r_own, int r_partner, const HouseholdRow& hh,
                         double eps, const RetirementParams& p, double rho,
                         int t_max) {
  const int age = (m == Member::husband) ? hh.age_h : hh.age_w;
  const int partner_cal = (m == Member::husband) ? hh.cohort_w + r_partner
                                                 : hh.cohort_h + r_partner;
  double value = 0.0;
  for (int t = r_own; t <= t_max; ++t) {
    value += std::pow(rho, t - age) * flow_utility(m, t, partner_cal, hh, eps, p);
  }
  return value;
}

// Exhaustive argmax of V_h + V_w over the retirement-age grid; ties go to the
// smallest r_h, then the smallest r_w.
inline std::pair<int, int> optimal_plan(const HouseholdRow& hh, double eps_h,
                                        double eps_w, const RetirementParams& p,
                                        double rho, int t_max) {
  if (!p.omega_pd()) throw OmegaNotPd("optimal_plan: Omega is not positive definite");
  double best = -std::numeric_limits<double>::infinity();
  int best_h = kRetireGridLo, best_w = kRetireGridLo;
  for (int rh = kRetireGridLo; rh <= kRetireGridHi; ++rh) {
    for (int rw = kRetireGridLo; rw <= kRetireGridHi; ++rw) {
      const double a = plan_value(Member::husband, rh, rw, hh, eps_h, p, rho, t_max) +
                       plan_value(Member::wife, rw, rh, hh, eps_w, p, rho, t_max);
      if (a > best) {
        best = a;
        best_h = rh;
        best_w = rw;
      }
    }
  }
  return {best_h, best_w};
}

// Synthetic covariate population matched to the descriptive targets; fields
// are drawn independently. Ages are integer-uniform on [40, 59] for husbands
// with a rounded-normal age gap centered at 1.5 years for wives.
inline Dataset synthetic_population(Eigen::Index n, std::uint64_t seed,
                                    int interview_year = 2001) {
  const struct {
    double hskill_h = 0.157, hskill_w = 0.139;
    double gp10_h = 0.039, gp10_w = 0.080;
    double badhealth_h = 0.182, badhealth_w = 0.115;
    double inc_mean_h = 25.248, inc_sd_h = 17.12;
    double inc_mean_w = 13.815, inc_sd_w = 10.78;
    double ppp_h = 0.280, ppp_w = 0.134;
    double eps_h = 0.514, eps_w = 0.466;
  } tg;
  auto lognormal = [](CounterRng& rng, double m, double sd) {
    const double s2 = std::log(1.0 + (sd / m) * (sd / m));
    return std::exp(std::log(m) - 0.5 * s2 + std::sqrt(s2) * rng.normal());
  };
  Matrix xh(n, 10), xw(n, 10);
  Vector age_h(n), age_w(n), coh_h(n), coh_w(n), spa(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i));
    const double hs_h = rng.uniform() < tg.hskill_h;
    const double hs_w = rng.uniform() < tg.hskill_w;
    const double gp_h = rng.uniform() < tg.gp10_h;
    const double gp_w = rng.uniform() < tg.gp10_w;
    const double bh_h = rng.uniform() < tg.badhealth_h;
    const double bh_w = rng.uniform() < tg.badhealth_w;
    const double in_h = lognormal(rng, tg.inc_mean_h, tg.inc_sd_h);
    const double in_w = lognormal(rng, tg.inc_mean_w, tg.inc_sd_w);
    const double pp_h = rng.uniform() < tg.ppp_h;
    const double pp_w = rng.uniform() < tg.ppp_w;
    const double ep_h = rng.uniform() < tg.eps_h;
    const double ep_w = rng.uniform() < tg.eps_w;
    const double ah = 40.0 + static_cast<double>(rng.below(20));
    const double gap = std::round(1.5 + 2.0 * rng.normal());
    const double aw = std::clamp(ah - gap, 40.0, 59.0);
    age_h(i) = ah;
    age_w(i) = aw;
    coh_h(i) = interview_year - ah;
    coh_w(i) = interview_year - aw;
    spa(i) = spa_from_cohort(coh_w(i));
    const double by_h = coh_h(i) - 1955.0, by_w = coh_w(i) - 1955.0;
    xh.row(i) << hs_h, gp_h, bh_h, in_h, pp_h, ep_h, by_h, in_w, pp_w, ep_w;
    xw.row(i) << hs_w, gp_w, bh_w, in_w, pp_w, ep_w, by_w, in_h, pp_h, ep_h;
  }
  Dataset d;
  d.add_column("cohort_h", coh_h);
  d.add_column("cohort_w", coh_w);
  d.add_column("age_h", age_h);
  d.add_column("age_w", age_w);
  d.add_column("spa_w", spa);
  const auto& names = covariate_names();
  for (int k = 0; k < 10; ++k) d.add_column(std::string(names[k]) + "_h", xh.col(k));
  for (int k = 0; k < 10; ++k) d.add_column(std::string(names[k]) + "_w", xw.col(k));
  return d;
}

// Grid-argmax engine with the value function decomposed into theta-independent
// discount tables plus theta-dependent bases:
//   V_h(r_h, r_w) = base_h(r_h) + eps_h cum_h(r_h) + gamma cum_h(max(r_h, r_w + dc))
// where cum_h(t) = sum_{u=t}^{t_max} rho^{u-age_h} and dc aligns calendars.
class RetirementEngine {
 public:
  RetirementEngine(const Dataset& households, double rho, int t_max)
      : n_(households.rows()), rho_(rho), t_max_(t_max),
        tab_(t_max - kRetireGridLo + 2) {
    if (t_max < kRetireGridHi) throw ConfigError("retirement: t_max must be >= 70");
    cum_h_.resize(n_ * tab_);
    cum_w_.resize(n_ * tab_);
    cumt_h_.resize(n_ * tab_);
    cumt_w_.resize(n_ * tab_);
    coh_h_.resize(n_);
    coh_w_.resize(n_);
    spa_idx_.resize(n_);
    x_h_.resize(n_, 10);
    x_w_.resize(n_, 10);
    const auto& names = covariate_names();
    for (int k = 0; k < 10; ++k) {
      x_h_.col(k) = households.col(std::string(names[k]) + "_h");
      x_w_.col(k) = households.col(std::string(names[k]) + "_w");
    }
    const Vector& age_h = households.col("age_h");
    const Vector& age_w = households.col("age_w");
    const Vector& coh_h = households.col("cohort_h");
    const Vector& coh_w = households.col("cohort_w");
    for (Eigen::Index i = 0; i < n_; ++i) {
      coh_h_[i] = static_cast<int>(coh_h(i));
      coh_w_[i] = static_cast<int>(coh_w(i));
      const double spa_w = households.has("spa_w") ? households.col("spa_w")(i)
                                                   : spa_from_cohort(coh_w(i));
      spa_idx_[i] = static_cast<int>(std::ceil(spa_w - 1e-12)) - kRetireGridLo;
      fill_tables(&cum_h_[i * tab_], &cumt_h_[i * tab_], age_h(i));
      fill_tables(&cum_w_[i * tab_], &cumt_w_[i * tab_], age_w(i));
    }
  }

  Eigen::Index size() const { return n_; }
  double rho() const { return rho_; }
  int t_max() const { return t_max_; }

  // Theta-dependent per-household plan bases; recomputed on every moment
  // evaluation, O(n * grid).
  struct Bases {
    Matrix base_h, base_w;  // n x 21
    double gamma = 0.0;
  };

  Bases make_bases(const RetirementParams& p) const {
    Bases b;
    b.gamma = p.gamma;
    b.base_h.resize(n_, kRetireGridSize);
    b.base_w.resize(n_, kRetireGridSize);
    const Vector xbh = x_h_ * p.beta_h;
    const Vector xbw = x_w_ * p.beta_w;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double* ch = &cum_h_[i * tab_];
      const double* cth = &cumt_h_[i * tab_];
      const double* cw = &cum_w_[i * tab_];
      const double* ctw = &cumt_w_[i * tab_];
      for (int g = 0; g < kRetireGridSize; ++g) {
        const int t = kRetireGridLo + g;
        b.base_h(i, g) = p.delta_h(0) * ch[g] + p.delta_h(1) * cth[g] +
                         p.delta_h(2) * ch[idx(std::max(t, 55))] +
                         p.delta_h(3) * ch[idx(std::max(t, 60))] +
                         p.delta_h(4) * ch[idx(std::max(t, 65))] + xbh(i) * ch[g];
        b.base_w(i, g) = p.delta_w(0) * cw[g] + p.delta_w(1) * ctw[g] +
                         p.delta_w(2) * cw[idx(std::max(t, 55))] +
                         p.delta_w(3) * cw[idx(std::max(t, 60))] +
                         p.delta_w(4) * cw[idx(std::max(t, 65))] + xbw(i) * cw[g] +
                         p.alpha_spa * cw[std::min(std::max(g, spa_idx_[i]), tab_ - 1)];
      }
    }
    return b;
  }

  // Joint argmax for household i at taste shocks (eps_h, eps_w).
  std::pair<int, int> plan(const Bases& b, Eigen::Index i, double eps_h,
                           double eps_w) const {
    const double* ch = &cum_h_[i * tab_];
    const double* cw = &cum_w_[i * tab_];
    const int dc = coh_w_[i] - coh_h_[i];  // wife's calendar minus husband's
    double fh[kRetireGridSize], fw[kRetireGridSize];
    for (int g = 0; g < kRetireGridSize; ++g) {
      fh[g] = b.base_h(i, g) + eps_h * ch[g];
      fw[g] = b.base_w(i, g) + eps_w * cw[g];
    }
    const int top = tab_ - 1;
    double best = -std::numeric_limits<double>::infinity();
    int bh = 0, bw = 0;
    for (int gh = 0; gh < kRetireGridSize; ++gh) {
      const double vh = fh[gh];
      for (int gw = 0; gw < kRetireGridSize; ++gw) {
        const int ih = std::min(std::max(gh, gw + dc), top);
        const int iw = std::min(std::max(gw, gh - dc), top);
        const double a = vh + fw[gw] + b.gamma * (ch[ih] + cw[iw]);
        if (a > best) {
          best = a;
          bh = gh;
          bw = gw;
        }
      }
    }
    return {kRetireGridLo + bh, kRetireGridLo + bw};
  }

 private:
  int idx(int t) const { return std::min(t - kRetireGridLo, tab_ - 1); }

  void fill_tables(double* cum, double* cumt, double age) const {
    cum[tab_ - 1] = 0.0;
    cumt[tab_ - 1] = 0.0;
    for (int k = tab_ - 2; k >= 0; --k) {
      const int t = kRetireGridLo + k;
      const double w = std::pow(rho_, t - age);
      cum[k] = cum[k + 1] + w;
      cumt[k] = cumt[k + 1] + w * (t - 25.0);
    }
  }

  Eigen::Index n_;
  double rho_;
  int t_max_;
  int tab_;
  std::vector<double> cum_h_, cum_w_, cumt_h_, cumt_w_;
  std::vector<int> coh_h_, coh_w_, spa_idx_;
  Matrix x_h_, x_w_;
};

// One taste-shock draw per household (separate stream from the estimation
// draws) mapped through the engine: the synthetic "observed" plans.
inline std::pair<Vector, Vector> simulate_plans(const Dataset& households,
                                                const RetirementParams& p, double rho,
                                                int t_max, std::uint64_t seed) {
  if (!p.omega_pd()) throw OmegaNotPd("simulate_plans: Omega is not positive definite");
  RetirementEngine eng(households, rho, t_max);
  const auto bases = eng.make_bases(p);
  const double c = p.sigma_hw, sw = std::sqrt(p.sigma_w2 - c * c);
  const Eigen::Index n = households.rows();
  Vector rh(n), rw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    CounterRng rng(seed, static_cast<std::uint64_t>(i), 0xDA7AULL);
    const double z1 = rng.normal(), z2 = rng.normal();
    const auto [a, b] = eng.plan(bases, i, z1, c * z1 + sw * z2);
    rh(i) = a;
    rw(i) = b;
  }
  return {std::move(rh), std::move(rw)};
}

namespace detail {

inline std::array<double, 6> age_group_dummies(int r) {
  return {static_cast<double>(r >= 50 && r <= 54), static_cast<double>(r == 55),
          static_cast<double>(r >= 56 && r <= 59), static_cast<double>(r == 60),
          static_cast<double>(r >= 61 && r <= 64), static_cast<double>(r == 65)};
}

inline std::array<double, 3> calendar_diff_dummies(int diff) {
  return {static_cast<double>(diff == -2 || diff == -1),
          static_cast<double>(diff == 1 || diff == 2),
          static_cast<double>(diff == 0)};
}

}  // namespace detail

// The 52-moment indirect-inference model. Construction precomputes the
// data-side auxiliary statistics once (OLS coefficients on the 17 regressors,
// residual second moments, age-group shares, calendar-difference shares) and
// caches the standard-normal draws; eval maps theta through the plan engine
// with those common random numbers.
//
// Per-household contribution rows are the data-minus-simulated differences,
// with the regression block written as X_i (mean_s e_sim - e_data): because
// X'e_data = 0 exactly by the normal equations, the column means equal the
// simulated-residual form while row-level variation stays meaningful for S.
class RetirementModel final : public MomentModel {
 public:
  struct Options {
    int s_sim = 200;
    std::uint64_t sim_seed = 1;
    double rho = 0.96;
    int t_max = 80;
  };

  RetirementModel(const Dataset& households, Options opt)
      : opt_(opt), engine_(households, opt.rho, opt.t_max), n_(households.rows()) {
    if (!households.has("plan_h") || !households.has("plan_w")) {
      throw ConfigError("RetirementModel: dataset needs plan_h/plan_w columns");
    }
    plan_h_ = households.col("plan_h");
    plan_w_ = households.col("plan_w");
    coh_h_ = households.col("cohort_h");
    coh_w_ = households.col("cohort_w");

    x_ = build_regressors(households);
    const Eigen::ColPivHouseholderQR<Matrix> qr(x_);
    ols_h_ = qr.solve(plan_h_);
    ols_w_ = qr.solve(plan_w_);
    res_h_ = plan_h_ - x_ * ols_h_;
    res_w_ = plan_w_ - x_ * ols_w_;
    groups_h_.resize(n_, 6);
    groups_w_.resize(n_, 6);
    diffs_.resize(n_, 3);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const auto gh = detail::age_group_dummies(static_cast<int>(plan_h_(i)));
      const auto gw = detail::age_group_dummies(static_cast<int>(plan_w_(i)));
      for (int k = 0; k < 6; ++k) {
        groups_h_(i, k) = gh[k];
        groups_w_(i, k) = gw[k];
      }
      const int diff = static_cast<int>((coh_h_(i) + plan_h_(i)) -
                                        (coh_w_(i) + plan_w_(i)));
      const auto dd = detail::calendar_diff_dummies(diff);
      for (int k = 0; k < 3; ++k) diffs_(i, k) = dd[k];
    }
    // fixed z-draws: one pair per (household, draw)
    z1_.resize(n_, opt_.s_sim);
    z2_.resize(n_, opt_.s_sim);
    for (Eigen::Index i = 0; i < n_; ++i) {
      for (int s = 0; s < opt_.s_sim; ++s) {
        CounterRng rng(opt_.sim_seed, static_cast<std::uint64_t>(i),
                       static_cast<std::uint64_t>(s));
        z1_(i, s) = rng.normal();
        z2_(i, s) = rng.normal();
      }
    }
  }

  static Matrix build_regressors(const Dataset& households) {
    const Eigen::Index n = households.rows();
    Matrix x(n, kRegressorCount);
    x.col(0).setOnes();
    const auto& names = covariate_names();
    for (int k = 0; k < 7; ++k) {
      x.col(1 + k) = households.col(std::string(names[k]) + "_h");
      x.col(8 + k) = households.col(std::string(names[k]) + "_w");
    }
    const Vector& cw = households.col("cohort_w");
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, 15) = (cw(i) > 1950.0 && cw(i) <= 1954.0) ? 1.0 : 0.0;
      x(i, 16) = (cw(i) >= 1955.0) ? 1.0 : 0.0;
    }
    return x;
  }

  Matrix eval(const Dataset& data, const Vector& theta) const override {
    if (data.rows() != n_) {
      throw ConfigError("RetirementModel: eval dataset does not match construction");
    }
    const RetirementParams p = RetirementParams::unpack(theta);
    if (!p.omega_pd()) throw OmegaNotPd("RetirementModel: Omega is not positive definite");
    const double c = p.sigma_hw, sw = std::sqrt(p.sigma_w2 - c * c);
    const auto bases = engine_.make_bases(p);
    const double inv_s = 1.0 / opt_.s_sim;

    Matrix f(n_, kRetireMoments);
    for (Eigen::Index i = 0; i < n_; ++i) {
      double sum_eh = 0.0, sum_ew = 0.0, sum_e2h = 0.0, sum_e2w = 0.0, sum_ehw = 0.0;
      std::array<double, 6> sgh{}, sgw{};
      std::array<double, 3> sdif{};
      const double xh = x_.row(i).dot(ols_h_);
      const double xw = x_.row(i).dot(ols_w_);
      for (int s = 0; s < opt_.s_sim; ++s) {
        const double eps_h = z1_(i, s);
        const double eps_w = c * z1_(i, s) + sw * z2_(i, s);
        const auto [rh, rw] = engine_.plan(bases, i, eps_h, eps_w);
        const double eh = rh - xh;
        const double ew = rw - xw;
        sum_eh += eh;
        sum_ew += ew;
        sum_e2h += eh * eh;
        sum_e2w += ew * ew;
        sum_ehw += eh * ew;
        const auto gh = detail::age_group_dummies(rh);
        const auto gw = detail::age_group_dummies(rw);
        for (int k = 0; k < 6; ++k) {
          sgh[k] += gh[k];
          sgw[k] += gw[k];
        }
        const int diff = static_cast<int>((coh_h_(i) + rh) - (coh_w_(i) + rw));
        const auto dd = detail::calendar_diff_dummies(diff);
        for (int k = 0; k < 3; ++k) sdif[k] += dd[k];
      }
      const double deh = sum_eh * inv_s - res_h_(i);
      const double dew = sum_ew * inv_s - res_w_(i);
      for (int k = 0; k < kRegressorCount; ++k) {
        f(i, k) = x_(i, k) * deh;
        f(i, kRegressorCount + k) = x_(i, k) * dew;
      }
      for (int k = 0; k < 6; ++k) {
        f(i, 34 + k) = groups_h_(i, k) - sgh[k] * inv_s;
        f(i, 40 + k) = groups_w_(i, k) - sgw[k] * inv_s;
      }
      f(i, 46) = res_h_(i) * res_h_(i) - sum_e2h * inv_s;
      f(i, 47) = res_w_(i) * res_w_(i) - sum_e2w * inv_s;
      f(i, 48) = res_h_(i) * res_w_(i) - sum_ehw * inv_s;
      for (int k = 0; k < 3; ++k) f(i, 49 + k) = diffs_(i, k) - sdif[k] * inv_s;
    }
    return f;
  }

  Eigen::Index moment_count() const override { return kRetireMoments; }
  Eigen::Index parameter_count() const override { return kRetireParams; }

  std::vector<std::string> moment_labels() const override {
    std::vector<std::string> out;
    const char* regs[kRegressorCount] = {
        "const",     "hskill_h", "gp10_h",   "badhealth_h", "income_h", "ppp_h",
        "eps_h",     "byear_h",  "hskill_w", "gp10_w",      "badhealth_w",
        "income_w",  "ppp_w",    "eps_w",    "byear_w",     "cohw_1951_1954",
        "cohw_ge1955"};
    for (const char* r : regs) out.push_back(std::string("regH:") + r);
    for (const char* r : regs) out.push_back(std::string("regW:") + r);
    const char* ages[6] = {"50-54", "55", "56-59", "60", "61-64", "65"};
    for (const char* a : ages) out.push_back(std::string("ageH:") + a);
    for (const char* a : ages) out.push_back(std::string("ageW:") + a);
    out.push_back("var(e_h)");
    out.push_back("var(e_w)");
    out.push_back("cov(e_h,e_w)");
    out.push_back("diff[-2,-1]");
    out.push_back("diff[1,2]");
    out.push_back("joint_retirement");
    return out;
  }

  std::vector<std::string> param_labels() const override {
    return RetirementParams::labels();
  }

  const RetirementEngine& engine() const { return engine_; }
  const Matrix& regressors() const { return x_; }
  const Vector& ols_coeffs(Member m) const {
    return m == Member::husband ? ols_h_ : ols_w_;
  }
  const Vector& data_residuals(Member m) const {
    return m == Member::husband ? res_h_ : res_w_;
  }
  const Options& options() const { return opt_; }

 private:
  Options opt_;
  RetirementEngine engine_;
  Eigen::Index n_;
  Vector plan_h_, plan_w_, coh_h_, coh_w_;
  Matrix x_;
  Vector ols_h_, ols_w_, res_h_, res_w_;
  Matrix groups_h_, groups_w_, diffs_;
  Matrix z1_, z2_;
};

}  // namespace momsens
