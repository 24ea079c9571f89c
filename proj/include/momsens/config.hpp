#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "momsens/csv.hpp"
#include "momsens/models/retirement.hpp"

namespace momsens {

// Batch configuration for the retirement experiment. theta_star doubles as
// the synthetic data-generating truth and the evaluation point.
struct RetirementConfig {
  Eigen::Index n = 0;  // required
  std::uint64_t seed = 1;
  double rho = 0.96;
  int t_max = 80;
  int s_sim = 200;
  int bootstrap_b = 200;
  int interview_year = 2001;
  int nm_max_iter = 2000;
  int budget = 1;
  RetirementParams theta_star = reference_params();
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<double> parse_number_list(const std::string& s, size_t want,
                                             const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    out.push_back(std::stod(tok));
  }
  if (out.size() != want) {
    throw ConfigError("config field '" + key + "' needs " + std::to_string(want) +
                      " comma-separated values, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace detail

// Plain "key = value" text; '#' starts a comment. Unknown keys are errors so
// typos cannot silently fall back to defaults.
inline RetirementConfig parse_retirement_config(const std::string& text) {
  RetirementConfig cfg;
  bool have_n = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("config field '" + key + "' has no value");
    try {
      if (key == "n") {
        cfg.n = static_cast<Eigen::Index>(std::stoll(val));
        have_n = true;
      } else if (key == "seed") {
        cfg.seed = std::stoull(val);
      } else if (key == "rho") {
        cfg.rho = std::stod(val);
      } else if (key == "t_max") {
        cfg.t_max = std::stoi(val);
      } else if (key == "s_sim") {
        cfg.s_sim = std::stoi(val);
      } else if (key == "bootstrap_b") {
        cfg.bootstrap_b = std::stoi(val);
      } else if (key == "interview_year") {
        cfg.interview_year = std::stoi(val);
      } else if (key == "nm_max_iter") {
        cfg.nm_max_iter = std::stoi(val);
      } else if (key == "budget") {
        cfg.budget = std::stoi(val);
      } else if (key == "gamma") {
        cfg.theta_star.gamma = std::stod(val);
      } else if (key == "alpha_spa") {
        cfg.theta_star.alpha_spa = std::stod(val);
      } else if (key == "sigma_w2") {
        cfg.theta_star.sigma_w2 = std::stod(val);
      } else if (key == "sigma_hw") {
        cfg.theta_star.sigma_hw = std::stod(val);
      } else if (key == "beta_h") {
        const auto v = detail::parse_number_list(val, 10, key);
        for (int i = 0; i < 10; ++i) cfg.theta_star.beta_h(i) = v[i];
      } else if (key == "beta_w") {
        const auto v = detail::parse_number_list(val, 10, key);
        for (int i = 0; i < 10; ++i) cfg.theta_star.beta_w(i) = v[i];
      } else if (key == "delta_h") {
        const auto v = detail::parse_number_list(val, 5, key);
        for (int i = 0; i < 5; ++i) cfg.theta_star.delta_h(i) = v[i];
      } else if (key == "delta_w") {
        const auto v = detail::parse_number_list(val, 5, key);
        for (int i = 0; i < 5; ++i) cfg.theta_star.delta_w(i) = v[i];
      } else {
        throw ConfigError("unknown config field '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config field '" + key + "': cannot parse value '" + val + "'");
    }
  }
  if (!have_n) throw ConfigError("config field 'n' is required");
  if (cfg.n < 1) throw ConfigError("config field 'n' must be >= 1");
  if (cfg.s_sim < 1) throw ConfigError("config field 's_sim' must be >= 1");
  if (!cfg.theta_star.omega_pd()) {
    throw ConfigError("config theta_star: Omega is not positive definite");
  }
  return cfg;
}

inline RetirementConfig load_retirement_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_retirement_config(ss.str());
}

inline std::string dump_retirement_config(const RetirementConfig& cfg) {
  std::string out;
  auto kv = [&](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("n", std::to_string(cfg.n));
  kv("seed", std::to_string(cfg.seed));
  kv("rho", fmt_full(cfg.rho));
  kv("t_max", std::to_string(cfg.t_max));
  kv("s_sim", std::to_string(cfg.s_sim));
  kv("bootstrap_b", std::to_string(cfg.bootstrap_b));
  kv("interview_year", std::to_string(cfg.interview_year));
  kv("nm_max_iter", std::to_string(cfg.nm_max_iter));
  kv("budget", std::to_string(cfg.budget));
  kv("gamma", fmt_full(cfg.theta_star.gamma));
  kv("alpha_spa", fmt_full(cfg.theta_star.alpha_spa));
  kv("sigma_w2", fmt_full(cfg.theta_star.sigma_w2));
  kv("sigma_hw", fmt_full(cfg.theta_star.sigma_hw));
  auto list = [&](const std::string& k, const auto& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += fmt_full(v(i));
    }
    kv(k, s);
  };
  list("beta_h", cfg.theta_star.beta_h);
  list("beta_w", cfg.theta_star.beta_w);
  list("delta_h", cfg.theta_star.delta_h);
  list("delta_w", cfg.theta_star.delta_w);
  return out;
}

}  // namespace momsens
