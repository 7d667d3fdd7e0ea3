#pragma once

// TOML configuration for the experiment harness. Every key can also be set
// from the command line as `section.key=value`; the value is parsed with TOML
// syntax, falling back to a bare string.

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <toml.hpp>

#include "bqr/experiment.hpp"

namespace bqr {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace config_detail {

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem", {"id", "T", "a0", "a1", "gamma", "mu0"}},
      {"ladder", {"n", "time_steps_factor", "min_time_steps"}},
      {"noise", {"sigma", "vartheta", "varthetabar", "vmax", "shared"}},
      {"schedules",
       {"beta", "beta_scale", "beta_value", "rho", "rho_alpha", "rho_value", "qhat", "qhat_q0",
        "kappa", "kappa_value"}},
      {"solver", {"scheme", "cutoff", "c_stab"}},
      {"run", {"trials", "seed", "times", "threads"}},
      {"regression",
       {"n", "trials", "sigma", "vmax", "mu0", "beta", "beta_scale", "beta_value", "pure_noise"}},
  };
  return keys;
}

inline void check_keys(const toml::table& root) {
  const auto& keys = known_keys();
  for (const auto& [section, node] : root) {
    const std::string s(section.str());
    const auto it = keys.find(s);
    if (it == keys.end()) throw ConfigError("unknown config section [" + s + "]");
    const toml::table* tbl = node.as_table();
    if (!tbl) throw ConfigError("config entry '" + s + "' must be a table");
    for (const auto& [key, value] : *tbl) {
      if (!it->second.contains(std::string(key.str()))) {
        throw ConfigError("unknown config key " + s + "." + std::string(key.str()));
      }
    }
  }
}

inline std::string where(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

inline const toml::node* find(const toml::table& root, std::string_view section,
                              std::string_view key) {
  const toml::table* tbl = root[section].as_table();
  return tbl ? tbl->get(key) : nullptr;
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 double& out) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  if (auto v = n->value<double>()) {
    out = *v;
    return;
  }
  throw ConfigError(where(section, key) + " must be a number");
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 std::size_t& out) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  if (auto v = n->value_exact<std::int64_t>(); v && *v >= 0) {
    out = static_cast<std::size_t>(*v);
    return;
  }
  throw ConfigError(where(section, key) + " must be a nonnegative integer");
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 std::uint64_t& out, bool /*seed*/) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  if (auto v = n->value_exact<std::int64_t>(); v && *v >= 0) {
    out = static_cast<std::uint64_t>(*v);
    return;
  }
  throw ConfigError(where(section, key) + " must be a nonnegative integer");
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 bool& out) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  if (auto v = n->value_exact<bool>()) {
    out = *v;
    return;
  }
  throw ConfigError(where(section, key) + " must be true or false");
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 std::string& out) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  if (auto v = n->value_exact<std::string>()) {
    out = *v;
    return;
  }
  throw ConfigError(where(section, key) + " must be a string");
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 std::vector<double>& out) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError(where(section, key) + " must be an array of numbers");
  out.clear();
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw ConfigError(where(section, key) + " must be an array of numbers");
    out.push_back(*v);
  }
}

inline void read(const toml::table& root, std::string_view section, std::string_view key,
                 std::vector<std::size_t>& out) {
  const toml::node* n = find(root, section, key);
  if (!n) return;
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError(where(section, key) + " must be an array of positive integers");
  out.clear();
  for (const auto& e : *arr) {
    auto v = e.value_exact<std::int64_t>();
    if (!v || *v <= 0) {
      throw ConfigError(where(section, key) + " must be an array of positive integers");
    }
    out.push_back(static_cast<std::size_t>(*v));
  }
}

template <class Enum>
Enum pick(std::string_view what, const std::string& name,
          std::initializer_list<std::pair<const char*, Enum>> options) {
  std::string list;
  for (const auto& [label, value] : options) {
    if (name == label) return value;
    list += list.empty() ? "" : ", ";
    list += label;
  }
  throw ConfigError(std::string(what) + ": unknown choice '" + name + "' (expected " + list + ")");
}

inline void read_beta(const toml::table& root, std::string_view section, BetaSchedule& beta) {
  std::string kind;
  read(root, section, "beta", kind);
  if (!kind.empty()) {
    beta.kind = pick<BetaSchedule::Kind>(where(section, "beta"), kind,
                                         {{"linear", BetaSchedule::Kind::linear},
                                          {"balanced", BetaSchedule::Kind::balanced},
                                          {"constant", BetaSchedule::Kind::constant}});
  }
  read(root, section, "beta_scale", beta.scale);
  read(root, section, "beta_value", beta.value);
}

}  // namespace config_detail

/// Applies `path=value` to the tree; `path` is `section.key`.
inline void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  const auto dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError("override key '" + path + "' must be section.key");
  }
  const std::string section = path.substr(0, dot);
  const std::string key = path.substr(dot + 1);

  toml::table parsed;
  try {
    parsed = toml::parse("v = " + raw);
  } catch (const toml::parse_error&) {
    parsed = toml::table{{"v", raw}};
  }
  if (!root.contains(section)) root.insert(section, toml::table{});
  toml::table* tbl = root[section].as_table();
  if (!tbl) throw ConfigError("config entry '" + section + "' must be a table");
  tbl->insert_or_assign(key, std::move(*parsed.get("v")));
}

inline toml::table parse_config_text(const std::string& text, const std::string& source = "config") {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
        << e.description();
    throw ConfigError(msg.str());
  }
}

inline toml::table load_config_file(const std::string& path) {
  try {
    return toml::parse_file(path);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << path << ":" << e.source().begin.line << ":" << e.source().begin.column << ": "
        << e.description();
    throw ConfigError(msg.str());
  }
}

inline ExperimentConfig experiment_from_toml(const toml::table& root) {
  using namespace config_detail;
  check_keys(root);
  ExperimentConfig cfg;
  read(root, "problem", "id", cfg.problem);
  read(root, "problem", "T", cfg.final_time);
  read(root, "problem", "a0", cfg.a0);
  read(root, "problem", "a1", cfg.a1);
  read(root, "problem", "gamma", cfg.gamma);
  read(root, "problem", "mu0", cfg.mu0);

  read(root, "ladder", "n", cfg.ladder);
  read(root, "ladder", "time_steps_factor", cfg.time_steps_factor);
  read(root, "ladder", "min_time_steps", cfg.min_time_steps);

  read(root, "noise", "sigma", cfg.sigma);
  read(root, "noise", "vartheta", cfg.vartheta);
  read(root, "noise", "varthetabar", cfg.varthetabar);
  read(root, "noise", "vmax", cfg.vmax);
  read(root, "noise", "shared", cfg.shared_noise);

  read_beta(root, "schedules", cfg.beta);
  std::string kind;
  read(root, "schedules", "rho", kind);
  if (!kind.empty()) {
    cfg.rho.kind = pick<RhoSchedule::Kind>("schedules.rho", kind,
                                           {{"log", RhoSchedule::Kind::logarithmic},
                                            {"constant", RhoSchedule::Kind::constant}});
  }
  read(root, "schedules", "rho_alpha", cfg.rho.alpha);
  read(root, "schedules", "rho_value", cfg.rho.value);
  kind.clear();
  read(root, "schedules", "qhat", kind);
  if (!kind.empty()) {
    cfg.qhat.kind = pick<QhatSchedule::Kind>("schedules.qhat", kind,
                                             {{"constant", QhatSchedule::Kind::constant},
                                              {"growing", QhatSchedule::Kind::growing}});
  }
  read(root, "schedules", "qhat_q0", cfg.qhat.q0);
  kind.clear();
  read(root, "schedules", "kappa", kind);
  if (!kind.empty()) {
    cfg.kappa.kind = pick<KappaSchedule::Kind>("schedules.kappa", kind,
                                               {{"coupled", KappaSchedule::Kind::coupled},
                                                {"constant", KappaSchedule::Kind::constant}});
  }
  read(root, "schedules", "kappa_value", cfg.kappa.value);

  kind.clear();
  read(root, "solver", "scheme", kind);
  if (!kind.empty()) {
    cfg.scheme = pick<TimeScheme>("solver.scheme", kind,
                                  {{"backward_euler", TimeScheme::backward_euler},
                                   {"crank_nicolson", TimeScheme::crank_nicolson}});
  }
  kind.clear();
  read(root, "solver", "cutoff", kind);
  if (!kind.empty()) {
    cfg.cutoff = pick<CutoffMode>("solver.cutoff", kind,
                                  {{"clamped", CutoffMode::clamped},
                                   {"paper_literal", CutoffMode::paper_literal}});
  }
  read(root, "solver", "c_stab", cfg.c_stab);

  read(root, "run", "trials", cfg.trials);
  read(root, "run", "seed", cfg.seed, true);
  read(root, "run", "threads", cfg.threads);
  // Evaluation times are given as fractions of T.
  std::vector<double> fractions;
  read(root, "run", "times", fractions);
  if (find(root, "run", "times")) {
    cfg.times.clear();
    for (double f : fractions) {
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("run.times entries must lie in [0, 1]");
      cfg.times.push_back(f * cfg.final_time);
    }
  } else {
    cfg.times = {0.0, 0.5 * cfg.final_time};
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline RegressionConfig regression_from_toml(const toml::table& root) {
  using namespace config_detail;
  check_keys(root);
  RegressionConfig cfg;
  read(root, "regression", "n", cfg.ladder);
  read(root, "regression", "trials", cfg.trials);
  read(root, "regression", "sigma", cfg.sigma);
  read(root, "regression", "vmax", cfg.vmax);
  read(root, "regression", "mu0", cfg.mu0);
  read(root, "regression", "pure_noise", cfg.pure_noise);
  read_beta(root, "regression", cfg.beta);
  read(root, "run", "seed", cfg.seed, true);
  read(root, "run", "threads", cfg.threads);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace bqr
