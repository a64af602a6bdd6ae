#pragma once

// Run configuration and its flat text form:
//
//   # comment
//   NbrNeur = 12
//   P_local = 15
//
// Keys are case-sensitive; unknown keys and malformed values are errors.

#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "antimu/api.hpp"
#include "antimu/clonalg.hpp"
#include "antimu/error.hpp"
#include "antimu/features.hpp"
#include "antimu/gngu.hpp"
#include "antimu/rbf.hpp"

namespace antimu {

struct RunConfig {
  // Classifier and colony sizes.
  std::size_t nbr_neur = 12;  // hidden neurons
  std::size_t nbr_ant = 24;
  std::size_t nbr_sit = 12;   // hunting sites per ant
  std::size_t p_local = 15;   // ant patience
  std::size_t nbr_itr = 35;   // API iterations
  // Clonal selection.
  std::size_t nbr_lar = 0;    // low-affinity antibodies replaced per exposure
  std::size_t nbr_tra = 21;   // training pixels per class
  double coe = 10.0;          // cloning coefficient
  std::size_t gen = 30;       // generations
  std::size_t ncm = 10;       // antibodies selected for cloning

  // API amplitudes and stopping.
  double a_site = 0.1;
  double a_local = 0.01;
  double a_site_min = 0.01;
  double a_site_max = 0.5;
  double local_ratio = 10.0;
  bool heterogeneous = true;
  std::size_t nest_period = 1;
  std::size_t stagnation = 0;
  std::size_t max_evals = 0;

  // Features and encoding.
  std::size_t window = kDefaultWindow;
  unsigned quant_bits = kDefaultQuantBits;

  // Output layer.
  double theta = 0.2;
  double ridge = 1e-6;
  std::size_t width_neighbors = 2;

  // CLONALG extras.
  std::size_t pool_size = 50;
  double p_mut_min = 0.01;
  double p_mut_max = 0.3;
  bool seed_pool = false;  // start with the antigens placed in the remainder

  gngu::Params gngu;  // max_nodes is taken from nbr_neur

  std::uint64_t seed = 1;

  clonalg::Params clonalg_params(std::size_t antigens, std::size_t string_length) const {
    clonalg::Params p;
    p.pop_size = pool_size;
    p.select_count = ncm;
    p.clone_factor = coe;
    p.generations = gen;
    p.replace_count = nbr_lar;
    p.memory_size = antigens;
    p.string_length = string_length;
    p.p_min = p_mut_min;
    p.p_max = p_mut_max;
    return p;
  }

  api::Params api_params() const {
    api::Params p;
    p.nbr_ant = nbr_ant;
    p.nbr_sit = nbr_sit;
    p.patience = p_local;
    p.nbr_itr = nbr_itr;
    p.a_site = a_site;
    p.a_local = a_local;
    p.heterogeneous = heterogeneous;
    p.a_site_max = a_site_max;
    p.a_site_min = a_site_min;
    p.local_ratio = local_ratio;
    p.nest_period = nest_period;
    p.stagnation = stagnation;
    p.max_evals = max_evals;
    return p;
  }

  gngu::Params gngu_params() const {
    gngu::Params p = gngu;
    p.max_nodes = nbr_neur;
    return p;
  }

  void validate() const {
    if (nbr_tra == 0) throw config_error("NbrTra must be >= 1");
    if (window == 0 || window % 2 == 0) throw config_error("Window must be odd and >= 1");
    if (quant_bits == 0 || quant_bits > 32) throw config_error("Q must be in [1, 32]");
    if (!(theta >= 0.0)) throw config_error("Theta must be >= 0");
    if (!(ridge >= 0.0)) throw config_error("Ridge must be >= 0");
    if (width_neighbors == 0) throw config_error("WidthNeighbors must be >= 1");
    clonalg_params(nbr_tra, 1).validate();
    api_params().validate();
    gngu_params().validate();
  }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw config_error("invalid value '" + text + "' for " + key);
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw config_error("invalid boolean '" + text + "' for " + key + " (use 0/1/true/false)");
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct ConfigKey {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
ConfigKey count_key(const char* name, T RunConfig::*field) {
  return {name,
          [=](RunConfig& c, const std::string& v) { c.*field = parse_number<T>(name, v); },
          [=](const RunConfig& c) { return std::to_string(c.*field); }};
}

template <typename T>
ConfigKey gngu_count_key(const char* name, T gngu::Params::*field) {
  return {name,
          [=](RunConfig& c, const std::string& v) { c.gngu.*field = parse_number<T>(name, v); },
          [=](const RunConfig& c) { return std::to_string(c.gngu.*field); }};
}

inline double config_real(const char* key, const std::string& text) {
  try {
    return parse_real(text, key);
  } catch (const format_error&) {
    throw config_error("invalid value '" + text + "' for " + key);
  }
}

inline ConfigKey real_key(const char* name, double RunConfig::*field) {
  return {name,
          [=](RunConfig& c, const std::string& v) { c.*field = config_real(name, v); },
          [=](const RunConfig& c) { return format_real(c.*field); }};
}

inline ConfigKey gngu_real_key(const char* name, double gngu::Params::*field) {
  return {name,
          [=](RunConfig& c, const std::string& v) { c.gngu.*field = config_real(name, v); },
          [=](const RunConfig& c) { return format_real(c.gngu.*field); }};
}

inline ConfigKey bool_key(const char* name, bool RunConfig::*field) {
  return {name,
          [=](RunConfig& c, const std::string& v) { c.*field = parse_bool(name, v); },
          [=](const RunConfig& c) { return std::string(c.*field ? "1" : "0"); }};
}

}  // namespace detail

// Every accepted key, in the order they are written.
inline const std::vector<detail::ConfigKey>& config_keys() {
  using namespace detail;
  static const std::vector<ConfigKey> keys = {
      count_key("NbrNeur", &RunConfig::nbr_neur),
      count_key("NbrAnt", &RunConfig::nbr_ant),
      count_key("NbrSit", &RunConfig::nbr_sit),
      count_key("P_local", &RunConfig::p_local),
      count_key("NbrItr", &RunConfig::nbr_itr),
      count_key("NbrLar", &RunConfig::nbr_lar),
      count_key("NbrTra", &RunConfig::nbr_tra),
      real_key("Coe", &RunConfig::coe),
      count_key("Gen", &RunConfig::gen),
      count_key("Ncm", &RunConfig::ncm),
      real_key("A_site", &RunConfig::a_site),
      real_key("A_local", &RunConfig::a_local),
      real_key("A_site_min", &RunConfig::a_site_min),
      real_key("A_site_max", &RunConfig::a_site_max),
      real_key("LocalRatio", &RunConfig::local_ratio),
      bool_key("Heterogeneous", &RunConfig::heterogeneous),
      count_key("NestPeriod", &RunConfig::nest_period),
      count_key("Stagnation", &RunConfig::stagnation),
      count_key("MaxEvals", &RunConfig::max_evals),
      count_key("Window", &RunConfig::window),
      count_key("Q", &RunConfig::quant_bits),
      real_key("Theta", &RunConfig::theta),
      real_key("Ridge", &RunConfig::ridge),
      count_key("WidthNeighbors", &RunConfig::width_neighbors),
      count_key("PoolSize", &RunConfig::pool_size),
      real_key("PMutMin", &RunConfig::p_mut_min),
      real_key("PMutMax", &RunConfig::p_mut_max),
      bool_key("SeedPool", &RunConfig::seed_pool),
      gngu_real_key("GnguEpsB", &gngu::Params::eps_b),
      gngu_real_key("GnguEpsN", &gngu::Params::eps_n),
      gngu_count_key("GnguLambda", &gngu::Params::lambda),
      gngu_real_key("GnguAlpha", &gngu::Params::alpha),
      gngu_real_key("GnguD", &gngu::Params::d),
      gngu_real_key("GnguKUtility", &gngu::Params::k_utility),
      gngu_count_key("GnguMaxAge", &gngu::Params::max_age),
      gngu_count_key("GnguEpochs", &gngu::Params::epochs),
      {"GnguRefine",
       [](RunConfig& c, const std::string& v) { c.gngu.refine = detail::parse_bool("GnguRefine", v); },
       [](const RunConfig& c) { return std::string(c.gngu.refine ? "1" : "0"); }},
      count_key("Seed", &RunConfig::seed),
  };
  return keys;
}

inline void set_param(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys())
    if (key == k.name) {
      k.set(cfg, value);
      return;
    }
  throw config_error("unknown configuration key '" + key + "'");
}

inline std::string get_param(const RunConfig& cfg, const std::string& key) {
  for (const auto& k : config_keys())
    if (key == k.name) return k.get(cfg);
  throw config_error("unknown configuration key '" + key + "'");
}

// Applies `key = value` lines on top of `base`.
inline RunConfig parse_config(std::istream& is, RunConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    try {
      set_param(base, key, value);
    } catch (const config_error& e) {
      throw config_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

inline void write_config(std::ostream& os, const RunConfig& cfg) {
  for (const auto& k : config_keys()) os << k.name << " = " << k.get(cfg) << '\n';
}

}  // namespace antimu
